//! Information-theoretic side: exact chi-square of the planted mixture,
//! the sufficient condition for impossibility, and the entrywise
//! counterexample that rules out bitwise transport.

use subred::oracle::it_impossibility_margin;
use subred::pairs::{entrywise_counterexample, ComputablePair};

fn main() -> subred::Result<()> {
    let n = 200;
    for k in [5, 10, 20, 40] {
        for skl in [1e-4, 1e-3, 1e-2] {
            let pair = ComputablePair::gaussian_with_skl(skl)?;
            let r = it_impossibility_margin(n, k, &pair)?;
            println!(
                "n={n} k={k:>2} skl={skl:.0e}: chi2={:.3e} rhs={:.3e} condition={} mixture chi2={:.3e} tv bound={}",
                r.chi2,
                r.rhs,
                r.satisfied,
                r.mixture_chi2,
                r.tv_bound.map_or("none".to_string(), |b| format!("{b:.3}"))
            );
        }
    }
    let c = entrywise_counterexample(1000, 0.5)?;
    println!("entrywise counterexample at n=1000: {c:?}");
    Ok(())
}
