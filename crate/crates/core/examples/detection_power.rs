//! Monte Carlo error of the sum, max and exhaustive-search tests on
//! symmetric submatrix detection.

use subred::detect::{ensemble_sampler, estimate_error, Detector, Ensemble, MaxTest, SearchTest, SumTest};
use subred::pairs::ComputablePair;

fn report(det: &dyn Detector, n: usize, k: usize, pair: ComputablePair, trials: usize) -> subred::Result<()> {
    let null = ensemble_sampler(Ensemble::Ssd, n, None, pair)?;
    let planted = ensemble_sampler(Ensemble::Ssd, n, Some(k), pair)?;
    let r = estimate_error(det, &null, &planted, trials, 2024)?;
    println!(
        "{:>6} n={n:>3} k={k:>2} {pair}: type1={:.3} type2={:.3} total={:.3} (+/- {:.3})",
        r.detector, r.type1, r.type2, r.total, r.stderr
    );
    Ok(())
}

fn main() -> subred::Result<()> {
    let (n, k) = (200, 20);
    for mu in [0.1, 0.5, 1.0] {
        let pair = ComputablePair::gaussian(mu)?;
        report(&SumTest::new(pair, n, k)?, n, k, pair, 200)?;
    }
    // A strong, sparse signal favours the max test.
    let pair = ComputablePair::gaussian(5.0)?;
    report(&MaxTest::union_bound(pair, n * n, 0.1)?, n, 3, pair, 200)?;
    report(&SumTest::new(pair, n, 3)?, n, 3, pair, 200)?;
    // Exhaustive search only fits small instances.
    // Its zero threshold needs the signal to beat C(n, k)^2 null averages.
    let pair = ComputablePair::gaussian(4.0)?;
    report(&SearchTest::new(pair, 2)?, 12, 2, pair, 100)?;
    Ok(())
}
