//! Chernoff exponents of the shipped pair families: closed forms against
//! the numeric Legendre transform, and the shift `E_Q(tau) = E_P(tau) + tau`.

use subred::pairs::{chernoff_exponent, chernoff_exponent_numeric, ComputablePair, ExponentQuery, Side};

fn main() -> subred::Result<()> {
    let pairs = [
        ComputablePair::gaussian(0.8)?,
        ComputablePair::bernoulli(0.6, 0.3)?,
        ComputablePair::bernoulli(1.0, 0.5)?,
    ];
    for pair in pairs {
        println!("{pair}: kl_pq={:.5} kl_qp={:.5} skl={:.5} chi2={:.5}", pair.kl_pq(), pair.kl_qp(), pair.skl(), pair.chi2());
        println!("{:>9} {:>11} {:>11} {:>11} {:>11}", "tau", "E_P", "E_P(num)", "E_Q", "E_Q-E_P");
        let (lo, hi) = pair.llr_range();
        let (lo, hi) = (lo.max(-1.5), hi.min(1.5));
        for i in 0..=6 {
            let tau = lo + (hi - lo) * i as f64 / 6.0;
            let ep = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderP, tau });
            let en = chernoff_exponent_numeric(&pair, ExponentQuery { side: Side::UnderP, tau });
            let eq = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderQ, tau });
            println!("{tau:>9.4} {ep:>11.6} {en:>11.6} {eq:>11.6} {:>11.6}", eq - ep);
        }
        println!();
    }
    Ok(())
}
