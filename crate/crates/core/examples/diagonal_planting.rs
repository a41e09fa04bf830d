//! Exact laws of the planted diagonal: distance of the null diagonal count
//! from `Bin(N, Q)` and of the planted joint law from its target, next to
//! the closed-form bounds.

use subred::oracle::{diag_support_bounds, diag_support_law};

fn main() -> subred::Result<()> {
    println!("{:>3} {:>2} {:>3} {:>5} {:>5} {:>11} {:>11} {:>11} {:>11}", "n", "k", "N", "p", "q", "tv_null", "bound", "tv_plant", "bound");
    for &(n, k, big_n, p, q) in &[
        (8, 2, 40, 1.0, 0.5),
        (10, 2, 60, 1.0, 0.64),
        (12, 3, 64, 0.9, 0.7),
        (12, 2, 64, 0.8, 0.6),
    ] {
        let eps = big_n as f64 / n as f64 - p / q;
        let laws = diag_support_law(n, k, big_n, p, q)?;
        let (bn, bp) = diag_support_bounds(n, k, big_n, p, q, eps)?;
        println!(
            "{n:>3} {k:>2} {big_n:>3} {p:>5} {q:>5} {:>11.3e} {bn:>11.3e} {:>11.3e} {bp:>11.3e}",
            laws.tv_null(),
            laws.tv_planted()
        );
    }
    Ok(())
}
