//! A coarse phase-diagram sweep for Gaussian biclustering, printed as CSV.

use subred::cli::{cmd_sweep, SweepFamily, SweepSpec};
use subred::detect::Ensemble;

fn main() -> subred::Result<()> {
    let spec = SweepSpec {
        family: SweepFamily::Bc,
        alphas: vec![0.25, 0.75, 1.5],
        betas: vec![0.3, 0.6],
        n: 120,
        trials: 60,
        seed: 1,
        slack: None,
        ensemble: Ensemble::Ssd,
    };
    cmd_sweep(&spec, std::io::stdout().lock())
}
