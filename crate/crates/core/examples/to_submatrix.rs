//! End-to-end reduction from planted clique to Gaussian submatrix
//! detection: the output dimension, the TV guarantee, and where the
//! planted LLR mass lands.

use subred::detect::llr_matrix;
use subred::pairs::ComputablePair;
use subred::reduction::{to_submatrix, tv_guarantee, ReductionConfig, ReductionParams};
use subred::rng::stream_rng;
use subred::sampler::{sample_er, sample_pds};

fn main() -> subred::Result<()> {
    let params = ReductionParams {
        n: 8,
        k: 2,
        big_n: 180,
        ell: 2,
        iterations: 250,
        p: 1.0,
        q: 0.81,
        epsilon: None,
        strict: true,
    };
    let pair = ComputablePair::gaussian(0.008)?;
    let cfg = ReductionConfig::homogeneous(params, pair)?;
    let g = tv_guarantee(&cfg)?;
    println!(
        "output {0}x{0}, Q={1:.4}, eps={2:.3}; delta={3:.3e} bound_null={4:.4} bound_planted={5:.4} (planted hypotheses hold: {6})",
        cfg.output_dim(),
        cfg.q_mid(),
        cfg.epsilon(),
        g.delta,
        g.bound_null,
        g.bound_planted,
        g.planted_hypotheses_hold
    );

    let mut rng = stream_rng(5, &[]);
    for planted in [false, true] {
        let graph = if planted { sample_pds(8, 2, 1.0, 0.81, &mut rng)? } else { sample_er(8, 0.81, &mut rng)? };
        let out = to_submatrix(&graph, &cfg, &mut rng)?;
        let llr = llr_matrix(&out.matrix, &pair);
        let total: f64 = llr.iter().sum();
        let d = out.matrix.d();
        let mut block = 0.0;
        if let (Some(rows), Some(cols)) = (&out.matrix.planted_rows, &out.matrix.planted_cols) {
            for &i in rows {
                for &j in cols {
                    block += llr[i * d + j];
                }
            }
        }
        println!("planted={planted}: total LLR {total:.4}, LLR on planted block {block:.4}");
    }
    Ok(())
}
