//! Splits one planted-clique graph into two independent copies whose
//! edges are `Bern(P)` inside the clique and `Bern(Q)` elsewhere.

use subred::clone::{clone_graph, make_channel, q_mid};
use subred::rng::stream_rng;
use subred::sampler::sample_pds;

fn main() -> subred::Result<()> {
    let (n, k, p, q) = (300, 40, 1.0, 0.5);
    let qm = q_mid(p, q);
    let ch = make_channel(2, p, q, p, qm)?;
    println!("t=2 channel p={p} q={q} -> P={p} Q={qm:.6}; mixing residual {:.1e}", ch.mixing_residual());
    for w in 0..=2 {
        println!("  weight {w}: r0={:.6} r1={:.6}", ch.r0(w), ch.r1(w));
    }
    let mut rng = stream_rng(11, &[]);
    let g = sample_pds(n, k, p, q, &mut rng)?;
    let clique = g.planted.clone().unwrap_or_default();
    for (c, copy) in clone_graph(&g, &ch, &mut rng).iter().enumerate() {
        let mut inside = (0usize, 0usize);
        for (a, &i) in clique.iter().enumerate() {
            for &j in &clique[a + 1..] {
                inside.0 += usize::from(copy.has_edge(i, j));
                inside.1 += 1;
            }
        }
        let total_pairs = n * (n - 1) / 2;
        let outside = (copy.edge_count() - inside.0) as f64 / (total_pairs - inside.1) as f64;
        println!("copy {c}: clique density {:.4}, background density {outside:.4}", inside.0 as f64 / inside.1 as f64);
    }
    Ok(())
}
