//! The reduction from a planted dense subgraph instance on `n` vertices
//! to a planted submatrix instance of dimension `N ell`: clone the graph
//! twice, plant both clones around a random diagonal of an `N x N` bit
//! matrix, then lift every bit to an `ell x ell` block of target samples
//! with a rejection kernel.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::clone::{clone_graph, make_channel, q_mid, CloneChannel};
use crate::config::KeyValues;
use crate::error::{hypothesis, invalid, Error, Result};
use crate::kernel::{delta_bound, mrk_map_into, tail_probs, KernelSpec};
use crate::oracle::diag_support_bounds;
use crate::pairs::{ComputablePair, PairGrid, Space};
use crate::rng::{stream_rng, uniform_permutation, uniform_subset, uniform_subset_of};
use crate::sampler::{Entries, GraphSample, MatrixSample};

/// Unvalidated reduction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionParams {
    pub n: usize,
    pub k: usize,
    pub big_n: usize,
    pub ell: usize,
    pub iterations: u64,
    pub p: f64,
    pub q: f64,
    /// Defaults to the largest admissible value `N/n - p/Q`.
    pub epsilon: Option<f64>,
    /// When false only the null-side hypotheses are enforced and the
    /// planted-side guarantee may be vacuous.
    pub strict: bool,
}

/// Validated reduction configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    params: ReductionParams,
    epsilon: f64,
    q_mid: f64,
    grid: PairGrid,
    planted_hypotheses_hold: bool,
}

const RELATIVE_SLACK: f64 = 1e-12;

impl ReductionConfig {
    pub fn new(params: ReductionParams, grid: PairGrid) -> Result<Self> {
        let ReductionParams { n, k, big_n, ell, p, q, .. } = params;
        if !(q > 0.0 && q < p && p <= 1.0) {
            return Err(invalid(format!("graph densities need 0 < q < p <= 1, got p={p} q={q}")));
        }
        if !(1 <= k && k <= n && n <= big_n) {
            return Err(invalid(format!("need 1 <= k <= n <= N, got k={k} n={n} N={big_n}")));
        }
        if ell == 0 {
            return Err(invalid("ell must be positive"));
        }
        if grid.d() != big_n * ell {
            return Err(invalid(format!("grid dimension {} must equal N ell = {}", grid.d(), big_n * ell)));
        }
        let qm = q_mid(p, q);
        let (nf, kf, bf) = (n as f64, k as f64, big_n as f64);
        let epsilon = params.epsilon.unwrap_or(bf / nf - p / qm);
        if !(epsilon > 0.0) {
            return Err(hypothesis(format!(
                "N >= (p/Q + eps) n needs eps > 0; with N={big_n}, n={n}, p/Q={} the largest eps is {}",
                p / qm,
                bf / nf - p / qm
            )));
        }
        if bf < (p / qm + epsilon) * nf * (1.0 - RELATIVE_SLACK) {
            return Err(hypothesis(format!(
                "N >= (p/Q + eps) n fails: N={big_n} < {}",
                (p / qm + epsilon) * nf
            )));
        }
        let k_cap = qm * epsilon * nf / 2.0;
        let ratio_cap = (qm / (1.0 - qm)).min((1.0 - qm) / qm);
        let k_ok = kf <= k_cap * (1.0 + RELATIVE_SLACK);
        let ratio_ok = kf * kf / bf <= ratio_cap * (1.0 + RELATIVE_SLACK);
        if params.strict && !k_ok {
            return Err(hypothesis(format!("k <= Q eps n / 2 fails: k={k} > {k_cap}")));
        }
        if params.strict && !ratio_ok {
            return Err(hypothesis(format!(
                "k^2/N <= min{{Q/(1-Q), (1-Q)/Q}} fails: {} > {ratio_cap}",
                kf * kf / bf
            )));
        }
        make_channel(2, p, q, p, qm)?;
        Ok(Self { params, epsilon, q_mid: qm, grid, planted_hypotheses_hold: k_ok && ratio_ok })
    }

    /// Homogeneous grid with the iteration count chosen as the kernel's
    /// recommended value when `params.iterations == 0`.
    pub fn homogeneous(mut params: ReductionParams, pair: ComputablePair) -> Result<Self> {
        let grid = PairGrid::homogeneous(params.big_n * params.ell, pair)?;
        if params.iterations == 0 {
            let qm = q_mid(params.p, params.q);
            if !(params.q > 0.0 && params.q < params.p && params.p <= 1.0) {
                return Err(invalid(format!("graph densities need 0 < q < p <= 1, got p={} q={}", params.p, params.q)));
            }
            let spec = KernelSpec::homogeneous(pair, params.ell * params.ell, params.p, qm, 1)?;
            params.iterations = delta_bound(&spec, &tail_probs(&spec)).recommended_iterations;
        }
        Self::new(params, grid)
    }

    /// Keys: `n k N ell graph_p graph_q` and optionally `iterations`,
    /// `epsilon`, `strict`, plus a pair description (`family=...`).
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let params = ReductionParams {
            n: kv.require("n")?,
            k: kv.require("k")?,
            big_n: kv.require("N")?,
            ell: kv.require("ell")?,
            iterations: kv.get("iterations")?.unwrap_or(0),
            p: kv.require("graph_p")?,
            q: kv.require("graph_q")?,
            epsilon: kv.get("epsilon")?,
            strict: kv.get("strict")?.unwrap_or(true),
        };
        Self::homogeneous(params, ComputablePair::from_key_values(kv)?)
    }

    pub fn params(&self) -> &ReductionParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Edge density `Q` of the cloned graphs.
    pub fn q_mid(&self) -> f64 {
        self.q_mid
    }

    pub fn grid(&self) -> &PairGrid {
        &self.grid
    }

    pub fn output_dim(&self) -> usize {
        self.params.big_n * self.params.ell
    }

    pub fn planted_hypotheses_hold(&self) -> bool {
        self.planted_hypotheses_hold
    }

    pub fn channel(&self) -> CloneChannel {
        make_channel(2, self.params.p, self.params.q, self.params.p, self.q_mid).expect("validated at construction")
    }

    fn block_spec(&self, rows: &[usize], cols: &[usize]) -> Result<KernelSpec> {
        let targets = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| *self.grid.get(i, j)))
            .collect();
        KernelSpec::new(self.params.p, self.q_mid, targets, self.params.iterations)
    }
}

/// Total variation guarantees for one run. Values above one are vacuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvGuarantee {
    /// Largest kernel error over the blocks.
    pub delta: f64,
    /// Diagonal-planting error under the null.
    pub embed_null: f64,
    /// Diagonal-planting error under the planted hypothesis.
    pub embed_planted: f64,
    /// `N^2 delta + embed_null`.
    pub bound_null: f64,
    /// `N^2 delta + embed_planted`; meaningful only when the planted
    /// hypotheses hold.
    pub bound_planted: f64,
    pub planted_hypotheses_hold: bool,
}

fn guarantee_from_delta(cfg: &ReductionConfig, delta: f64) -> Result<TvGuarantee> {
    let p = &cfg.params;
    let (embed_null, embed_planted) = diag_support_bounds(p.n, p.k, p.big_n, p.p, cfg.q_mid, cfg.epsilon)?;
    let blocks = (p.big_n * p.big_n) as f64;
    Ok(TvGuarantee {
        delta,
        embed_null,
        embed_planted,
        bound_null: blocks * delta + embed_null,
        bound_planted: blocks * delta + embed_planted,
        planted_hypotheses_hold: cfg.planted_hypotheses_hold,
    })
}

/// Guarantee for a homogeneous grid; heteroskedastic grids depend on the
/// block placement, see [`tv_guarantee_for_placement`].
pub fn tv_guarantee(cfg: &ReductionConfig) -> Result<TvGuarantee> {
    if !cfg.grid.is_homogeneous() {
        return Err(invalid("heteroskedastic guarantees depend on the block placement"));
    }
    let ell = cfg.params.ell;
    let idx: Vec<usize> = (0..ell).collect();
    let spec = cfg.block_spec(&idx, &idx)?;
    guarantee_from_delta(cfg, delta_bound(&spec, &tail_probs(&spec)).delta)
}

/// Guarantee with `delta` the maximum kernel error over the blocks that
/// the permutation `tau` realises.
pub fn tv_guarantee_for_placement(cfg: &ReductionConfig, tau: &[usize]) -> Result<TvGuarantee> {
    if cfg.grid.is_homogeneous() {
        return tv_guarantee(cfg);
    }
    let (big_n, ell) = (cfg.params.big_n, cfg.params.ell);
    if tau.len() != big_n * ell {
        return Err(invalid(format!("placement has length {}, expected {}", tau.len(), big_n * ell)));
    }
    let mut delta: f64 = 0.0;
    for s in 0..big_n {
        for t in 0..big_n {
            let spec = cfg.block_spec(&tau[s * ell..(s + 1) * ell], &tau[t * ell..(t + 1) * ell])?;
            delta = delta.max(delta_bound(&spec, &tail_probs(&spec)).delta);
        }
    }
    guarantee_from_delta(cfg, delta)
}

/// Plants two clones of an `n`-vertex graph into an `N x N` bit matrix:
/// a uniform `n`-set `S` with a uniform bijection `pi: S -> [n]` carries
/// the first clone above the diagonal and the second below it, the
/// diagonal of `S` holds `Bin(n, p)` ones, the diagonal outside `S`
/// tops the total up towards `Bin(N, Q)`, and every other entry is
/// `Bern(Q)`.
pub fn embed_diagonal<R: Rng + ?Sized>(
    g1: &GraphSample,
    g2: &GraphSample,
    cfg: &ReductionConfig,
    rng: &mut R,
) -> Result<MatrixSample> {
    let ReductionParams { n, big_n, p, .. } = cfg.params;
    let qm = cfg.q_mid;
    if g1.n() != n || g2.n() != n {
        return Err(invalid(format!("clones have {} and {} vertices, expected {n}", g1.n(), g2.n())));
    }
    let s1 = Binomial::new(n as u64, p).map_err(|e| invalid(e.to_string()))?.sample(rng) as usize;
    let s2 = Binomial::new(big_n as u64, qm).map_err(|e| invalid(e.to_string()))?.sample(rng) as usize;
    let s = uniform_subset(big_n, n, rng);
    let mut in_s = vec![false; big_n];
    for &i in &s {
        in_s[i] = true;
    }
    let outside: Vec<usize> = (0..big_n).filter(|&i| !in_s[i]).collect();
    let t1 = uniform_subset_of(&s, s1, rng);
    let t2 = uniform_subset_of(&outside, s2.saturating_sub(s1).min(outside.len()), rng);
    let perm = uniform_permutation(n, rng);
    let mut pi = vec![usize::MAX; big_n];
    for (idx, &i) in s.iter().enumerate() {
        pi[i] = perm[idx];
    }
    let mut diag = vec![false; big_n];
    for &i in t1.iter().chain(&t2) {
        diag[i] = true;
    }
    let mut bits = Vec::with_capacity(big_n * big_n);
    for i in 0..big_n {
        for j in 0..big_n {
            let b = if i == j {
                diag[i]
            } else if in_s[i] && in_s[j] {
                if i < j {
                    g1.has_edge(pi[i], pi[j])
                } else {
                    g2.has_edge(pi[i], pi[j])
                }
            } else {
                rng.random::<f64>() < qm
            };
            bits.push(b);
        }
    }
    let mut m = MatrixSample::from_entries(big_n, Entries::Bits(bits))?;
    if let Some(planted) = &g1.planted {
        let mut image = vec![false; n];
        for &v in planted {
            image[v] = true;
        }
        let rows: Vec<usize> = s.iter().copied().filter(|&i| image[pi[i]]).collect();
        m = m.with_planted(rows.clone(), rows);
    }
    Ok(m)
}

/// Lifts every bit of `m1` to an `ell x ell` block. Returns the output
/// matrix and the permutation `tau`: block `(s, t)` occupies rows
/// `tau[s ell .. (s+1) ell]` and the matching columns.
pub fn lift_blocks<R: Rng + ?Sized>(
    m1: &MatrixSample,
    cfg: &ReductionConfig,
    rng: &mut R,
) -> Result<(MatrixSample, Vec<usize>)> {
    let (big_n, ell) = (cfg.params.big_n, cfg.params.ell);
    if m1.d() != big_n || m1.space() != Space::Bit {
        return Err(invalid(format!("lifting needs an {big_n} x {big_n} bit matrix")));
    }
    let d = big_n * ell;
    let tau = uniform_permutation(d, rng);
    let block_seed: u64 = rng.random();
    let shared = if cfg.grid.is_homogeneous() {
        let idx: Vec<usize> = (0..ell).collect();
        Some(cfg.block_spec(&idx, &idx)?)
    } else {
        None
    };
    let rows: Vec<Result<Vec<f64>>> = (0..big_n)
        .into_par_iter()
        .map(|s| {
            let mut row = vec![0.0; big_n * ell * ell];
            let r_idx = &tau[s * ell..(s + 1) * ell];
            for t in 0..big_n {
                let c_idx = &tau[t * ell..(t + 1) * ell];
                let local;
                let spec = match &shared {
                    Some(spec) => spec,
                    None => {
                        local = cfg.block_spec(r_idx, c_idx)?;
                        &local
                    }
                };
                let mut block_rng = stream_rng(block_seed, &[s as u64, t as u64]);
                let out = &mut row[t * ell * ell..(t + 1) * ell * ell];
                mrk_map_into(spec, m1.value(s, t) == 1.0, &mut block_rng, out);
            }
            Ok(row)
        })
        .collect();
    let mut values = vec![0.0; d * d];
    for (s, row) in rows.into_iter().enumerate() {
        let row = row?;
        for t in 0..big_n {
            for a in 0..ell {
                for b in 0..ell {
                    let (i, j) = (tau[s * ell + a], tau[t * ell + b]);
                    values[i * d + j] = row[t * ell * ell + a * ell + b];
                }
            }
        }
    }
    let mut out = MatrixSample::from_values(d, cfg.grid.space(), values)?;
    if let Some(planted) = &m1.planted_rows {
        let mut rows: Vec<usize> = planted
            .iter()
            .flat_map(|&s| tau[s * ell..(s + 1) * ell].iter().copied())
            .collect();
        rows.sort_unstable();
        out = out.with_planted(rows.clone(), rows);
    }
    Ok((out, tau))
}

/// Output of one reduction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutput {
    pub matrix: MatrixSample,
    /// Block placement used by the lifting step.
    pub tau: Vec<usize>,
}

/// Runs the full reduction on a graph with `cfg.n` vertices.
pub fn to_submatrix<R: Rng + ?Sized>(g: &GraphSample, cfg: &ReductionConfig, rng: &mut R) -> Result<ReductionOutput> {
    if g.n() != cfg.params.n {
        return Err(Error::InvalidParameter(format!("graph has {} vertices, config expects {}", g.n(), cfg.params.n)));
    }
    let clones = clone_graph(g, &cfg.channel(), rng);
    let m1 = embed_diagonal(&clones[0], &clones[1], cfg, rng)?;
    let (matrix, tau) = lift_blocks(&m1, cfg, rng)?;
    Ok(ReductionOutput { matrix, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_er, sample_pds};

    fn params(n: usize, k: usize, big_n: usize, ell: usize) -> ReductionParams {
        ReductionParams { n, k, big_n, ell, iterations: 0, p: 1.0, q: 0.25, epsilon: None, strict: true }
    }

    #[test]
    fn validation_names_the_failing_inequality() {
        let pair = ComputablePair::gaussian(0.05).unwrap();
        let err = ReductionConfig::homogeneous(params(10, 1, 10, 1), pair).unwrap_err();
        assert!(err.to_string().contains("N >= (p/Q + eps) n"), "{err}");
        let err = ReductionConfig::homogeneous(params(10, 9, 40, 1), pair).unwrap_err();
        assert!(err.to_string().contains("k"), "{err}");
        let mut relaxed = params(10, 9, 40, 1);
        relaxed.strict = false;
        let cfg = ReductionConfig::homogeneous(relaxed, pair).unwrap();
        assert!(!cfg.planted_hypotheses_hold());
    }

    #[test]
    fn epsilon_at_lower_edge_is_accepted() {
        let pair = ComputablePair::gaussian(0.05).unwrap();
        let mut p = params(10, 1, 30, 1);
        p.epsilon = Some(1.0);
        let cfg = ReductionConfig::homogeneous(p, pair).unwrap();
        assert!((cfg.q_mid() - 0.5).abs() < 1e-15);
        assert_eq!(cfg.epsilon(), 1.0);
    }

    #[test]
    fn null_reduction_shapes() {
        let pair = ComputablePair::gaussian(0.05).unwrap();
        let cfg = ReductionConfig::homogeneous(params(6, 1, 20, 2), pair).unwrap();
        let mut rng = stream_rng(21, &[]);
        let g = sample_er(6, 0.25, &mut rng).unwrap();
        let out = to_submatrix(&g, &cfg, &mut rng).unwrap();
        assert_eq!(out.matrix.d(), 40);
        assert!(out.matrix.planted_rows.is_none());
        let mut sorted = out.tau.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn planted_rows_have_size_k_ell() {
        let pair = ComputablePair::bernoulli(0.6, 0.4).unwrap();
        let mut p = params(12, 4, 40, 2);
        p.strict = false;
        let cfg = ReductionConfig::homogeneous(p, pair).unwrap();
        let mut rng = stream_rng(22, &[]);
        let g = sample_pds(12, 4, 1.0, 0.25, &mut rng).unwrap();
        let out = to_submatrix(&g, &cfg, &mut rng).unwrap();
        assert_eq!(out.matrix.planted_rows.as_ref().unwrap().len(), 8);
        assert_eq!(out.matrix.space(), Space::Bit);
    }

    #[test]
    fn same_seed_same_output() {
        let pair = ComputablePair::gaussian(0.05).unwrap();
        let cfg = ReductionConfig::homogeneous(params(6, 1, 20, 2), pair).unwrap();
        let run = || {
            let mut rng = stream_rng(23, &[]);
            let g = sample_er(6, 0.25, &mut rng).unwrap();
            to_submatrix(&g, &cfg, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn guarantee_components_add_up() {
        let pair = ComputablePair::gaussian(0.05).unwrap();
        let cfg = ReductionConfig::homogeneous(params(6, 1, 20, 2), pair).unwrap();
        let g = tv_guarantee(&cfg).unwrap();
        assert!((g.bound_null - (400.0 * g.delta + g.embed_null)).abs() < 1e-12);
        assert!(g.bound_planted >= g.bound_null);
    }
}
