//! Experiment driver behind the `subred` binary: verification suites,
//! exponent tables, reduction runs and phase-diagram sweeps.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::clone::{make_channel, q_mid};
use crate::config::KeyValues;
use crate::detect::{ensemble_sampler, estimate_error, Detector, Ensemble, MaxTest, SumTest};
use crate::error::{invalid, Error, Result};
use crate::kernel::{
    delta_bound, exact_output_law, homogeneous_delta, largest_taus, mixed_output_law, tail_probs,
    tail_probs_monte_carlo, target_law, KernelSpec,
};
use crate::oracle::{
    brute, chi2_mixture_exact, chi2_vector_mixture_bound, chi2_vector_mixture_exact, diag_support_bounds,
    diag_support_law, tv_exact, FiniteLaw,
};
use crate::pairs::{
    chernoff_exponent, chernoff_exponent_numeric, kl_bernoulli, uc_membership, ComputablePair, ExponentQuery,
    Side, UcClass,
};
use crate::reduction::{to_submatrix, tv_guarantee, ReductionConfig, ReductionOutput, TvGuarantee};
use crate::rng::{derive_seed, stream_rng};
use crate::sampler::{sample_er, sample_pds, GraphSample};

/// Regions of the computational phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeLabel {
    /// Detection is information-theoretically impossible.
    #[serde(rename = "ImpossibleUC_C")]
    ImpossibleUcC,
    /// Statistically possible but as hard as planted clique.
    #[serde(rename = "HardUC_A")]
    HardUcA,
    /// Solved by a polynomial-time test.
    #[serde(rename = "PolyUC_B")]
    PolyUcB,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ImpossibleUcC => "ImpossibleUC_C",
            Self::HardUcA => "HardUC_A",
            Self::PolyUcB => "PolyUC_B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeAssessment {
    pub label: RegimeLabel,
    /// The symmetric KL lies within the slack factor of a region boundary.
    pub boundary: bool,
    /// The pair passed the UC-A, UC-B and UC-C checks.
    pub in_universality_classes: bool,
    pub slack: f64,
}

/// Default slack standing in for `<<` at finite `n`: `log^3 n`.
pub fn default_slack(n: usize) -> f64 {
    (n as f64).ln().powi(3)
}

/// Places `d = skl` against `a = min(1/k, n^2/k^4)` and
/// `b = min(n^2/k^4, 1)`: impossible when `d s <= a`, polynomial when
/// `d >= b s`, hard when `a s <= d` and `d s <= b`, where `s` is the
/// slack. Anything else is a boundary cell labelled with the nearer side.
pub fn regime_classify(n: usize, k: usize, pair: &ComputablePair, slack: Option<f64>) -> RegimeAssessment {
    let s = slack.unwrap_or_else(|| default_slack(n)).max(1.0);
    let (nf, kf) = (n as f64, k as f64);
    let ratio = nf * nf / kf.powi(4);
    let a = (1.0 / kf).min(ratio);
    let b = ratio.min(1.0);
    let d = pair.skl();
    let (label, boundary) = if d * s <= a {
        (RegimeLabel::ImpossibleUcC, false)
    } else if d >= b * s {
        (RegimeLabel::PolyUcB, false)
    } else if a * s <= d && d * s <= b {
        (RegimeLabel::HardUcA, false)
    } else {
        let near_a = (d / a).ln().abs();
        let near_b = (d / b).ln().abs();
        let label = if near_a <= near_b {
            if d < a { RegimeLabel::ImpossibleUcC } else { RegimeLabel::HardUcA }
        } else if d < b {
            RegimeLabel::HardUcA
        } else {
            RegimeLabel::PolyUcB
        };
        (label, true)
    };
    let in_uc = [UcClass::A, UcClass::B, UcClass::C]
        .iter()
        .all(|&c| uc_membership(pair, c, n.max(2), 0.5).map(|r| r.satisfied).unwrap_or(false));
    RegimeAssessment { label, boundary, in_universality_classes: in_uc, slack: s }
}

/// Pair families of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    /// Gaussian biclustering `N(mu, 1)` vs `N(0, 1)`.
    Bc,
    /// Sparse planted dense subgraph `Bern(c q)` vs `Bern(q)`.
    Sp { c: f64 },
    /// General planted dense subgraph `Bern(q + c n^-gamma)` vs `Bern(q)`.
    Gp { gamma: f64, c: f64 },
}

impl SweepFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Bc => "D_bc",
            Self::Sp { .. } => "D_sp",
            Self::Gp { .. } => "D_gp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: SweepFamily,
    /// Symmetric KL exponents: each cell uses `skl = n^-alpha`.
    pub alphas: Vec<f64>,
    /// Planted size exponents: each cell uses `k = ceil(n^beta)`.
    pub betas: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub slack: Option<f64>,
    pub ensemble: Ensemble,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0)) {
            return Err(invalid(format!("alpha={a} must be positive")));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(invalid(format!("beta={b} must lie in (0, 1)")));
        }
        if self.n < 2 || self.trials == 0 {
            return Err(invalid("sweep needs n >= 2 and at least one trial"));
        }
        match self.family {
            SweepFamily::Sp { c } if !(c > 1.0) => Err(invalid(format!("D_sp constant c={c} must exceed 1"))),
            SweepFamily::Gp { gamma, c } if !(gamma > 0.0 && c > 0.0) => {
                Err(invalid(format!("D_gp needs gamma > 0 and c > 0, got gamma={gamma} c={c}")))
            }
            _ => Ok(()),
        }
    }
}

fn bernoulli_skl(p: f64, q: f64) -> f64 {
    kl_bernoulli(p, q) + kl_bernoulli(q, p)
}

/// Bisection for the root of an increasing function on `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pair of `family` at size `n` with symmetric KL `skl`.
pub fn family_pair(family: SweepFamily, n: usize, skl: f64) -> Result<ComputablePair> {
    match family {
        SweepFamily::Bc => ComputablePair::gaussian_with_skl(skl),
        SweepFamily::Sp { c } => {
            let hi = 1.0 / c;
            if bernoulli_skl(c * hi * (1.0 - 1e-12), hi * (1.0 - 1e-12)) < skl {
                return Err(Error::Infeasible(format!("D_sp with c={c} cannot reach skl={skl}")));
            }
            let q = bisect(0.0, hi * (1.0 - 1e-12), |q| bernoulli_skl(c * q, q) - skl);
            ComputablePair::bernoulli(c * q, q)
        }
        SweepFamily::Gp { gamma, c } => {
            let gap = c * (n as f64).powf(-gamma);
            if gap >= 1.0 {
                return Err(Error::Infeasible(format!("D_gp gap {gap} is not below one")));
            }
            // skl(q) decreases on the sparse branch q <= (1 - gap) / 2.
            let hi = 0.5 * (1.0 - gap);
            let skl_at = |q: f64| bernoulli_skl(q + gap, q);
            if skl_at(hi) > skl {
                return Err(Error::Infeasible(format!("D_gp gap {gap} forces skl above {skl}")));
            }
            let q = bisect(1e-300, hi, |q| skl - skl_at(q));
            if !(gap < q) {
                return Err(Error::Infeasible(format!(
                    "D_gp needs gamma above the null exponent: gap {gap} >= q {q}"
                )));
            }
            ComputablePair::bernoulli(q + gap, q)
        }
    }
}

/// Union-bound type-I level used to calibrate the sweep's max test.
pub const MAX_TEST_LEVEL: f64 = 0.1;

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub detector: String,
    pub n: usize,
    pub k: usize,
    pub family: String,
    pub param: String,
    pub skl: f64,
    pub trials: usize,
    pub type1: f64,
    pub type2: f64,
    pub total: f64,
    pub stderr: f64,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub regime: String,
    pub boundary_flag: bool,
    pub slack: f64,
    pub status: String,
}

/// Runs every cell of the sweep; rows are ordered by alpha index, beta
/// index, then detector.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = (0..spec.alphas.len())
        .flat_map(|i| (0..spec.betas.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|&(i, j)| sweep_cell(spec, i, j))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn sweep_cell(spec: &SweepSpec, ai: usize, bi: usize) -> Result<Vec<SweepRow>> {
    let (alpha, beta, n) = (spec.alphas[ai], spec.betas[bi], spec.n);
    let nf = n as f64;
    let k = (nf.powf(beta).ceil() as usize).clamp(1, n);
    let skl = nf.powf(-alpha);
    let seed = derive_seed(spec.seed, &[ai as u64, bi as u64]);
    let slack = spec.slack.unwrap_or_else(|| default_slack(n));
    let blank = |detector: &str, status: String| SweepRow {
        detector: detector.to_string(),
        n,
        k,
        family: spec.family.name().to_string(),
        param: String::new(),
        skl,
        trials: spec.trials,
        type1: f64::NAN,
        type2: f64::NAN,
        total: f64::NAN,
        stderr: f64::NAN,
        seed,
        alpha,
        beta,
        regime: String::new(),
        boundary_flag: false,
        slack,
        status,
    };
    let pair = match family_pair(spec.family, n, skl) {
        Ok(pair) => pair,
        Err(e @ (Error::Infeasible(_) | Error::InvalidParameter(_))) => {
            let status = format!("infeasible: {e}");
            return Ok(vec![blank("sum", status.clone()), blank("max", status)]);
        }
        Err(e) => return Err(e),
    };
    let regime = regime_classify(n, k, &pair, Some(slack));
    let null = ensemble_sampler(spec.ensemble, n, None, pair)?;
    let planted = ensemble_sampler(spec.ensemble, n, Some(k), pair)?;
    let detectors: Vec<Box<dyn Detector>> = vec![Box::new(SumTest::new(pair, n, k)?), Box::new(MaxTest::union_bound(pair, n * n, MAX_TEST_LEVEL)?)];
    detectors
        .iter()
        .map(|det| {
            let r = estimate_error(det.as_ref(), &null, &planted, spec.trials, seed)?;
            Ok(SweepRow {
                detector: r.detector,
                n,
                k,
                family: spec.family.name().to_string(),
                param: pair.param_string(),
                skl: pair.skl(),
                trials: r.trials,
                type1: r.type1,
                type2: r.type2,
                total: r.total,
                stderr: r.stderr,
                seed,
                alpha,
                beta,
                regime: regime.label.to_string(),
                boundary_flag: regime.boundary,
                slack,
                status: if regime.in_universality_classes { "ok".into() } else { "ok: outside UC classes".into() },
            })
        })
        .collect()
}

const SWEEP_HEADER: [&str; 18] = [
    "detector", "n", "k", "family", "param", "skl", "trials", "type1", "type2", "total", "stderr", "seed", "alpha",
    "beta", "regime", "boundary_flag", "slack", "status",
];

/// Writes the sweep as CSV; an empty grid produces the header alone.
pub fn cmd_sweep<W: Write>(spec: &SweepSpec, out: W) -> Result<()> {
    let rows = run_sweep(spec)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Exponent table over `points` evenly spaced thresholds spanning
/// `[-2 KL(Q||P), 2 KL(P||Q)]`.
pub fn cmd_exponents(pair: &ComputablePair, points: usize) -> Result<String> {
    if points < 2 {
        return Err(invalid("need at least two table points"));
    }
    let (lo, hi) = (-2.0 * pair.kl_qp(), 2.0 * pair.kl_pq());
    if !lo.is_finite() {
        return Err(invalid("exponent table needs finite KL(Q||P)"));
    }
    let mut s = String::new();
    writeln!(s, "# {pair}").ok();
    writeln!(s, "# kl_pq={} kl_qp={} skl={} chi2={}", pair.kl_pq(), pair.kl_qp(), pair.skl(), pair.chi2()).ok();
    writeln!(s, "tau,E_P,E_Q").ok();
    for i in 0..points {
        let tau = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let ep = chernoff_exponent(pair, ExponentQuery { side: Side::UnderP, tau });
        let eq = chernoff_exponent(pair, ExponentQuery { side: Side::UnderQ, tau });
        writeln!(s, "{tau},{ep},{eq}").ok();
    }
    Ok(s)
}

/// Where `cmd_reduce` gets its input graph.
#[derive(Debug, Clone, PartialEq)]
pub enum ReduceInput {
    Graph(GraphSample),
    /// Sample `G(n, graph_q)` or, when planted, `G(n, k, graph_p, graph_q)`.
    Sample { planted: bool },
}

/// Parses the config, runs the reduction and renders the sidecar report.
pub fn cmd_reduce(config: &str, input: ReduceInput, seed: u64) -> Result<(ReductionOutput, TvGuarantee, String)> {
    let kv = KeyValues::parse(config)?;
    let cfg = ReductionConfig::from_key_values(&kv)?;
    let p = cfg.params().clone();
    let mut rng = stream_rng(seed, &[0x7265_6475]);
    let graph = match input {
        ReduceInput::Graph(g) => g,
        ReduceInput::Sample { planted: false } => sample_er(p.n, p.q, &mut rng)?,
        ReduceInput::Sample { planted: true } => sample_pds(p.n, p.k, p.p, p.q, &mut rng)?,
    };
    let out = to_submatrix(&graph, &cfg, &mut rng)?;
    let g = tv_guarantee(&cfg)?;
    let mut report = String::new();
    for (k, v) in [
        ("n", p.n.to_string()),
        ("k", p.k.to_string()),
        ("N", p.big_n.to_string()),
        ("ell", p.ell.to_string()),
        ("iterations", p.iterations.to_string()),
        ("graph_p", p.p.to_string()),
        ("graph_q", p.q.to_string()),
        ("q_mid", cfg.q_mid().to_string()),
        ("epsilon", cfg.epsilon().to_string()),
        ("pair", cfg.grid().get(0, 0).to_string().replace(' ', ";")),
        ("output_dim", cfg.output_dim().to_string()),
        ("seed", seed.to_string()),
        ("delta", g.delta.to_string()),
        ("embed_null", g.embed_null.to_string()),
        ("embed_planted", g.embed_planted.to_string()),
        ("bound_null", g.bound_null.to_string()),
        ("bound_planted", g.bound_planted.to_string()),
        ("planted_hypotheses_hold", g.planted_hypotheses_hold.to_string()),
    ] {
        writeln!(report, "{k}={v}").ok();
    }
    Ok((out, g, report))
}

/// Verification suites run by `subred verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernel,
    Clone,
    Diagonal,
    Exponents,
    ItBound,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "clone" => Ok(Self::Clone),
            "diagonal" => Ok(Self::Diagonal),
            "exponents" => Ok(Self::Exponents),
            "it-bound" => Ok(Self::ItBound),
            other => Err(invalid(format!(
                "unknown suite `{other}`; expected kernel, clone, diagonal, exponents or it-bound"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).ok();
        }
        s
    }
}

pub fn cmd_verify(suite: Suite) -> Result<VerifyReport> {
    let mut r = VerifyReport::default();
    match suite {
        Suite::Kernel => verify_kernel(&mut r)?,
        Suite::Clone => verify_clone(&mut r)?,
        Suite::Diagonal => verify_diagonal(&mut r)?,
        Suite::Exponents => verify_exponents(&mut r)?,
        Suite::ItBound => verify_it_bound(&mut r)?,
    }
    Ok(r)
}

fn verify_kernel(r: &mut VerifyReport) -> Result<()> {
    for (p, q) in [(1.0, 0.25), (0.8, 0.3), (0.6, 0.1)] {
        for ell in [1usize, 2, 3] {
            let targets = vec![ComputablePair::bernoulli(0.6, 0.3)?; ell];
            let probe = KernelSpec::new(p, q, targets.clone(), 1)?;
            let tails = tail_probs(&probe);
            let n_it = delta_bound(&probe, &tails).recommended_iterations;
            let spec = KernelSpec::new(p, q, targets, n_it)?;
            let delta = delta_bound(&spec, &tails).delta;
            let worst = [true, false]
                .iter()
                .map(|&h| Ok(tv_exact(&mixed_output_law(&spec, h)?, &target_law(&spec, h)?)))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            r.push(
                format!("mixed output within delta p={p} q={q} ell={ell}"),
                worst <= delta + 1e-12,
                format!("tv={worst:.3e} delta={delta:.3e} N={n_it}"),
            );
        }
    }
    let id = KernelSpec::new(0.6, 0.3, vec![ComputablePair::bernoulli(0.6, 0.3)?], 200)?;
    let one = exact_output_law(&id, true)?.prob(&1);
    r.push("identity kernel maps 1 to 1", one > 1.0 - 1e-12, format!("P[1]={one}"));
    let g = ComputablePair::gaussian(0.2)?;
    let spec = KernelSpec::homogeneous(g, 4, 0.9, 0.1, 10)?;
    let exact = tail_probs(&spec);
    let mc = tail_probs_monte_carlo(&spec, 200_000, 1);
    let ok = (exact.tail_p - mc.tail_p).abs() <= 4.0 * mc.stderr_p.max(1e-6)
        && (exact.tail_q - mc.tail_q).abs() <= 4.0 * mc.stderr_q.max(1e-6);
    r.push("gaussian tails exact vs monte carlo", ok, format!("exact=({:.3e},{:.3e})", exact.tail_p, exact.tail_q));
    let (ep, eq) = largest_taus(&g, 4, 0.9, 0.1);
    let tau = ep.min(eq);
    let d = homogeneous_delta(&g, 4, 0.9, 0.1, tau, tau)?;
    let expect = 6.0 * (-4.0 * tau).exp() / 0.8;
    r.push("homogeneous delta at equal taus", (d.delta - expect).abs() < 1e-15, format!("delta={:.3e}", d.delta));
    Ok(())
}

fn verify_clone(r: &mut VerifyReport) -> Result<()> {
    for (p, q) in [(1.0, 0.25), (0.7, 0.2), (0.5, 0.1)] {
        let qm = q_mid(p, q);
        let c = make_channel(2, p, q, p, qm)?;
        let res = c.mixing_residual();
        r.push(format!("t=2 mixing identities p={p} q={q}"), res <= 1e-12, format!("residual={res:.2e}"));
        for (input, target) in [(p, p), (q, qm)] {
            let law = c.output_law(input)?;
            let want = FiniteLaw::new(
                (0..4u32)
                    .map(|m| {
                        let w = m.count_ones() as i32;
                        (m, target.powi(w) * (1.0 - target).powi(2 - w))
                    })
                    .collect(),
            )?;
            let tv = tv_exact(&law, &want);
            r.push(
                format!("t=2 output law p={p} q={q} input={input}"),
                tv <= 1e-12,
                format!("tv={tv:.2e}"),
            );
        }
    }
    r.push(
        "infeasible target rejected",
        make_channel(2, 0.6, 0.3, 0.9, 0.1).is_err(),
        "(P/Q)^2 > p/q",
    );
    Ok(())
}

fn verify_diagonal(r: &mut VerifyReport) -> Result<()> {
    for (n, k, big_n, p, q) in [(8, 2, 40, 1.0, 0.5), (10, 2, 60, 0.8, 0.6), (12, 3, 64, 0.9, 0.7)] {
        let eps = big_n as f64 / n as f64 - p / q;
        let laws = diag_support_law(n, k, big_n, p, q)?;
        let (null_bound, planted_bound) = diag_support_bounds(n, k, big_n, p, q, eps)?;
        let (tn, tp) = (laws.tv_null(), laws.tv_planted());
        r.push(
            format!("diagonal null n={n} N={big_n}"),
            tn <= null_bound,
            format!("tv={tn:.3e} bound={null_bound:.3e}"),
        );
        r.push(
            format!("diagonal planted n={n} k={k} N={big_n}"),
            tp <= planted_bound,
            format!("tv={tp:.3e} bound={planted_bound:.3e}"),
        );
    }
    Ok(())
}

fn verify_exponents(r: &mut VerifyReport) -> Result<()> {
    let pairs = [
        ComputablePair::gaussian(0.5)?,
        ComputablePair::gaussian(1.5)?,
        ComputablePair::bernoulli(0.6, 0.3)?,
        ComputablePair::bernoulli(0.02, 0.01)?,
    ];
    for pair in pairs {
        let (lo, hi) = pair.llr_range();
        let (lo, hi) = (lo.max(-2.0 * pair.kl_qp() - 1.0), hi.min(2.0 * pair.kl_pq() + 1.0));
        let mut worst_closed: f64 = 0.0;
        let mut worst_shift: f64 = 0.0;
        for i in 0..=20 {
            let tau = lo + (hi - lo) * i as f64 / 20.0;
            for side in [Side::UnderP, Side::UnderQ] {
                let q = ExponentQuery { side, tau };
                let (a, b) = (chernoff_exponent(&pair, q), chernoff_exponent_numeric(&pair, q));
                if a.is_finite() {
                    worst_closed = worst_closed.max((a - b).abs() / a.max(1.0));
                }
            }
            let ep = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderP, tau });
            let eq = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderQ, tau });
            if ep.is_finite() {
                worst_shift = worst_shift.max((eq - ep - tau).abs());
            }
        }
        r.push(format!("closed vs numeric exponent {pair}"), worst_closed <= 1e-6, format!("max rel err {worst_closed:.2e}"));
        r.push(format!("E_Q(tau) = E_P(tau) + tau for {pair}"), worst_shift <= 1e-8, format!("max err {worst_shift:.2e}"));
        let zp = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderP, tau: pair.kl_pq() });
        let zq = chernoff_exponent(&pair, ExponentQuery { side: Side::UnderQ, tau: -pair.kl_qp() });
        r.push(format!("exponents vanish at the means for {pair}"), zp.abs() < 1e-12 && zq.abs() < 1e-12, format!("{zp:.1e} {zq:.1e}"));
    }
    Ok(())
}

fn verify_it_bound(r: &mut VerifyReport) -> Result<()> {
    for (n, k, p, q) in [(3, 1, 0.7, 0.4), (3, 2, 0.6, 0.3), (2, 1, 0.9, 0.2)] {
        let chi2 = ComputablePair::bernoulli(p, q)?.chi2();
        let exact = chi2_mixture_exact(n, k, chi2)?;
        let brute = brute::chi2_matrix_mixture(n, k, p, q)?;
        r.push(
            format!("matrix mixture chi2 n={n} k={k}"),
            (exact - brute).abs() <= 1e-9 * brute.abs().max(1e-300),
            format!("exact={exact:.12e} brute={brute:.12e}"),
        );
    }
    for (m, k, p, q) in [(10, 2, 0.5, 0.45), (12, 3, 0.42, 0.4)] {
        let chi2 = ComputablePair::bernoulli(p, q)?.chi2();
        let exact = chi2_vector_mixture_exact(m, k, chi2)?;
        let brute = brute::chi2_vector_mixture(m, k, p, q)?;
        let bound = chi2_vector_mixture_bound(m, k, chi2)?;
        r.push(
            format!("vector mixture chi2 m={m} k={k}"),
            (exact - brute).abs() <= 1e-9 * brute.abs() && exact <= bound,
            format!("exact={exact:.6e} brute={brute:.6e} bound={bound:.6e}"),
        );
    }
    Ok(())
}
