//! Multivariate rejection kernels: map one Bernoulli input bit to a
//! vector of samples whose law is close to `prod P_i` when the input is
//! `Bern(p_src)`-distributed and close to `prod Q_i` when it is
//! `Bern(q_src)`-distributed.

use rand::Rng;

use crate::error::{hypothesis, invalid, Result};
use crate::oracle::FiniteLaw;
use crate::pairs::{chernoff_exponent, ComputablePair, ExponentQuery, Family, Side, Space};
use crate::rng::stream_rng;
use crate::stats::{binomial_pmf, normal_cdf, normal_sf};

/// Acceptance window for the summed log-likelihood ratio:
/// `c_minus = log((1 - p)/(1 - q))`, `c_plus = log(p / q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub c_minus: f64,
    pub c_plus: f64,
}

impl Window {
    pub fn new(p_src: f64, q_src: f64) -> Self {
        Self { c_minus: (-p_src).ln_1p() - (-q_src).ln_1p(), c_plus: (p_src / q_src).ln() }
    }

    #[inline]
    pub fn contains(&self, l: f64) -> bool {
        self.c_minus <= l && l <= self.c_plus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    p_src: f64,
    q_src: f64,
    targets: Vec<ComputablePair>,
    iterations: u64,
    window: Window,
    /// `q(1 - p) / (p(1 - q))`.
    floor: f64,
}

impl KernelSpec {
    pub fn new(p_src: f64, q_src: f64, targets: Vec<ComputablePair>, iterations: u64) -> Result<Self> {
        if !(q_src > 0.0 && q_src < p_src && p_src <= 1.0) {
            return Err(invalid(format!("kernel source needs 0 < q < p <= 1, got p={p_src} q={q_src}")));
        }
        let Some(first) = targets.first() else {
            return Err(invalid("kernel needs at least one target pair"));
        };
        let kind = std::mem::discriminant(&first.family());
        if targets.iter().any(|t| std::mem::discriminant(&t.family()) != kind) {
            return Err(invalid("kernel targets must belong to one family"));
        }
        Ok(Self {
            p_src,
            q_src,
            targets,
            iterations,
            window: Window::new(p_src, q_src),
            floor: q_src * (1.0 - p_src) / (p_src * (1.0 - q_src)),
        })
    }

    /// `ell` copies of one pair.
    pub fn homogeneous(pair: ComputablePair, ell: usize, p_src: f64, q_src: f64, iterations: u64) -> Result<Self> {
        Self::new(p_src, q_src, vec![pair; ell], iterations)
    }

    pub fn p_src(&self) -> f64 {
        self.p_src
    }

    pub fn q_src(&self) -> f64 {
        self.q_src
    }

    pub fn targets(&self) -> &[ComputablePair] {
        &self.targets
    }

    pub fn ell(&self) -> usize {
        self.targets.len()
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn space(&self) -> Space {
        self.targets[0].space()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.targets.iter().all(|t| *t == self.targets[0])
    }

    /// Acceptance probability of a proposal with summed LLR `l` inside the window.
    #[inline]
    pub fn accept_prob(&self, b: bool, l: f64) -> f64 {
        let scaled = self.q_src / self.p_src * l.exp();
        let a = if b { scaled - self.floor } else { 1.0 - scaled };
        debug_assert!(
            (-1e-9..=1.0 + 1e-9).contains(&a),
            "acceptance probability {a} outside [0, 1] at l={l}"
        );
        a.clamp(0.0, 1.0)
    }

    fn llr_sum(&self, z: &[f64]) -> f64 {
        self.targets.iter().zip(z).map(|(t, &x)| t.llr_unchecked(x)).sum()
    }
}

/// How a kernel draw ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrkOutcome {
    /// Accepted at this zero-based iteration.
    Accepted(u64),
    /// All iterations rejected; the output is the null-mode vector.
    Fallback,
}

/// One kernel draw for input bit `b`.
pub fn mrk_map<R: Rng + ?Sized>(spec: &KernelSpec, b: bool, rng: &mut R) -> Vec<f64> {
    let mut out = vec![0.0; spec.ell()];
    mrk_map_into(spec, b, rng, &mut out);
    out
}

/// Kernel draw written into `out`, which must have length `ell`.
pub fn mrk_map_into<R: Rng + ?Sized>(spec: &KernelSpec, b: bool, rng: &mut R, out: &mut [f64]) -> MrkOutcome {
    assert_eq!(out.len(), spec.ell(), "output buffer length");
    for it in 0..spec.iterations {
        for (slot, t) in out.iter_mut().zip(&spec.targets) {
            *slot = t.sample_null(rng);
        }
        let l = spec.llr_sum(out);
        if !spec.window.contains(l) {
            continue;
        }
        if rng.random::<f64>() < spec.accept_prob(b, l) {
            return MrkOutcome::Accepted(it);
        }
    }
    for (slot, t) in out.iter_mut().zip(&spec.targets) {
        *slot = t.null_mode();
    }
    MrkOutcome::Fallback
}

pub const MAX_EXACT_COORDINATES: usize = 20;

fn bernoulli_probs(spec: &KernelSpec) -> Result<Vec<(f64, f64)>> {
    if spec.ell() > MAX_EXACT_COORDINATES {
        return Err(invalid(format!("exact laws need at most {MAX_EXACT_COORDINATES} coordinates")));
    }
    spec.targets
        .iter()
        .map(|t| match t.family() {
            Family::Bernoulli { p_alt, p_null } => Ok((p_alt, p_null)),
            Family::Gaussian { .. } => Err(invalid("exact laws need Bernoulli targets")),
        })
        .collect()
}

/// Probability of outcome `mask` (bit `i` is coordinate `i`) under the
/// product of alternatives (`planted`) or nulls.
fn product_prob(probs: &[(f64, f64)], mask: u32, planted: bool) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(i, &(p, q))| {
            let w = if planted { p } else { q };
            if mask >> i & 1 == 1 {
                w
            } else {
                1.0 - w
            }
        })
        .product()
}

/// Exact target law `prod P_i` (`planted`) or `prod Q_i` over outcome
/// bitmasks; Bernoulli targets only.
pub fn target_law(spec: &KernelSpec, planted: bool) -> Result<FiniteLaw<u32>> {
    let probs = bernoulli_probs(spec)?;
    FiniteLaw::new((0..1u32 << probs.len()).map(|m| (m, product_prob(&probs, m, planted))).collect())
}

/// Exact law of `mrk_map(spec, b)` over outcome bitmasks; Bernoulli targets only.
pub fn exact_output_law(spec: &KernelSpec, b: bool) -> Result<FiniteLaw<u32>> {
    let probs = bernoulli_probs(spec)?;
    let outcomes = 1u32 << probs.len();
    let mut weights = Vec::with_capacity(outcomes as usize);
    let mut accept = 0.0;
    for m in 0..outcomes {
        let l: f64 = spec
            .targets
            .iter()
            .enumerate()
            .map(|(i, t)| t.llr_unchecked(f64::from(m >> i & 1)))
            .sum();
        let w = if spec.window.contains(l) {
            product_prob(&probs, m, false) * spec.accept_prob(b, l)
        } else {
            0.0
        };
        accept += w;
        weights.push(w);
    }
    let fallback = if accept > 0.0 { (1.0 - accept).powf(spec.iterations as f64) } else { 1.0 };
    let mut atoms: Vec<(u32, f64)> = if accept > 0.0 {
        weights
            .iter()
            .enumerate()
            .map(|(m, w)| (m as u32, (1.0 - fallback) * w / accept))
            .collect()
    } else {
        Vec::new()
    };
    atoms.push((0, fallback));
    FiniteLaw::new(atoms)
}

/// Exact output law when the input bit is `Bern(p_src)` (`planted`) or
/// `Bern(q_src)`; this is the law compared against [`target_law`].
pub fn mixed_output_law(spec: &KernelSpec, planted: bool) -> Result<FiniteLaw<u32>> {
    let w = if planted { spec.p_src } else { spec.q_src };
    FiniteLaw::mixture(&exact_output_law(spec, true)?, w, &exact_output_law(spec, false)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    Exact,
    MonteCarlo { draws: u64 },
}

/// Mass outside the acceptance window under `prod P_i` and `prod Q_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProbs {
    pub tail_p: f64,
    pub tail_q: f64,
    pub stderr_p: f64,
    pub stderr_q: f64,
    pub method: TailMethod,
}

pub const DEFAULT_TAIL_DRAWS: u64 = 1_000_000;
const TAIL_SEED: u64 = 0x7A11;

/// Exact tails for Gaussian targets and for Bernoulli targets that are
/// homogeneous or have at most 20 coordinates; Monte Carlo otherwise.
pub fn tail_probs(spec: &KernelSpec) -> TailProbs {
    let exact = |tail_p, tail_q| TailProbs { tail_p, tail_q, stderr_p: 0.0, stderr_q: 0.0, method: TailMethod::Exact };
    let w = spec.window;
    match spec.targets[0].family() {
        Family::Gaussian { .. } => {
            let s: f64 = spec
                .targets
                .iter()
                .map(|t| match t.family() {
                    Family::Gaussian { mu } => mu * mu,
                    Family::Bernoulli { .. } => unreachable!("one family per kernel"),
                })
                .sum();
            let sd = s.sqrt();
            let tail = |mean: f64| normal_sf((w.c_plus - mean) / sd) + normal_cdf((w.c_minus - mean) / sd);
            exact(tail(s / 2.0), tail(-s / 2.0))
        }
        Family::Bernoulli { p_alt, p_null } if spec.is_homogeneous() => {
            let m = spec.ell();
            let (l0, l1) = spec.targets[0].llr_atoms().expect("bernoulli");
            // Zero counts contribute nothing, even against an infinite atom.
            let term = |c: usize, l: f64| if c == 0 { 0.0 } else { c as f64 * l };
            let outside = |pmf: Vec<f64>| -> f64 {
                pmf.iter()
                    .enumerate()
                    .filter(|(j, _)| !w.contains(term(*j, l1) + term(m - j, l0)))
                    .map(|(_, v)| v)
                    .sum()
            };
            exact(outside(binomial_pmf(m, p_alt)), outside(binomial_pmf(m, p_null)))
        }
        Family::Bernoulli { .. } if spec.ell() <= MAX_EXACT_COORDINATES => {
            let probs = bernoulli_probs(spec).expect("bernoulli targets");
            let (mut tp, mut tq) = (0.0, 0.0);
            for m in 0..1u32 << probs.len() {
                let x: Vec<f64> = (0..probs.len()).map(|i| f64::from(m >> i & 1)).collect();
                if !w.contains(spec.llr_sum(&x)) {
                    tp += product_prob(&probs, m, true);
                    tq += product_prob(&probs, m, false);
                }
            }
            exact(tp, tq)
        }
        Family::Bernoulli { .. } => tail_probs_monte_carlo(spec, DEFAULT_TAIL_DRAWS, TAIL_SEED),
    }
}

/// Monte Carlo tails with `draws` samples from each product law.
pub fn tail_probs_monte_carlo(spec: &KernelSpec, draws: u64, seed: u64) -> TailProbs {
    let mut rng = stream_rng(seed, &[0x7461_696c]);
    let mut z = vec![0.0; spec.ell()];
    let mut count = |planted: bool| {
        let mut hits = 0u64;
        for _ in 0..draws {
            for (slot, t) in z.iter_mut().zip(&spec.targets) {
                *slot = t.sample(planted, &mut rng);
            }
            if !spec.window.contains(spec.llr_sum(&z)) {
                hits += 1;
            }
        }
        hits as f64 / draws as f64
    };
    let tail_p = count(true);
    let tail_q = count(false);
    let se = |t: f64| (t * (1.0 - t) / draws as f64).sqrt();
    TailProbs { tail_p, tail_q, stderr_p: se(tail_p), stderr_q: se(tail_q), method: TailMethod::MonteCarlo { draws } }
}

/// Bound on the kernel's TV error together with the inputs it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBound {
    pub delta: f64,
    pub tail_p: f64,
    pub tail_q: f64,
    pub recommended_iterations: u64,
}

pub const MAX_RECOMMENDED_ITERATIONS: u64 = 1_000_000;

/// `Delta = (t_q + t_p)/(p - q) + max{(t_q + q/p)^N, ((q/p) t_p + (p - 2pq + q^2)/(p - pq))^N}`
/// evaluated at the spec's iteration count. `recommended_iterations` is
/// the smallest `N` for which the geometric term falls below the tail
/// term (or `1e-12` when the tails vanish), capped at one million.
pub fn delta_bound(spec: &KernelSpec, tails: &TailProbs) -> DeltaBound {
    let (p, q) = (spec.p_src, spec.q_src);
    let (tp, tq) = (tails.tail_p, tails.tail_q);
    let first = (tq + tp) / (p - q);
    let base = (tq + q / p).max(q / p * tp + (p - 2.0 * p * q + q * q) / (p - p * q));
    let geometric = base.powf(spec.iterations as f64);
    let target = first.max(1e-12);
    let recommended = if base < 1.0 {
        let n = (target.ln() / base.ln()).ceil();
        if n.is_finite() && n < MAX_RECOMMENDED_ITERATIONS as f64 {
            n.max(1.0) as u64
        } else {
            MAX_RECOMMENDED_ITERATIONS
        }
    } else {
        MAX_RECOMMENDED_ITERATIONS
    };
    DeltaBound { delta: first + geometric, tail_p: tp, tail_q: tq, recommended_iterations: recommended }
}

/// Largest admissible tail exponents for `ell` copies of `pair`:
/// `(E_P(c_plus / ell), E_Q(c_minus / ell))`.
pub fn largest_taus(pair: &ComputablePair, ell: usize, p_src: f64, q_src: f64) -> (f64, f64) {
    let w = Window::new(p_src, q_src);
    let l = ell as f64;
    (
        chernoff_exponent(pair, ExponentQuery { side: Side::UnderP, tau: w.c_plus / l }),
        chernoff_exponent(pair, ExponentQuery { side: Side::UnderQ, tau: w.c_minus / l }),
    )
}

/// Chernoff-based bound for `ell` copies of one pair:
/// `Delta <= 3(e^{-ell tau_plus} + e^{-ell tau_minus})/(p - q)` once
/// `N = ceil(ell min(tau_plus, tau_minus) / -log(1 - q(p - q)/(2p)))`.
/// With `p_src = 1` the lower window edge is `-inf` and every
/// `tau_minus` term is dropped.
pub fn homogeneous_delta(
    pair: &ComputablePair,
    ell: usize,
    p_src: f64,
    q_src: f64,
    tau_plus: f64,
    tau_minus: f64,
) -> Result<DeltaBound> {
    if !(q_src > 0.0 && q_src < p_src && p_src <= 1.0) {
        return Err(invalid(format!("kernel source needs 0 < q < p <= 1, got p={p_src} q={q_src}")));
    }
    if ell == 0 {
        return Err(invalid("ell must be positive"));
    }
    let (p, q, l) = (p_src, q_src, ell as f64);
    let drop_minus = p == 1.0;
    let floor = (4.0 / (p - q)).ln() / l;
    if tau_plus < floor || (!drop_minus && tau_minus < floor) {
        return Err(hypothesis(format!(
            "tau_plus={tau_plus}, tau_minus={tau_minus} must be at least log(4/(p-q))/ell = {floor}"
        )));
    }
    let w = Window::new(p, q);
    if !(w.c_minus < -l * pair.kl_qp() && l * pair.kl_pq() < w.c_plus) {
        return Err(hypothesis(format!(
            "window sandwich c_minus < -ell KL(Q||P) <= ell KL(P||Q) < c_plus fails: {} < {} <= {} < {}",
            w.c_minus,
            -l * pair.kl_qp(),
            l * pair.kl_pq(),
            w.c_plus
        )));
    }
    let (e_plus, e_minus) = largest_taus(pair, ell, p, q);
    if e_plus < tau_plus {
        return Err(hypothesis(format!("E_P(c_plus/ell) = {e_plus} is below tau_plus = {tau_plus}")));
    }
    if !drop_minus && e_minus < tau_minus {
        return Err(hypothesis(format!("E_Q(c_minus/ell) = {e_minus} is below tau_minus = {tau_minus}")));
    }
    let minus_term = if drop_minus { 0.0 } else { (-l * tau_minus).exp() };
    let tails = (-l * tau_plus).exp() + minus_term;
    let tau_min = if drop_minus { tau_plus } else { tau_plus.min(tau_minus) };
    let rate = -(1.0 - q * (p - q) / (2.0 * p)).ln();
    let n = (l * tau_min / rate).ceil();
    Ok(DeltaBound {
        delta: 3.0 * tails / (p - q),
        tail_p: tails,
        tail_q: tails,
        recommended_iterations: if n < MAX_RECOMMENDED_ITERATIONS as f64 { n as u64 } else { MAX_RECOMMENDED_ITERATIONS },
    })
}
