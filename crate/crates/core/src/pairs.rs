//! Computable distribution pairs: the planted law `P` and null law `Q`
//! together with their log-likelihood ratio, divergences, log-moment
//! generating functions and Chernoff exponents.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::KeyValues;
use crate::error::{invalid, Error, Result};

/// Sample space shared by both laws of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// `{0, 1}`, encoded as `0.0` and `1.0`.
    Bit,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `P = N(mu, 1)`, `Q = N(0, 1)`.
    Gaussian { mu: f64 },
    /// `P = Bern(p_alt)`, `Q = Bern(p_null)` with `p_null < p_alt`.
    Bernoulli { p_alt: f64, p_null: f64 },
}

/// Which law the log-likelihood ratio is averaged under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    UnderP,
    UnderQ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentQuery {
    pub side: Side,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputablePair {
    family: Family,
    kl_pq: f64,
    kl_qp: f64,
}

/// Bernoulli relative entropy `D(Bern(a) || Bern(b))`.
pub fn kl_bernoulli(a: f64, b: f64) -> f64 {
    fn term(x: f64, y: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln()
        }
    }
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// `log(1 - x)` with full precision for small `x`.
fn ln_one_minus(x: f64) -> f64 {
    (-x).ln_1p()
}

/// `lambda * l` with the convention `0 * (-inf) = 0`.
fn scaled(lambda: f64, l: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda * l
    }
}

/// `log(sum_i w_i exp(lambda * l_i))` over atoms with positive weight.
fn log_mgf_atoms(atoms: &[(f64, f64)], lambda: f64) -> f64 {
    let exps: Vec<f64> = atoms
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, l)| w.ln() + scaled(lambda, *l))
        .collect();
    let max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln()
}

impl ComputablePair {
    pub fn gaussian(mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu == 0.0 {
            return Err(invalid(format!("gaussian mean must be finite and nonzero, got {mu}")));
        }
        let kl = mu * mu / 2.0;
        Ok(Self { family: Family::Gaussian { mu }, kl_pq: kl, kl_qp: kl })
    }

    /// `p_alt = 1` is admitted; then `kl_qp` is infinite.
    pub fn bernoulli(p_alt: f64, p_null: f64) -> Result<Self> {
        if !(p_null > 0.0 && p_null < p_alt && p_alt <= 1.0) {
            return Err(invalid(format!(
                "bernoulli pair needs 0 < p_null < p_alt <= 1, got p_alt={p_alt} p_null={p_null}"
            )));
        }
        Ok(Self {
            family: Family::Bernoulli { p_alt, p_null },
            kl_pq: kl_bernoulli(p_alt, p_null),
            kl_qp: kl_bernoulli(p_null, p_alt),
        })
    }

    /// Gaussian pair with symmetric KL divergence `skl`.
    pub fn gaussian_with_skl(skl: f64) -> Result<Self> {
        if !(skl > 0.0 && skl.is_finite()) {
            return Err(invalid(format!("symmetric KL must be positive, got {skl}")));
        }
        Self::gaussian(skl.sqrt())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn space(&self) -> Space {
        match self.family {
            Family::Gaussian { .. } => Space::Real,
            Family::Bernoulli { .. } => Space::Bit,
        }
    }

    pub fn kl_pq(&self) -> f64 {
        self.kl_pq
    }

    pub fn kl_qp(&self) -> f64 {
        self.kl_qp
    }

    pub fn skl(&self) -> f64 {
        self.kl_pq + self.kl_qp
    }

    /// `chi^2(P || Q)`.
    pub fn chi2(&self) -> f64 {
        match self.family {
            Family::Gaussian { mu } => (mu * mu).exp_m1(),
            Family::Bernoulli { p_alt: p, p_null: q } => (p - q) * (p - q) / (q * (1.0 - q)),
        }
    }

    /// `(L(0), L(1))` for Bernoulli pairs.
    pub fn llr_atoms(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::Gaussian { .. } => None,
            Family::Bernoulli { p_alt: p, p_null: q } => {
                Some((ln_one_minus(p) - ln_one_minus(q), (p / q).ln()))
            }
        }
    }

    /// Infimum and supremum of the support of the log-likelihood ratio.
    pub fn llr_range(&self) -> (f64, f64) {
        self.llr_atoms().unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn llr(&self, x: f64) -> Result<f64> {
        match self.family {
            Family::Gaussian { .. } if x.is_finite() => Ok(self.llr_unchecked(x)),
            Family::Bernoulli { .. } if x == 0.0 || x == 1.0 => Ok(self.llr_unchecked(x)),
            _ => Err(Error::Domain(format!("{x} is not in the sample space of {self}"))),
        }
    }

    /// LLR without domain validation; bits other than `1.0` read as `0`.
    #[inline]
    pub fn llr_unchecked(&self, x: f64) -> f64 {
        match self.family {
            Family::Gaussian { mu } => mu * x - mu * mu / 2.0,
            Family::Bernoulli { p_alt: p, p_null: q } => {
                if x == 1.0 {
                    (p / q).ln()
                } else {
                    ln_one_minus(p) - ln_one_minus(q)
                }
            }
        }
    }

    /// `psi(lambda) = log E[exp(lambda L)]` under the requested law.
    pub fn log_mgf(&self, side: Side, lambda: f64) -> f64 {
        match self.family {
            Family::Gaussian { mu } => {
                let s = mu * mu;
                match side {
                    Side::UnderQ => -lambda * s / 2.0 + lambda * lambda * s / 2.0,
                    Side::UnderP => lambda * s / 2.0 + lambda * lambda * s / 2.0,
                }
            }
            Family::Bernoulli { p_alt: p, p_null: q } => {
                let (l0, l1) = self.llr_atoms().expect("bernoulli");
                let w = match side {
                    Side::UnderQ => q,
                    Side::UnderP => p,
                };
                log_mgf_atoms(&[(1.0 - w, l0), (w, l1)], lambda)
            }
        }
    }

    /// Mean of the LLR under the requested law.
    pub fn llr_mean(&self, side: Side) -> f64 {
        match side {
            Side::UnderP => self.kl_pq,
            Side::UnderQ => -self.kl_qp,
        }
    }

    /// Mode of the null law, used as the fallback output of rejection kernels.
    pub fn null_mode(&self) -> f64 {
        0.0
    }

    pub fn sample_null<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::Gaussian { .. } => rng.sample(StandardNormal),
            Family::Bernoulli { p_null, .. } => bit(rng, p_null),
        }
    }

    pub fn sample_alt<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            Family::Gaussian { mu } => mu + rng.sample::<f64, _>(StandardNormal),
            Family::Bernoulli { p_alt, .. } => bit(rng, p_alt),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, planted: bool, rng: &mut R) -> f64 {
        if planted {
            self.sample_alt(rng)
        } else {
            self.sample_null(rng)
        }
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        match kv.require_str("family")? {
            "gaussian" => Self::gaussian(kv.require("mu")?),
            "bernoulli" => Self::bernoulli(kv.require("p")?, kv.require("q")?),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }

    /// Short parameter string such as `mu=0.5` or `p=0.6;q=0.3`.
    pub fn param_string(&self) -> String {
        match self.family {
            Family::Gaussian { mu } => format!("mu={mu}"),
            Family::Bernoulli { p_alt, p_null } => format!("p={p_alt};q={p_null}"),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Gaussian { .. } => "gaussian",
            Family::Bernoulli { .. } => "bernoulli",
        }
    }
}

#[inline]
fn bit<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

impl fmt::Display for ComputablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Gaussian { mu } => write!(f, "family=gaussian mu={mu}"),
            Family::Bernoulli { p_alt, p_null } => write!(f, "family=bernoulli p={p_alt} q={p_null}"),
        }
    }
}

impl FromStr for ComputablePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(s)?)
    }
}

/// Closed-form exponent `sup_lambda (lambda tau - psi(lambda))`.
pub fn chernoff_exponent(pair: &ComputablePair, query: ExponentQuery) -> f64 {
    let tau = query.tau;
    if tau.is_nan() {
        return f64::NAN;
    }
    match pair.family {
        Family::Gaussian { mu } => {
            let s = mu * mu;
            if !tau.is_finite() {
                return f64::INFINITY;
            }
            let centre = match query.side {
                Side::UnderQ => tau + s / 2.0,
                Side::UnderP => tau - s / 2.0,
            };
            centre * centre / (2.0 * s)
        }
        Family::Bernoulli { p_alt: p, p_null: q } => {
            let (l0, l1) = pair.llr_atoms().expect("bernoulli");
            // Thresholds within rounding of an atom are the atom.
            let snap = |a: f64| (tau - a).abs() <= 1e-12 * a.abs().max(1.0);
            let tau = if snap(l1) { l1 } else if l0.is_finite() && snap(l0) { l0 } else { tau };
            if tau > l1 {
                return f64::INFINITY;
            }
            if p == 1.0 {
                return match query.side {
                    Side::UnderP if tau == l1 => 0.0,
                    Side::UnderP => f64::INFINITY,
                    Side::UnderQ => -q.ln(),
                };
            }
            if tau < l0 {
                return f64::INFINITY;
            }
            let alpha = ((tau - l0) / (l1 - l0)).clamp(0.0, 1.0);
            match query.side {
                Side::UnderP => kl_bernoulli(alpha, p),
                Side::UnderQ => kl_bernoulli(alpha, q),
            }
        }
    }
}

const LAMBDA_EDGE: f64 = 64.0;
const GOLDEN_ITERATIONS: usize = 200;

/// Exponent from the log-MGF alone by golden-section search over
/// `lambda in [-64, 64]`. Returns `+inf` when the objective is still
/// increasing at the edge of the bracket.
pub fn chernoff_exponent_numeric(pair: &ComputablePair, query: ExponentQuery) -> f64 {
    let tau = query.tau;
    if tau.is_nan() {
        return f64::NAN;
    }
    let objective = |lambda: f64| {
        let psi = pair.log_mgf(query.side, lambda);
        if psi == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            scaled(lambda, tau) - psi
        }
    };
    let slope = tau - pair.llr_mean(query.side);
    if slope == 0.0 {
        return 0.0;
    }
    let dir = slope.signum();
    let mut hi = 1.0_f64;
    while hi < LAMBDA_EDGE && objective(dir * 2.0 * hi) > objective(dir * hi) {
        hi *= 2.0;
    }
    let hi = (2.0 * hi).min(LAMBDA_EDGE);
    if hi == LAMBDA_EDGE {
        let edge = objective(dir * LAMBDA_EDGE);
        let inner = objective(dir * LAMBDA_EDGE * (1.0 - 1e-6));
        if edge > inner {
            return f64::INFINITY;
        }
    }
    let (mut a, mut b) = (0.0_f64, hi);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(dir * x1);
    let mut f2 = objective(dir * x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(dir * x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(dir * x1);
        }
    }
    f1.max(f2).max(objective(dir * 0.5 * (a + b))).max(0.0)
}

/// Universality classes of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcClass {
    /// Large-deviation exponent grows like `log n` past `n^eps` times the mean.
    A,
    /// Log-MGF dominated by its quadratic expansion on `[-1, 1]`.
    B,
    /// `chi^2` comparable to symmetric KL.
    C,
}

/// Acceptance thresholds used to turn a finite-`n` measurement into a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcThresholds {
    pub b_cap: f64,
    pub c_cap: f64,
    pub a_floor: f64,
    pub grid: usize,
}

impl Default for UcThresholds {
    fn default() -> Self {
        Self { b_cap: 100.0, c_cap: 100.0, a_floor: 0.05, grid: 2000 }
    }
}

/// `margin` is the class constant (smallest `C` for B, the ratio for C,
/// the coefficient `c` for A); `witness` is the `lambda` attaining the
/// constant for B, `chi^2` for C, and the exponent value for A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcReport {
    pub class: UcClass,
    pub satisfied: bool,
    pub margin: f64,
    pub witness: f64,
}

pub fn uc_membership(pair: &ComputablePair, class: UcClass, n: usize, epsilon: f64) -> Result<UcReport> {
    uc_membership_with(pair, class, n, epsilon, &UcThresholds::default())
}

pub fn uc_membership_with(
    pair: &ComputablePair,
    class: UcClass,
    n: usize,
    epsilon: f64,
    th: &UcThresholds,
) -> Result<UcReport> {
    match class {
        UcClass::B => {
            let (c, lambda) = uc_b_constant(pair, th.grid);
            Ok(UcReport { class, satisfied: c <= th.b_cap, margin: c, witness: lambda })
        }
        UcClass::C => {
            let chi2 = pair.chi2();
            let ratio = chi2 / pair.skl();
            Ok(UcReport { class, satisfied: ratio <= th.c_cap, margin: ratio, witness: chi2 })
        }
        UcClass::A => {
            if n < 2 || !(epsilon > 0.0) {
                return Err(invalid(format!("UC-A needs n >= 2 and eps > 0, got n={n} eps={epsilon}")));
            }
            let nf = n as f64;
            let theta = nf.powf(epsilon) * pair.kl_pq();
            let e = chernoff_exponent(pair, ExponentQuery { side: Side::UnderP, tau: theta });
            let c = e / (theta * nf.ln());
            Ok(UcReport { class, satisfied: c >= th.a_floor, margin: c, witness: e })
        }
    }
}

/// Smallest `C` for which both quadratic log-MGF bounds hold on a grid.
fn uc_b_constant(pair: &ComputablePair, grid: usize) -> (f64, f64) {
    let (kp, kq) = (pair.kl_pq(), pair.kl_qp());
    if !kq.is_finite() {
        return (f64::INFINITY, -1.0);
    }
    let mut best = (0.0_f64, 0.0_f64);
    for i in 1..=grid {
        let lam = -(i as f64) / grid as f64;
        let r = (pair.log_mgf(Side::UnderP, lam) - kp * lam) / (kp * lam * lam);
        if r > best.0 || r.is_nan() {
            best = (r, lam);
        }
        for lam in [lam, -lam] {
            let r = (pair.log_mgf(Side::UnderQ, lam) + kq * lam) / (kq * lam * lam);
            if r > best.0 || r.is_nan() {
                best = (r, lam);
            }
        }
    }
    if best.0.is_nan() {
        best.0 = f64::INFINITY;
    }
    best
}

/// Two pairs with the same order of KL divergence but TV distances of
/// different polynomial orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counterexample {
    /// `TV(Bern(n^-a), Bern(2 n^-a)) = n^-a`.
    pub tv_star: f64,
    /// `TV(Bern(1/2), Bern(1/2 + n^-a/2)) = n^-a/2`.
    pub tv: f64,
    /// `D(Bern(n^-a) || Bern(2 n^-a))`, when both parameters are valid.
    pub kl_star: Option<f64>,
    /// `D(Bern(1/2) || Bern(1/2 + n^-a/2))`, when both parameters are valid.
    pub kl: Option<f64>,
}

pub fn entrywise_counterexample(n: usize, alpha: f64) -> Result<Counterexample> {
    if n < 2 || !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("need n >= 2 and alpha in [0, 1], got n={n} alpha={alpha}")));
    }
    let small = (n as f64).powf(-alpha);
    let half = (n as f64).powf(-alpha / 2.0);
    let kl_star = (2.0 * small <= 1.0).then(|| kl_bernoulli(small, 2.0 * small));
    let kl = (half <= 0.5).then(|| kl_bernoulli(0.5, 0.5 + half));
    Ok(Counterexample { tv_star: small, tv: half, kl_star, kl })
}

/// Pair assigned to every entry of a `d x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum PairGrid {
    Homogeneous { d: usize, pair: ComputablePair },
    Heteroskedastic { d: usize, pairs: Vec<ComputablePair> },
}

impl PairGrid {
    pub fn homogeneous(d: usize, pair: ComputablePair) -> Result<Self> {
        if d == 0 {
            return Err(invalid("grid dimension must be positive"));
        }
        Ok(Self::Homogeneous { d, pair })
    }

    /// `pairs` is row-major of length `d * d`, all over one sample space.
    pub fn heteroskedastic(d: usize, pairs: Vec<ComputablePair>) -> Result<Self> {
        if d == 0 || pairs.len() != d * d {
            return Err(invalid(format!("expected {} pairs for d={d}, got {}", d * d, pairs.len())));
        }
        let space = pairs[0].space();
        if pairs.iter().any(|p| p.space() != space) {
            return Err(invalid("all pairs in a grid must share one sample space"));
        }
        Ok(Self::Heteroskedastic { d, pairs })
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Homogeneous { d, .. } | Self::Heteroskedastic { d, .. } => *d,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &ComputablePair {
        match self {
            Self::Homogeneous { pair, .. } => pair,
            Self::Heteroskedastic { d, pairs } => &pairs[i * d + j],
        }
    }

    pub fn space(&self) -> Space {
        self.get(0, 0).space()
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, Self::Homogeneous { .. })
    }
}
