//! Detection statistics for planted submatrices and a Monte Carlo
//! harness for their Type I + Type II error. Detectors see only the
//! observed matrix, never its latent planted set.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pairs::{chernoff_exponent, ComputablePair, ExponentQuery, Side};
use crate::rng::{stream_rng, StreamRng};
use crate::sampler::{sample_submatrix, sample_submatrix_asd, Entries, MatrixSample};
use crate::pairs::PairGrid;

/// Outcome of one detector application; ties `T = tau` reject the null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub statistic: f64,
    pub threshold: f64,
    pub reject_null: bool,
}

pub trait Detector: Sync {
    fn name(&self) -> &'static str;
    fn threshold(&self) -> f64;
    fn statistic(&self, m: &MatrixSample) -> Result<f64>;

    fn decide(&self, m: &MatrixSample) -> Result<Decision> {
        let statistic = self.statistic(m)?;
        let threshold = self.threshold();
        Ok(Decision { statistic, threshold, reject_null: statistic >= threshold })
    }
}

/// Matrix of entry LLRs, row-major.
pub fn llr_matrix(m: &MatrixSample, pair: &ComputablePair) -> Vec<f64> {
    match m.entries() {
        Entries::Bits(bits) => {
            let (l0, l1) = pair.llr_range();
            bits.iter().map(|&b| if b { l1 } else { l0 }).collect()
        }
        Entries::Reals(vals) => vals.iter().map(|&x| pair.llr_unchecked(x)).collect(),
    }
}

fn check_space(m: &MatrixSample, pair: &ComputablePair) -> Result<()> {
    if m.space() != pair.space() {
        return Err(Error::Domain(format!("matrix space {:?} does not match {pair}", m.space())));
    }
    Ok(())
}

fn check_open_interval(pair: &ComputablePair, tau: f64) -> Result<()> {
    if !(-pair.kl_qp() < tau && tau < pair.kl_pq()) {
        return Err(invalid(format!(
            "threshold {tau} must lie strictly inside (-KL(Q||P), KL(P||Q)) = ({}, {})",
            -pair.kl_qp(),
            pair.kl_pq()
        )));
    }
    Ok(())
}

/// `T_sum = (1/n^2) sum_ij llr(M_ij)`.
pub fn t_sum(m: &MatrixSample, pair: &ComputablePair) -> Result<f64> {
    check_space(m, pair)?;
    let n = m.d() as f64;
    let total = match m.entries() {
        Entries::Bits(bits) => {
            let ones = bits.iter().filter(|&&b| b).count() as f64;
            let (l0, l1) = pair.llr_range();
            let zeros = bits.len() as f64 - ones;
            let mut t = 0.0;
            if ones > 0.0 {
                t += ones * l1;
            }
            if zeros > 0.0 {
                t += zeros * l0;
            }
            t
        }
        Entries::Reals(vals) => vals.iter().map(|&x| pair.llr_unchecked(x)).sum(),
    };
    Ok(total / (n * n))
}

/// `tau_sum = -KL(Q||P) + (k^2 / 2n^2) (KL(P||Q) + KL(Q||P))`.
pub fn tau_sum(n: usize, k: usize, pair: &ComputablePair) -> Result<f64> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n} k={k}")));
    }
    let r = (k * k) as f64 / (n * n) as f64;
    Ok(-pair.kl_qp() + r / 2.0 * pair.skl())
}

/// `T_max = max_ij llr(M_ij)`.
pub fn t_max(m: &MatrixSample, pair: &ComputablePair) -> Result<f64> {
    check_space(m, pair)?;
    Ok(llr_matrix(m, pair).into_iter().fold(f64::NEG_INFINITY, f64::max))
}

pub const SEARCH_BUDGET: f64 = 1e7;

/// Number of `k`-subsets of `[n]` as a float.
fn choose(n: usize, k: usize) -> f64 {
    crate::stats::ln_choose(n as u64, k as u64).exp()
}

/// Advances `a` to the next `k`-subset of `[n]` in colex order; returns
/// the prefix length that changed, or `None` after the last subset.
fn colex_next(a: &mut [usize], n: usize) -> Option<usize> {
    let k = a.len();
    for i in 0..k {
        let limit = if i + 1 < k { a[i + 1] } else { n };
        if a[i] + 1 < limit {
            a[i] += 1;
            for (j, slot) in a.iter_mut().enumerate().take(i) {
                *slot = j;
            }
            return Some(i + 1);
        }
    }
    None
}

/// `T_search = max_{|S| = |T| = k} (1/k^2) sum_{i in S, j in T} llr(M_ij)`.
/// Row sets are enumerated in colex order with incremental column sums;
/// for each row set the best column set is the `k` largest column sums.
/// Errors when `C(n, k)^2` exceeds the search budget.
pub fn t_search(m: &MatrixSample, pair: &ComputablePair, k: usize) -> Result<f64> {
    check_space(m, pair)?;
    let n = m.d();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n} k={k}")));
    }
    let pairs = choose(n, k).powi(2);
    if pairs > SEARCH_BUDGET * (1.0 + 1e-9) {
        return Err(Error::Budget(format!(
            "exhaustive search over C({n},{k})^2 = {pairs:.3e} subset pairs exceeds {SEARCH_BUDGET:.0e}"
        )));
    }
    let llr = llr_matrix(m, pair);
    let mut rows: Vec<usize> = (0..k).collect();
    let mut col_sums = vec![0.0; n];
    for &i in &rows {
        for j in 0..n {
            col_sums[j] += llr[i * n + j];
        }
    }
    let mut scratch = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        scratch.copy_from_slice(&col_sums);
        let top = if k < n {
            scratch.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
            &scratch[..k]
        } else {
            &scratch[..]
        };
        best = best.max(top.iter().sum::<f64>());
        let old: Vec<usize> = rows.clone();
        let Some(changed) = colex_next(&mut rows, n) else { break };
        for &i in &old[..changed] {
            for j in 0..n {
                col_sums[j] -= llr[i * n + j];
            }
        }
        for &i in &rows[..changed] {
            for j in 0..n {
                col_sums[j] += llr[i * n + j];
            }
        }
    }
    Ok(best / (k * k) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumTest {
    pub pair: ComputablePair,
    pub threshold: f64,
}

impl SumTest {
    pub fn new(pair: ComputablePair, n: usize, k: usize) -> Result<Self> {
        Ok(Self { pair, threshold: tau_sum(n, k, &pair)? })
    }

    pub fn with_threshold(pair: ComputablePair, threshold: f64) -> Self {
        Self { pair, threshold }
    }
}

impl Detector for SumTest {
    fn name(&self) -> &'static str {
        "sum"
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn statistic(&self, m: &MatrixSample) -> Result<f64> {
        t_sum(m, &self.pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxTest {
    pub pair: ComputablePair,
    pub threshold: f64,
}

impl MaxTest {
    /// Threshold `0`.
    pub fn new(pair: ComputablePair) -> Result<Self> {
        Self::with_threshold(pair, 0.0)
    }

    pub fn with_threshold(pair: ComputablePair, threshold: f64) -> Result<Self> {
        check_open_interval(&pair, threshold)?;
        Ok(Self { pair, threshold })
    }

    /// Smallest threshold `tau >= -kl_qp` whose union bound
    /// `entries * exp(-E_Q(tau))` is at most `level`. Unlike `with_threshold`
    /// this may exceed `kl_pq`: the Chernoff tail bound holds for every `tau`
    /// above the null mean.
    pub fn union_bound(pair: ComputablePair, entries: usize, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) || entries == 0 {
            return Err(invalid(format!("union bound needs entries >= 1 and level in (0, 1), got {entries}, {level}")));
        }
        let target = (entries as f64 / level).ln();
        let e_q = |tau: f64| chernoff_exponent(&pair, ExponentQuery { side: Side::UnderQ, tau });
        let mut lo = if pair.kl_qp().is_finite() { -pair.kl_qp() } else { 0.0 };
        let mut hi = pair.kl_pq().max(1.0);
        while e_q(hi) < target {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if e_q(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Self { pair, threshold: hi })
    }
}

impl Detector for MaxTest {
    fn name(&self) -> &'static str {
        "max"
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn statistic(&self, m: &MatrixSample) -> Result<f64> {
        t_max(m, &self.pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchTest {
    pub pair: ComputablePair,
    pub k: usize,
    pub threshold: f64,
}

impl SearchTest {
    /// Threshold `0`.
    pub fn new(pair: ComputablePair, k: usize) -> Result<Self> {
        Self::with_threshold(pair, k, 0.0)
    }

    pub fn with_threshold(pair: ComputablePair, k: usize, threshold: f64) -> Result<Self> {
        check_open_interval(&pair, threshold)?;
        if k == 0 {
            return Err(invalid("search size k must be positive"));
        }
        Ok(Self { pair, k, threshold })
    }
}

impl Detector for SearchTest {
    fn name(&self) -> &'static str {
        "search"
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn statistic(&self, m: &MatrixSample) -> Result<f64> {
        t_search(m, &self.pair, self.k)
    }
}

/// Planted submatrix ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ensemble {
    /// One planted index set for rows and columns.
    #[default]
    Ssd,
    /// Independent planted row and column sets.
    Asd,
}

/// Sampler for one hypothesis: `k = None` draws the null.
pub fn ensemble_sampler(
    ensemble: Ensemble,
    n: usize,
    k: Option<usize>,
    pair: ComputablePair,
) -> Result<impl Fn(&mut StreamRng) -> Result<MatrixSample> + Sync> {
    let grid = PairGrid::homogeneous(n, pair)?;
    Ok(move |rng: &mut StreamRng| match ensemble {
        Ensemble::Ssd => sample_submatrix(n, k, &grid, rng),
        Ensemble::Asd => sample_submatrix_asd(n, k, &grid, rng),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReport {
    pub detector: String,
    pub threshold: f64,
    pub trials: usize,
    pub type1: f64,
    pub type2: f64,
    pub total: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Runs `detector` on `trials` samples from each hypothesis. Trial `t`
/// under hypothesis `h` (0 null, 1 planted) uses stream `(seed, h, t)`.
pub fn estimate_error<D, F0, F1>(detector: &D, null: F0, planted: F1, trials: usize, seed: u64) -> Result<DetectorReport>
where
    D: Detector + ?Sized,
    F0: Fn(&mut StreamRng) -> Result<MatrixSample> + Sync,
    F1: Fn(&mut StreamRng) -> Result<MatrixSample> + Sync,
{
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let count = |h: u64, sampler: &(dyn Fn(&mut StreamRng) -> Result<MatrixSample> + Sync), want: bool| -> Result<usize> {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(seed, &[h, t as u64]);
                let m = sampler(&mut rng)?;
                Ok(usize::from(detector.decide(&m)?.reject_null == want))
            })
            .sum()
    };
    let false_alarms = count(0, &null, true)?;
    let misses = count(1, &planted, false)?;
    let tf = trials as f64;
    let type1 = false_alarms as f64 / tf;
    let type2 = misses as f64 / tf;
    Ok(DetectorReport {
        detector: detector.name().to_string(),
        threshold: detector.threshold(),
        trials,
        type1,
        type2,
        total: type1 + type2,
        stderr: ((type1 * (1.0 - type1) + type2 * (1.0 - type2)) / tf).sqrt(),
        seed,
    })
}

/// One CSV row of a detection experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorRow {
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
}

impl DetectorRow {
    pub fn new(report: &DetectorReport, n: usize, k: usize, pair: &ComputablePair) -> Self {
        Self {
            detector: report.detector.clone(),
            n,
            k,
            family: pair.family_name().to_string(),
            param: pair.param_string(),
            skl: pair.skl(),
            trials: report.trials,
            type1: report.type1,
            type2: report.type2,
            total: report.total,
            stderr: report.stderr,
            seed: report.seed,
        }
    }
}
