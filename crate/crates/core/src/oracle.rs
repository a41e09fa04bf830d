//! Exact finite laws and the quantities the verification suites compare
//! against: total variation, the diagonal-planting laws, chi-square
//! divergences of planted mixtures and the information-theoretic bound.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::pairs::ComputablePair;
use crate::rng::stream_rng;
use crate::stats::{binomial_pmf, hypergeometric_overlap_pmf};

/// Law on a finite set: distinct outcomes sorted ascending with
/// nonnegative probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw<T> {
    atoms: Vec<(T, f64)>,
}

fn mass_tolerance(len: usize) -> f64 {
    1e-12 * (len as f64).sqrt().max(1.0)
}

impl<T: Ord + Clone> FiniteLaw<T> {
    /// Merges repeated outcomes and drops zero-mass atoms.
    pub fn new(mut atoms: Vec<(T, f64)>) -> Result<Self> {
        if let Some((_, p)) = atoms.iter().find(|(_, p)| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid(format!("atom probability {p} is not a finite nonnegative number")));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(T, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some((y, q)) if *y == x => *q += p,
                _ => merged.push((x, p)),
            }
        }
        merged.retain(|(_, p)| *p > 0.0);
        let total: f64 = merged.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > mass_tolerance(merged.len()) {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn point(x: T) -> Self {
        Self { atoms: vec![(x, 1.0)] }
    }

    pub fn atoms(&self) -> &[(T, f64)] {
        &self.atoms
    }

    pub fn prob(&self, x: &T) -> f64 {
        self.atoms
            .binary_search_by(|(y, _)| y.cmp(x))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }

    /// `w * a + (1 - w) * b`.
    pub fn mixture(a: &Self, w: f64, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("mixture weight {w} outside [0, 1]")));
        }
        let atoms = a
            .atoms
            .iter()
            .map(|(x, p)| (x.clone(), w * p))
            .chain(b.atoms.iter().map(|(x, p)| (x.clone(), (1.0 - w) * p)))
            .collect();
        Self::new(atoms)
    }

    /// Law of `f(X)`.
    pub fn map<U: Ord + Clone>(&self, f: impl Fn(&T) -> U) -> FiniteLaw<U> {
        FiniteLaw::new(self.atoms.iter().map(|(x, p)| (f(x), *p)).collect())
            .expect("pushforward preserves total mass")
    }
}

/// Exact total variation distance `(1/2) sum |a(x) - b(x)|`.
pub fn tv_exact<T: Ord + Clone>(a: &FiniteLaw<T>, b: &FiniteLaw<T>) -> f64 {
    let (xs, ys) = (a.atoms(), b.atoms());
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < xs.len() || j < ys.len() {
        match (xs.get(i), ys.get(j)) {
            (Some((x, p)), Some((y, q))) if x == y => {
                acc += (p - q).abs();
                i += 1;
                j += 1;
            }
            (Some((x, p)), Some((y, _))) if x < y => {
                acc += p;
                i += 1;
            }
            (Some(_), Some((_, q))) => {
                acc += q;
                j += 1;
            }
            (Some((_, p)), None) => {
                acc += p;
                i += 1;
            }
            (None, Some((_, q))) => {
                acc += q;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (acc / 2.0).min(1.0)
}

/// Triangle-inequality bound for a chain of approximate steps.
pub fn tv_chain_bound(steps: &[f64]) -> Result<f64> {
    if let Some(s) = steps.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(invalid(format!("step bound {s} outside [0, 1]")));
    }
    Ok(steps.iter().sum::<f64>().min(1.0))
}

fn binomial_law(n: usize, p: f64) -> FiniteLaw<usize> {
    FiniteLaw::new(binomial_pmf(n, p).into_iter().enumerate().collect()).expect("binomial pmf")
}

/// Exact laws of the diagonal-planting procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSupportLaws {
    /// Law of `(t1, t2 + t4)` in the planted case.
    pub planted_pair: FiniteLaw<(usize, usize)>,
    /// `Bin(k, P) x Bin(N - k, Q)`.
    pub planted_target: FiniteLaw<(usize, usize)>,
    /// Law of `t1 + t2 + t4`.
    pub null_sum: FiniteLaw<usize>,
    /// `Bin(N, Q)`.
    pub null_target: FiniteLaw<usize>,
}

impl DiagSupportLaws {
    pub fn tv_planted(&self) -> f64 {
        tv_exact(&self.planted_pair, &self.planted_target)
    }

    pub fn tv_null(&self) -> f64 {
        tv_exact(&self.null_sum, &self.null_target)
    }
}

/// With `t1 ~ Bin(k, P)`, `t2 ~ Bin(n - k, P)`, `t3 ~ Bin(N, Q)` independent
/// and `t4 = max(t3 - t1 - t2, 0)`, enumerates the joint law exactly.
pub fn diag_support_law(n: usize, k: usize, big_n: usize, p: f64, q: f64) -> Result<DiagSupportLaws> {
    if k > n || n > big_n {
        return Err(invalid(format!("need k <= n <= N, got k={k} n={n} N={big_n}")));
    }
    for (name, v) in [("P", p), ("Q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(format!("{name}={v} is not a probability")));
        }
    }
    let f1 = binomial_pmf(k, p);
    let f2 = binomial_pmf(n - k, p);
    let f3 = binomial_pmf(big_n, q);
    let mut pair = Vec::new();
    let mut sum = Vec::new();
    for (t1, &a) in f1.iter().enumerate() {
        for (t2, &b) in f2.iter().enumerate() {
            let ab = a * b;
            if ab == 0.0 {
                continue;
            }
            for (t3, &c) in f3.iter().enumerate() {
                let t4 = t3.saturating_sub(t1 + t2);
                pair.push(((t1, t2 + t4), ab * c));
                sum.push((t1 + t2 + t4, ab * c));
            }
        }
    }
    let planted_target = FiniteLaw::new(
        f1.iter()
            .enumerate()
            .flat_map(|(i, &a)| {
                binomial_pmf(big_n - k, q)
                    .into_iter()
                    .enumerate()
                    .map(move |(j, b)| ((i, j), a * b))
            })
            .collect(),
    )?;
    Ok(DiagSupportLaws {
        planted_pair: FiniteLaw::new(pair)?,
        planted_target,
        null_sum: FiniteLaw::new(sum)?,
        null_target: binomial_law(big_n, q),
    })
}

/// Analytic bounds on the diagonal-planting error, `(null, planted)`,
/// uncapped so that values above one read as vacuous.
/// Requires `N >= (P/Q + eps) n`; the planted bound also needs
/// `k <= Q eps n / 2`.
pub fn diag_support_bounds(n: usize, k: usize, big_n: usize, p: f64, q: f64, eps: f64) -> Result<(f64, f64)> {
    let (nf, kf, bf) = (n as f64, k as f64, big_n as f64);
    if !(eps > 0.0) || bf < (p / q + eps) * nf * (1.0 - 1e-12) {
        return Err(Error::Hypothesis(format!("N >= (P/Q + eps) n fails: N={big_n} n={n} P={p} Q={q} eps={eps}")));
    }
    let base = 4.0 * (-q * eps * eps * nf * nf / (32.0 * bf)).exp();
    let planted = base + (kf * kf * (1.0 - q) / (2.0 * q * bf)).sqrt() + (kf * kf * q / (2.0 * bf * (1.0 - q))).sqrt();
    Ok((base, planted))
}

/// `E[e^{a f(H)}] - 1` where `H` has the overlap law of two `k`-subsets
/// of `[n]`, accurate both for tiny and large `a`.
fn overlap_moment(n: usize, k: usize, a: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (h0, pmf) = hypergeometric_overlap_pmf(n, k);
    let top = a * f(k as f64);
    if top < 700.0 {
        pmf.iter()
            .enumerate()
            .map(|(i, w)| w * (a * f((h0 + i) as f64)).exp_m1())
            .sum()
    } else {
        let logs: Vec<f64> = pmf
            .iter()
            .enumerate()
            .map(|(i, w)| w.ln() + a * f((h0 + i) as f64))
            .collect();
        crate::stats::log_sum_exp(&logs).exp_m1()
    }
}

/// `chi^2(V_m(P, Q, k) || Q^{x m}) = E[(1 + chi2)^H] - 1` for the mixture
/// of vectors with a uniform planted `k`-set.
pub fn chi2_vector_mixture_exact(m: usize, k: usize, chi2: f64) -> Result<f64> {
    if k > m || !(chi2 >= 0.0) {
        return Err(invalid(format!("need k <= m and chi2 >= 0, got m={m} k={k} chi2={chi2}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    Ok(overlap_moment(m, k, chi2.ln_1p(), |h| h))
}

/// Upper bound `2 k^2 chi2 / m`, valid when `k^2 chi2 <= m`.
pub fn chi2_vector_mixture_bound(m: usize, k: usize, chi2: f64) -> Result<f64> {
    let (mf, kf) = (m as f64, k as f64);
    if kf * kf * chi2 > mf {
        return Err(Error::Hypothesis(format!("k^2 chi2 = {} exceeds m = {m}", kf * kf * chi2)));
    }
    Ok(2.0 * kf * kf * chi2 / mf)
}

/// `chi^2(M_n(P, Q, k) || Q^{x n x n}) = E[(1 + chi2)^{H^2}] - 1` for the
/// symmetric planted-submatrix mixture.
pub fn chi2_mixture_exact(n: usize, k: usize, chi2: f64) -> Result<f64> {
    if k > n || !(chi2 >= 0.0) {
        return Err(invalid(format!("need k <= n and chi2 >= 0, got n={n} k={k} chi2={chi2}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    Ok(overlap_moment(n, k, chi2.ln_1p(), |h| h * h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItReport {
    /// `chi^2(P || Q)` of the entry pair.
    pub chi2: f64,
    /// `(1 / 16e) min((1/n) log(e n / k), n^2 / k^4)`.
    pub rhs: f64,
    pub satisfied: bool,
    /// Exact `chi^2` of the planted mixture against the null product.
    pub mixture_chi2: f64,
    /// `sqrt(mixture_chi2 / 2)` capped at one; the TV bound between the
    /// planted and null ensembles, claimed only when `satisfied`.
    pub tv_bound: Option<f64>,
}

pub fn it_impossibility_margin(n: usize, k: usize, pair: &ComputablePair) -> Result<ItReport> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got n={n} k={k}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let e = std::f64::consts::E;
    let rhs = ((e * nf / kf).ln() / nf).min(nf * nf / kf.powi(4)) / (16.0 * e);
    let chi2 = pair.chi2();
    let mixture_chi2 = chi2_mixture_exact(n, k, chi2)?;
    let satisfied = chi2 < rhs;
    Ok(ItReport {
        chi2,
        rhs,
        satisfied,
        mixture_chi2,
        tv_bound: satisfied.then(|| (mixture_chi2 / 2.0).sqrt().min(1.0)),
    })
}

pub const MIN_PLUGIN_SAMPLES: usize = 1000;
const BOOTSTRAP_RESAMPLES: usize = 200;

fn bin_counts(sorted_edges: &[f64], xs: &[f64], bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins + 1];
    for &x in xs {
        counts[sorted_edges.partition_point(|&e| e <= x)] += 1;
    }
    counts
}

fn tv_from_counts(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
        / 2.0
}

fn multinomial_resample<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<u64> {
    let mut remaining: u64 = counts.iter().sum();
    let mut mass_left = remaining as f64;
    counts
        .iter()
        .map(|&c| {
            if remaining == 0 || mass_left <= 0.0 {
                return 0;
            }
            let p = (c as f64 / mass_left).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining, p).expect("valid binomial").sample(rng);
            remaining -= draw;
            mass_left -= c as f64;
            draw
        })
        .collect()
}

/// Histogram plug-in TV estimate on `bins` equal-probability bins of the
/// pooled sample, with a 200-resample bootstrap standard error.
/// Returns `(estimate, stderr)`.
pub fn tv_plugin(a: &[f64], b: &[f64], bins: usize, seed: u64) -> Result<(f64, f64)> {
    if a.len() < MIN_PLUGIN_SAMPLES || b.len() < MIN_PLUGIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "need at least {MIN_PLUGIN_SAMPLES} samples per side, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if bins < 2 {
        return Err(invalid("need at least two bins"));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (1..bins).map(|i| pooled[i * pooled.len() / bins]).collect();
    edges.dedup();
    let ca = bin_counts(&edges, a, edges.len());
    let cb = bin_counts(&edges, b, edges.len());
    let estimate = tv_from_counts(&ca, &cb);
    let mut rng = stream_rng(seed, &[0x7476]);
    let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| tv_from_counts(&multinomial_resample(&ca, &mut rng), &multinomial_resample(&cb, &mut rng)))
        .collect();
    let mean = boots.iter().sum::<f64>() / boots.len() as f64;
    let var = boots.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (boots.len() - 1) as f64;
    Ok((estimate, var.sqrt()))
}

/// Brute-force enumerations over all binary outcomes; exponential cost.
pub mod brute {
    use crate::error::{invalid, Result};

    fn combinations(m: usize, k: usize) -> Vec<u32> {
        (0u32..(1u32 << m)).filter(|s| s.count_ones() as usize == k).collect()
    }

    /// `chi^2(V_m || Q^{x m})` for `V_m = avg_S prod_{i in S} Bern(p) prod_{i not in S} Bern(q)`.
    pub fn chi2_vector_mixture(m: usize, k: usize, p: f64, q: f64) -> Result<f64> {
        if m > 20 || k == 0 || k > m {
            return Err(invalid(format!("brute force needs 1 <= k <= m <= 20, got m={m} k={k}")));
        }
        let subsets = combinations(m, k);
        let weight = 1.0 / subsets.len() as f64;
        let mut total = 0.0;
        for x in 0u32..(1u32 << m) {
            let ones = x.count_ones() as i32;
            let null = q.powi(ones) * (1.0 - q).powi(m as i32 - ones);
            let mut mix = 0.0;
            for &s in &subsets {
                let a = (s & x).count_ones() as i32;
                let b = k as i32 - a;
                let outside_ones = ones - a;
                let outside_zeros = (m - k) as i32 - outside_ones;
                mix += p.powi(a) * (1.0 - p).powi(b) * q.powi(outside_ones) * (1.0 - q).powi(outside_zeros);
            }
            mix *= weight;
            total += mix * mix / null;
        }
        Ok(total - 1.0)
    }

    /// `chi^2(M_n || Q^{x n x n})` for the symmetric planted Bernoulli
    /// submatrix mixture, enumerating all `2^{n^2}` matrices.
    pub fn chi2_matrix_mixture(n: usize, k: usize, p: f64, q: f64) -> Result<f64> {
        if n > 4 || k == 0 || k > n {
            return Err(invalid(format!("brute force needs 1 <= k <= n <= 4, got n={n} k={k}")));
        }
        let cells = n * n;
        let subsets = combinations(n, k);
        let masks: Vec<u32> = subsets
            .iter()
            .map(|&s| {
                let mut mask = 0u32;
                for i in 0..n {
                    for j in 0..n {
                        if s >> i & 1 == 1 && s >> j & 1 == 1 {
                            mask |= 1 << (i * n + j);
                        }
                    }
                }
                mask
            })
            .collect();
        let weight = 1.0 / masks.len() as f64;
        let planted_cells = (k * k) as i32;
        let mut total = 0.0;
        for x in 0u64..(1u64 << cells) {
            let x = x as u32;
            let ones = x.count_ones() as i32;
            let null = q.powi(ones) * (1.0 - q).powi(cells as i32 - ones);
            let mut mix = 0.0;
            for &mask in &masks {
                let a = (mask & x).count_ones() as i32;
                let outside_ones = ones - a;
                mix += p.powi(a)
                    * (1.0 - p).powi(planted_cells - a)
                    * q.powi(outside_ones)
                    * (1.0 - q).powi(cells as i32 - planted_cells - outside_ones);
            }
            mix *= weight;
            total += mix * mix / null;
        }
        Ok(total - 1.0)
    }
}
