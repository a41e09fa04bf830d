//! Numerical helpers: normal tails, exact discrete pmfs and the
//! goodness-of-fit statistics used by the verification suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `P[Z > x]` for a standard normal `Z`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn normalise_log_weights(lw: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(lw);
    lw.iter().map(|w| (w - z).exp()).collect()
}

/// `pmf[j] = P[Bin(n, p) = j]` for `j = 0..=n`.
pub fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    assert!((0.0..=1.0).contains(&p), "binomial probability {p} outside [0, 1]");
    let mut pmf = vec![0.0; n + 1];
    if p == 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p == 1.0 {
        pmf[n] = 1.0;
        return pmf;
    }
    let odds = p.ln() - (-p).ln_1p();
    let mut lw = vec![0.0; n + 1];
    for j in 0..n {
        lw[j + 1] = lw[j] + ((n - j) as f64).ln() - ((j + 1) as f64).ln() + odds;
    }
    normalise_log_weights(&lw)
}

/// Law of `|S cap T|` for independent uniform `k`-subsets of `[n]`,
/// returned as `(h_min, pmf)` with `pmf[i] = P[H = h_min + i]`.
pub fn hypergeometric_overlap_pmf(n: usize, k: usize) -> (usize, Vec<f64>) {
    assert!(k <= n, "subset size {k} exceeds population {n}");
    let h_min = (2 * k).saturating_sub(n);
    let h_max = k;
    let mut lw = vec![0.0; h_max - h_min + 1];
    for h in h_min..h_max {
        let i = h - h_min;
        let ratio = ((k - h) as f64).powi(2) / ((h + 1) as f64 * (n + h + 1 - 2 * k) as f64);
        lw[i + 1] = lw[i] + ratio.ln();
    }
    (h_min, normalise_log_weights(&lw))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0_f64);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let en = ((na * nb) as f64 / (na + nb) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    (d, kolmogorov_sf(lambda))
}

/// `P[K > lambda]` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson goodness-of-fit p-value of `observed` counts against cell
/// probabilities `expected`; cells with zero expectation must be empty.
pub fn chi2_gof_pvalue(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * total as f64;
        if e <= 0.0 {
            if o > 0 {
                return 0.0;
            }
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    chi2_sf(stat, cells.saturating_sub(1))
}

/// Pearson homogeneity p-value for two count vectors over the same cells.
pub fn chi2_two_sample_pvalue(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let pooled = (x + y) as f64;
        if pooled == 0.0 {
            continue;
        }
        let ea = pooled * na / (na + nb);
        let eb = pooled * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
        cells += 1;
    }
    chi2_sf(stat, cells.saturating_sub(1))
}

fn chi2_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(stat)
}
