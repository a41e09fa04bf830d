//! Graph cloning: split one graph into `t` graphs whose edges are
//! independent across copies, with edge densities moved from `(p, q)`
//! to `(P, Q)`.

use rand::Rng;

use crate::error::{hypothesis, invalid, Result};
use crate::oracle::FiniteLaw;
use crate::rng::uniform_subset;
use crate::sampler::GraphSample;
use crate::stats::ln_choose;

/// Per-edge channel. `r0[w]` and `r1[w]` are the probabilities of one
/// specific output vector of Hamming weight `w` given input bit 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CloneChannel {
    t: usize,
    p: f64,
    q: f64,
    big_p: f64,
    big_q: f64,
    r0: Vec<f64>,
    r1: Vec<f64>,
    weight_pmf0: Vec<f64>,
    weight_pmf1: Vec<f64>,
}

const FEASIBILITY_SLACK: f64 = 1e-12;
const MIXING_TOLERANCE: f64 = 1e-12;

fn pow_weight(a: f64, w: usize, t: usize) -> f64 {
    a.powi(w as i32) * (1.0 - a).powi((t - w) as i32)
}

impl CloneChannel {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn source(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn target(&self) -> (f64, f64) {
        (self.big_p, self.big_q)
    }

    pub fn r0(&self, w: usize) -> f64 {
        self.r0[w]
    }

    pub fn r1(&self, w: usize) -> f64 {
        self.r1[w]
    }

    /// Largest violation of `(1-p) r0 + p r1 = P^w (1-P)^{t-w}` and
    /// `(1-q) r0 + q r1 = Q^w (1-Q)^{t-w}` over all weights.
    pub fn mixing_residual(&self) -> f64 {
        (0..=self.t)
            .map(|w| {
                let a = ((1.0 - self.p) * self.r0[w] + self.p * self.r1[w] - pow_weight(self.big_p, w, self.t)).abs();
                let b = ((1.0 - self.q) * self.r0[w] + self.q * self.r1[w] - pow_weight(self.big_q, w, self.t)).abs();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    /// Exact law of the output vector (bit `i` of the key is copy `i`) when
    /// the input bit is `Bern(prob)`.
    pub fn output_law(&self, prob: f64) -> Result<FiniteLaw<u32>> {
        if self.t > 20 {
            return Err(invalid("exact clone laws need t <= 20"));
        }
        FiniteLaw::new(
            (0..1u32 << self.t)
                .map(|m| {
                    let w = m.count_ones() as usize;
                    (m, prob * self.r1[w] + (1.0 - prob) * self.r0[w])
                })
                .collect(),
        )
    }

    /// One output vector for input bit `bit`.
    pub fn sample<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Vec<bool> {
        let pmf = if bit { &self.weight_pmf1 } else { &self.weight_pmf0 };
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut w = self.t;
        for (i, &v) in pmf.iter().enumerate() {
            acc += v;
            if u < acc {
                w = i;
                break;
            }
        }
        while pmf[w] == 0.0 && w > 0 {
            w -= 1;
        }
        let mut out = vec![false; self.t];
        for i in uniform_subset(self.t, w, rng) {
            out[i] = true;
        }
        out
    }
}

/// Builds the channel for `0 < q < p <= 1`, `0 < Q < P <= 1`, requiring
/// `(1-p)/(1-q) <= ((1-P)/(1-Q))^t` and `(P/Q)^t <= p/q`.
pub fn make_channel(t: usize, p: f64, q: f64, big_p: f64, big_q: f64) -> Result<CloneChannel> {
    if t == 0 {
        return Err(invalid("clone count t must be positive"));
    }
    if !(q > 0.0 && q < p && p <= 1.0) {
        return Err(invalid(format!("source needs 0 < q < p <= 1, got p={p} q={q}")));
    }
    if !(big_q > 0.0 && big_q < big_p && big_p <= 1.0) {
        return Err(invalid(format!("target needs 0 < Q < P <= 1, got P={big_p} Q={big_q}")));
    }
    let tf = t as f64;
    let lower = (-p).ln_1p() - (-q).ln_1p();
    let upper = (p / q).ln();
    let mid_low = tf * ((-big_p).ln_1p() - (-big_q).ln_1p());
    let mid_high = tf * (big_p / big_q).ln();
    if lower > mid_low + FEASIBILITY_SLACK || mid_high > upper + FEASIBILITY_SLACK {
        return Err(hypothesis(format!(
            "clone feasibility fails: need (1-p)/(1-q) <= ((1-P)/(1-Q))^t and (P/Q)^t <= p/q \
             for t={t}, p={p}, q={q}, P={big_p}, Q={big_q}"
        )));
    }
    let mut r0 = Vec::with_capacity(t + 1);
    let mut r1 = Vec::with_capacity(t + 1);
    for w in 0..=t {
        let pp = pow_weight(big_p, w, t);
        let qq = pow_weight(big_q, w, t);
        let v1 = ((1.0 - q) * pp - (1.0 - p) * qq) / (p - q);
        let v0 = (p * qq - q * pp) / (p - q);
        for (name, v) in [("r1", v1), ("r0", v0)] {
            if v < -FEASIBILITY_SLACK {
                return Err(hypothesis(format!("{name}({w}) = {v} is negative")));
            }
        }
        r1.push(v1.max(0.0));
        r0.push(v0.max(0.0));
    }
    let weight_pmf = |r: &[f64]| -> Vec<f64> {
        let raw: Vec<f64> = (0..=t).map(|w| (ln_choose(t as u64, w as u64)).exp() * r[w]).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    };
    let channel = CloneChannel {
        t,
        p,
        q,
        big_p,
        big_q,
        weight_pmf0: weight_pmf(&r0),
        weight_pmf1: weight_pmf(&r1),
        r0,
        r1,
    };
    let residual = channel.mixing_residual();
    if residual > MIXING_TOLERANCE {
        return Err(hypothesis(format!("mixing identities violated by {residual}")));
    }
    Ok(channel)
}

/// Applies the channel independently to every vertex pair of `g`.
/// Each clone inherits the planted set of `g`.
pub fn clone_graph<R: Rng + ?Sized>(g: &GraphSample, channel: &CloneChannel, rng: &mut R) -> Vec<GraphSample> {
    let n = g.n();
    let mut out: Vec<GraphSample> = (0..channel.t)
        .map(|_| {
            let mut c = GraphSample::empty(n);
            c.planted = g.planted.clone();
            c
        })
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let bits = channel.sample(g.has_edge(i, j), rng);
            for (c, b) in out.iter_mut().zip(bits) {
                if b {
                    c.set_edge(i, j, true);
                }
            }
        }
    }
    out
}

/// Middle density used by the two-way clone of the reduction:
/// `Q = 1 - sqrt((1-p)(1-q)) + 1[p = 1](sqrt(q) - 1)`.
pub fn q_mid(p: f64, q: f64) -> f64 {
    let base = 1.0 - ((1.0 - p) * (1.0 - q)).sqrt();
    if p == 1.0 {
        base + q.sqrt() - 1.0
    } else {
        base
    }
}
