//! Random graphs and matrices: Erdos-Renyi graphs, planted dense
//! subgraphs and planted submatrices over a grid of computable pairs.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::pairs::{ComputablePair, PairGrid, Space};
use crate::rng::uniform_subset;

/// Undirected simple graph stored as its strict upper triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSample {
    n: usize,
    edges: Vec<bool>,
    /// Sorted vertex set of the planted subgraph, when there is one.
    pub planted: Option<Vec<usize>>,
}

impl GraphSample {
    pub fn empty(n: usize) -> Self {
        Self { n, edges: vec![false; n * n.saturating_sub(1) / 2], planted: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(a != b && b < self.n);
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// Adjacency; the diagonal is always empty.
    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges[self.index(i, j)]
    }

    #[inline]
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not representable");
        let idx = self.index(i, j);
        self.edges[idx] = present;
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Upper-triangle bits in row-major order of pairs `i < j`.
    pub fn upper_triangle(&self) -> &[bool] {
        &self.edges
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Bits(Vec<bool>),
    Reals(Vec<f64>),
}

/// Square matrix of samples with optional planted row and column sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    d: usize,
    entries: Entries,
    pub planted_rows: Option<Vec<usize>>,
    pub planted_cols: Option<Vec<usize>>,
}

impl MatrixSample {
    pub fn from_entries(d: usize, entries: Entries) -> Result<Self> {
        let len = match &entries {
            Entries::Bits(v) => v.len(),
            Entries::Reals(v) => v.len(),
        };
        if len != d * d {
            return Err(invalid(format!("expected {} entries for d={d}, got {len}", d * d)));
        }
        Ok(Self { d, entries, planted_rows: None, planted_cols: None })
    }

    /// Builds a matrix from row-major values, packing bits when `space` is binary.
    pub fn from_values(d: usize, space: Space, values: Vec<f64>) -> Result<Self> {
        let entries = match space {
            Space::Bit => Entries::Bits(values.iter().map(|&v| v == 1.0).collect()),
            Space::Real => Entries::Reals(values),
        };
        Self::from_entries(d, entries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn space(&self) -> Space {
        match self.entries {
            Entries::Bits(_) => Space::Bit,
            Entries::Reals(_) => Space::Real,
        }
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        let idx = i * self.d + j;
        match &self.entries {
            Entries::Bits(v) => f64::from(u8::from(v[idx])),
            Entries::Reals(v) => v[idx],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match &self.entries {
            Entries::Bits(v) => v.iter().map(|&b| f64::from(u8::from(b))).collect(),
            Entries::Reals(v) => v.clone(),
        }
    }

    pub fn with_planted(mut self, rows: Vec<usize>, cols: Vec<usize>) -> Self {
        self.planted_rows = Some(rows);
        self.planted_cols = Some(cols);
        self
    }
}

fn check_edge_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{name}={p} is not a probability")));
    }
    Ok(())
}

/// `G(n, q)`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<GraphSample> {
    check_edge_prob("q", q)?;
    let mut g = GraphSample::empty(n);
    for e in g.edges.iter_mut() {
        *e = rng.random::<f64>() < q;
    }
    Ok(g)
}

/// `G(n, k, p, q)`: a uniform `k`-set whose internal edges appear with
/// probability `p` inside `G(n, q)`.
pub fn sample_pds<R: Rng + ?Sized>(n: usize, k: usize, p: f64, q: f64, rng: &mut R) -> Result<GraphSample> {
    check_edge_prob("p", p)?;
    check_edge_prob("q", q)?;
    if !(q < p) {
        return Err(invalid(format!("planted density p={p} must exceed q={q}")));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("planted size k={k} must lie in [1, {n}]")));
    }
    let planted = uniform_subset(n, k, rng);
    let mut inside = vec![false; n];
    for &v in &planted {
        inside[v] = true;
    }
    let mut g = GraphSample::empty(n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = if inside[i] && inside[j] { p } else { q };
            g.edges[idx] = rng.random::<f64>() < prob;
            idx += 1;
        }
    }
    g.planted = Some(planted);
    Ok(g)
}

fn check_planted_size(d: usize, k: Option<usize>) -> Result<()> {
    if let Some(k) = k {
        if k == 0 || k > d {
            return Err(invalid(format!("planted size k={k} must lie in [1, {d}]")));
        }
    }
    Ok(())
}

fn fill_matrix<R: Rng + ?Sized>(
    grid: &PairGrid,
    rows: &[bool],
    cols: &[bool],
    rng: &mut R,
) -> Result<MatrixSample> {
    let d = grid.d();
    let mut values = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            values.push(grid.get(i, j).sample(rows[i] && cols[j], rng));
        }
    }
    MatrixSample::from_values(d, grid.space(), values)
}

fn mask(d: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; d];
    for &i in set {
        m[i] = true;
    }
    m
}

/// Symmetric ensemble: entry `(i, j)` is drawn from `P_ij` when both
/// `i` and `j` lie in one uniform `k`-set, otherwise from `Q_ij`.
/// `k = None` gives the pure null matrix.
pub fn sample_submatrix<R: Rng + ?Sized>(
    d: usize,
    k: Option<usize>,
    grid: &PairGrid,
    rng: &mut R,
) -> Result<MatrixSample> {
    if grid.d() != d {
        return Err(invalid(format!("grid dimension {} differs from d={d}", grid.d())));
    }
    check_planted_size(d, k)?;
    match k {
        None => fill_matrix(grid, &vec![false; d], &vec![false; d], rng),
        Some(k) => {
            let s = uniform_subset(d, k, rng);
            let m = mask(d, &s);
            Ok(fill_matrix(grid, &m, &m, rng)?.with_planted(s.clone(), s))
        }
    }
}

/// Asymmetric ensemble: independent uniform row and column `k`-sets.
pub fn sample_submatrix_asd<R: Rng + ?Sized>(
    d: usize,
    k: Option<usize>,
    grid: &PairGrid,
    rng: &mut R,
) -> Result<MatrixSample> {
    if grid.d() != d {
        return Err(invalid(format!("grid dimension {} differs from d={d}", grid.d())));
    }
    check_planted_size(d, k)?;
    match k {
        None => fill_matrix(grid, &vec![false; d], &vec![false; d], rng),
        Some(k) => {
            let s = uniform_subset(d, k, rng);
            let t = uniform_subset(d, k, rng);
            Ok(fill_matrix(grid, &mask(d, &s), &mask(d, &t), rng)?.with_planted(s, t))
        }
    }
}

/// Vector of length `m` with coordinates in `s` drawn from `P` and the
/// rest from `Q`.
pub fn sample_planted_vector<R: Rng + ?Sized>(
    m: usize,
    pair: &ComputablePair,
    s: &[usize],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if let Some(&bad) = s.iter().find(|&&i| i >= m) {
        return Err(invalid(format!("index {bad} outside [0, {m})")));
    }
    let m_mask = mask(m, s);
    Ok(m_mask.iter().map(|&inside| pair.sample(inside, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn er_extremes() {
        let mut rng = stream_rng(3, &[]);
        assert_eq!(sample_er(10, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_er(10, 1.0, &mut rng).unwrap().edge_count(), 45);
        assert!(sample_er(10, 1.5, &mut rng).is_err());
    }

    #[test]
    fn clique_is_complete_on_planted_set() {
        let mut rng = stream_rng(4, &[]);
        let g = sample_pds(30, 6, 1.0, 0.2, &mut rng).unwrap();
        let s = g.planted.clone().unwrap();
        assert_eq!(s.len(), 6);
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                assert!(g.has_edge(i, j) && g.has_edge(j, i));
            }
        }
        assert!(sample_pds(30, 0, 1.0, 0.2, &mut rng).is_err());
        assert!(sample_pds(30, 31, 1.0, 0.2, &mut rng).is_err());
        assert!(sample_pds(30, 5, 0.2, 0.2, &mut rng).is_err());
    }

    #[test]
    fn edge_indexing_is_a_bijection() {
        let mut g = GraphSample::empty(7);
        let mut seen = std::collections::HashSet::new();
        for i in 0..7 {
            for j in (i + 1)..7 {
                assert!(seen.insert(g.index(i, j)));
                assert_eq!(g.index(i, j), g.index(j, i));
            }
        }
        g.set_edge(6, 2, true);
        assert!(g.has_edge(2, 6));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn submatrix_null_and_planted() {
        let mut rng = stream_rng(5, &[]);
        let pair = ComputablePair::bernoulli(1.0, 0.0001).unwrap();
        let grid = PairGrid::homogeneous(8, pair).unwrap();
        let m = sample_submatrix(8, Some(3), &grid, &mut rng).unwrap();
        let s = m.planted_rows.clone().unwrap();
        for &i in &s {
            for &j in &s {
                assert_eq!(m.value(i, j), 1.0);
            }
        }
        let null = sample_submatrix(8, None, &grid, &mut rng).unwrap();
        assert!(null.planted_rows.is_none());
        assert!(sample_submatrix(8, Some(9), &grid, &mut rng).is_err());
        assert!(sample_submatrix(7, Some(2), &grid, &mut rng).is_err());
    }

    #[test]
    fn planted_vector_respects_support() {
        let mut rng = stream_rng(6, &[]);
        let pair = ComputablePair::bernoulli(1.0, 1e-9).unwrap();
        let v = sample_planted_vector(10, &pair, &[1, 4], &mut rng).unwrap();
        assert_eq!(v.iter().sum::<f64>(), 2.0);
        assert_eq!(v[1] + v[4], 2.0);
        assert!(sample_planted_vector(3, &pair, &[3], &mut rng).is_err());
    }
}
