//! Quadrat tessellation, spatial autocorrelation and count-vector similarity indices.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::pattern::{ObservationWindow, Point};
use crate::summaries::nearest_neighbor_distances;

pub const DEFAULT_Q: usize = 20;
pub const MAX_Q: usize = 64;

/// `q x q` cell counts, row-major with the row index running along y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratGrid {
    q: usize,
    counts: Vec<f64>,
    window: ObservationWindow,
}

impl QuadratGrid {
    /// Grid from explicit row-major counts.
    pub fn from_counts(q: usize, counts: Vec<f64>, window: ObservationWindow) -> Result<Self> {
        if q < 2 {
            return Err(Error::BadQ(q));
        }
        if counts.len() != q * q {
            return Err(Error::LengthMismatch(counts.len(), q * q));
        }
        Ok(Self { q, counts, window })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_quadrats(&self) -> usize {
        self.q * self.q
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

fn cell_of(v: f64, lo: f64, step: f64, q: usize) -> usize {
    (((v - lo) / step).floor().max(0.0) as usize).min(q - 1)
}

/// Count points per quadrat. Points on an internal gridline go to the
/// higher-index quadrat; points outside the window are ignored.
pub fn quadrat_counts(points: &[Point], window: &ObservationWindow, q: usize) -> Result<QuadratGrid> {
    if q < 2 {
        return Err(Error::BadQ(q));
    }
    let (dx, dy) = (window.width() / q as f64, window.height() / q as f64);
    let mut counts = vec![0.0; q * q];
    for p in points.iter().filter(|p| window.contains(p)) {
        let col = cell_of(p.x, window.x_min(), dx, q);
        let row = cell_of(p.y, window.y_min(), dy, q);
        counts[row * q + col] += 1.0;
    }
    Ok(QuadratGrid { q, counts, window: window.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Contiguity {
    Rook,
    #[default]
    Queen,
}

/// Binary symmetric adjacency between quadrats, stored as neighbour lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    scheme: Contiguity,
    q: usize,
    neighbors: Vec<Vec<usize>>,
    s0: f64,
}

impl SpatialWeights {
    pub fn scheme(&self) -> Contiguity {
        self.scheme
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Sorted neighbour indices of quadrat `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if self.neighbors[i].binary_search(&j).is_ok() {
            1.0
        } else {
            0.0
        }
    }

    /// Total weight `sum_i sum_j w_ij`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Number of undirected adjacency edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_weights(q: usize, scheme: Contiguity) -> Result<SpatialWeights> {
    if q < 2 {
        return Err(Error::BadQ(q));
    }
    let offsets: &[(i64, i64)] = match scheme {
        Contiguity::Rook => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
        Contiguity::Queen => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
    };
    let qi = q as i64;
    let mut neighbors = Vec::with_capacity(q * q);
    for row in 0..qi {
        for col in 0..qi {
            let mut nb: Vec<usize> = offsets
                .iter()
                .map(|(dr, dc)| (row + dr, col + dc))
                .filter(|&(r, c)| (0..qi).contains(&r) && (0..qi).contains(&c))
                .map(|(r, c)| (r * qi + c) as usize)
                .collect();
            nb.sort_unstable();
            neighbors.push(nb);
        }
    }
    let s0 = neighbors.iter().map(Vec::len).sum::<usize>() as f64;
    Ok(SpatialWeights { scheme, q, neighbors, s0 })
}

fn check_grid(grid: &QuadratGrid, w: &SpatialWeights) -> Result<()> {
    if grid.q != w.q {
        return Err(Error::GridMismatch(format!("quadrat grid q = {} but weights q = {}", grid.q, w.q)));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn centred_ss(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Global Moran's I.
pub fn morans_i(grid: &QuadratGrid, w: &SpatialWeights) -> Result<f64> {
    check_grid(grid, w)?;
    let x = &grid.counts;
    let m = mean(x);
    let ss = centred_ss(x, m);
    if ss == 0.0 {
        return Err(Error::ConstantField);
    }
    let cross: f64 = (0..x.len()).map(|i| (x[i] - m) * w.neighbors[i].iter().map(|&j| x[j] - m).sum::<f64>()).sum();
    Ok(x.len() as f64 / w.s0 * cross / ss)
}

/// Global Geary's C.
pub fn gearys_c(grid: &QuadratGrid, w: &SpatialWeights) -> Result<f64> {
    check_grid(grid, w)?;
    let x = &grid.counts;
    let ss = centred_ss(x, mean(x));
    if ss == 0.0 {
        return Err(Error::ConstantField);
    }
    let diff: f64 =
        (0..x.len()).map(|i| w.neighbors[i].iter().map(|&j| (x[i] - x[j]) * (x[i] - x[j])).sum::<f64>()).sum();
    Ok((x.len() as f64 - 1.0) * diff / (2.0 * w.s0 * ss))
}

fn lag(x: &[f64], w: &SpatialWeights) -> Vec<f64> {
    (0..x.len()).map(|i| w.neighbors[i].iter().map(|&j| x[j]).sum()).collect()
}

/// Lee's L with lagged fields `x~_i = sum_j w_ij x_j`, centred on the raw-field
/// means and scaled by `N / sum_i (sum_j w_ij)^2`.
pub fn lees_l(grid_p: &QuadratGrid, grid_q: &QuadratGrid, w: &SpatialWeights) -> Result<f64> {
    check_grid(grid_p, w)?;
    check_grid(grid_q, w)?;
    let (x, y) = (&grid_p.counts, &grid_q.counts);
    let (mx, my) = (mean(x), mean(y));
    let (lx, ly) = (lag(x, w), lag(y, w));
    let sxx = centred_ss(&lx, mx);
    let syy = centred_ss(&ly, my);
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantField);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let row_sq: f64 = w.neighbors.iter().map(|nb| (nb.len() * nb.len()) as f64).sum();
    Ok(x.len() as f64 / row_sq * sxy / (sxx.sqrt() * syy.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratTestResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_upper: f64,
}

/// Pearson chi-squared test of equal expected counts, upper-tail p-value.
pub fn quadrat_test(grid: &QuadratGrid) -> Result<QuadratTestResult> {
    let total = grid.total();
    if total <= 0.0 {
        return Err(Error::EmptyGrid);
    }
    let n = grid.n_quadrats();
    let e = total / n as f64;
    let statistic: f64 = grid.counts.iter().map(|o| (o - e) * (o - e) / e).sum();
    let dof = n - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::BadConfig(e.to_string()))?;
    let p_upper = if statistic == 0.0 { 1.0 } else { chi.sf(statistic).clamp(0.0, 1.0) };
    Ok(QuadratTestResult { statistic, dof, p_upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoinCounts {
    pub j_pp: f64,
    pub j_pq: f64,
    pub j_qq: f64,
}

impl JoinCounts {
    pub fn total(&self) -> f64 {
        self.j_pp + self.j_pq + self.j_qq
    }
}

/// Join counts on presence `b_i = counts[i] >= threshold`.
pub fn join_counts(grid: &QuadratGrid, w: &SpatialWeights, presence_threshold: f64) -> Result<JoinCounts> {
    check_grid(grid, w)?;
    let b: Vec<bool> = grid.counts.iter().map(|&c| c >= presence_threshold).collect();
    join_counts_binary(&b, None, w)
}

/// Join counts for a binary map, optionally restricted to the subgraph of
/// quadrats where `mask` is true.
pub fn join_counts_binary(b: &[bool], mask: Option<&[bool]>, w: &SpatialWeights) -> Result<JoinCounts> {
    if b.len() != w.len() {
        return Err(Error::LengthMismatch(b.len(), w.len()));
    }
    if let Some(m) = mask {
        if m.len() != b.len() {
            return Err(Error::LengthMismatch(m.len(), b.len()));
        }
    }
    let keep = |i: usize| mask.is_none_or(|m| m[i]);
    let mut jc = JoinCounts { j_pp: 0.0, j_pq: 0.0, j_qq: 0.0 };
    for i in (0..b.len()).filter(|&i| keep(i)) {
        for &j in w.neighbors[i].iter().filter(|&&j| j > i && keep(j)) {
            match (b[i], b[j]) {
                (true, true) => jc.j_pp += 1.0,
                (false, false) => jc.j_qq += 1.0,
                _ => jc.j_pq += 1.0,
            }
        }
    }
    Ok(jc)
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// `(<p,q>, |p|^2, |q|^2)` over indices where either vector is positive.
fn inner_products(vp: &[f64], vq: &[f64]) -> (f64, f64, f64) {
    vp.iter().zip(vq).filter(|(a, b)| **a + **b > 0.0).fold((0.0, 0.0, 0.0), |(pq, pp, qq), (a, b)| {
        (pq + a * b, pp + a * a, qq + b * b)
    })
}

/// Tanimoto coefficient (generalised Jaccard).
pub fn tanimoto(vp: &[f64], vq: &[f64]) -> Result<f64> {
    check_len(vp, vq)?;
    let (pq, pp, qq) = inner_products(vp, vq);
    if pp + qq == 0.0 {
        return Err(Error::BothEmpty);
    }
    Ok(pq / (pp + qq - pq))
}

/// Alias of [`tanimoto`], exported under the name `Jaccard`.
pub fn jaccard(vp: &[f64], vq: &[f64]) -> Result<f64> {
    tanimoto(vp, vq)
}

/// Vector Dice-Sorensen coefficient.
pub fn dice_sorensen(vp: &[f64], vq: &[f64]) -> Result<f64> {
    check_len(vp, vq)?;
    let (pq, pp, qq) = inner_products(vp, vq);
    if pp + qq == 0.0 {
        return Err(Error::BothEmpty);
    }
    Ok(2.0 * pq / (pp + qq))
}

fn proportions(v: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    Ok(v.iter().map(|x| x / total).collect())
}

/// Morisita-Horn overlap of the total-normalised vectors.
pub fn morisita_horn(vp: &[f64], vq: &[f64]) -> Result<f64> {
    check_len(vp, vq)?;
    let (p, q) = (proportions(vp)?, proportions(vq)?);
    let (pq, pp, qq) = inner_products(&p, &q);
    Ok(2.0 * pq / (pp + qq))
}

/// Bhattacharyya coefficient of the total-normalised vectors.
pub fn bhattacharyya(vp: &[f64], vq: &[f64]) -> Result<f64> {
    check_len(vp, vq)?;
    let (p, q) = (proportions(vp)?, proportions(vq)?);
    Ok(p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum())
}

pub fn cosine_similarity(vp: &[f64], vq: &[f64]) -> Result<f64> {
    check_len(vp, vq)?;
    let (pq, pp, qq) = inner_products(vp, vq);
    if pp == 0.0 || qq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(pq / (pp.sqrt() * qq.sqrt()))
}

/// Clark-Evans ratio `mean NN distance / (1 / (2 sqrt(lambda)))`, no edge correction.
pub fn clark_evans(points: &[Point], window: &ObservationWindow) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let d = nearest_neighbor_distances(points);
    let observed = d.iter().sum::<f64>() / d.len() as f64;
    let lambda = points.len() as f64 / window.area();
    Ok(observed * 2.0 * lambda.sqrt())
}
