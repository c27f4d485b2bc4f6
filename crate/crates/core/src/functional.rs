//! Functional PCA of curve ensembles on a shared distance grid.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::DistanceGrid;

pub const DEFAULT_VAR_TARGET: f64 = 0.90;
pub const DEFAULT_MIN_COMPONENTS: usize = 2;

/// Curves of several images on one grid. Entries may be NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEnsemble {
    rgrid: DistanceGrid,
    curves: Vec<Vec<f64>>,
}

impl CurveEnsemble {
    pub fn new(rgrid: DistanceGrid, curves: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(c) = curves.iter().find(|c| c.len() != rgrid.count()) {
            return Err(Error::GridMismatch(format!("curve of length {} on a grid of {}", c.len(), rgrid.count())));
        }
        Ok(Self { rgrid, curves })
    }

    pub fn rgrid(&self) -> &DistanceGrid {
        &self.rgrid
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FpcaOptions {
    pub var_target: f64,
    /// Retain at least this many components when the grid allows it.
    pub min_components: usize,
}

impl Default for FpcaOptions {
    fn default() -> Self {
        Self { var_target: DEFAULT_VAR_TARGET, min_components: DEFAULT_MIN_COMPONENTS }
    }
}

/// Decomposition restricted to the grid columns defined in every curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaResult {
    /// Indices into the original grid of the columns used.
    pub columns: Vec<usize>,
    /// Grid values of those columns.
    pub r: Vec<f64>,
    /// Trapezoidal quadrature weights on `r`.
    pub weights: Vec<f64>,
    pub mean_curve: Vec<f64>,
    /// All eigenvalues, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Cumulative variance fractions, one per eigenvalue.
    pub variance_explained: Vec<f64>,
    pub n_retained: usize,
    /// The first `n_retained` eigenfunctions on `r`.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// `scores[i][j]`: projection of centred curve `i` on eigenfunction `j`.
    pub scores: Vec<Vec<f64>>,
}

impl FpcaResult {
    /// Scores of an arbitrary curve on the original grid.
    pub fn project(&self, curve: &[f64]) -> Vec<f64> {
        self.eigenfunctions
            .iter()
            .map(|phi| {
                self.columns
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| self.weights[k] * (curve[c] - self.mean_curve[k]) * phi[k])
                    .sum()
            })
            .collect()
    }

    /// Weighted inner product on the used grid.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }
}

fn trapezoid_weights(r: &[f64]) -> Vec<f64> {
    let m = r.len();
    (0..m)
        .map(|k| {
            let lo = if k == 0 { r[0] } else { r[k - 1] };
            let hi = if k + 1 == m { r[m - 1] } else { r[k + 1] };
            0.5 * (hi - lo)
        })
        .collect()
}

/// Spectrum of `A^T A / (n - 1)`, sorted nonincreasing. Uses the `n x n`
/// Gram matrix when it is the smaller side.
struct Spectrum {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    dual: bool,
}

fn covariance_spectrum(a: &DMatrix<f64>) -> Spectrum {
    let (n, m) = a.shape();
    let scale = 1.0 / (n as f64 - 1.0);
    let dual = m > n;
    let e = if dual {
        SymmetricEigen::new(a * a.transpose() * scale)
    } else {
        SymmetricEigen::new(a.transpose() * a * scale)
    };
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[j].total_cmp(&e.eigenvalues[i]).then(i.cmp(&j)));
    let mut values: Vec<f64> = order.iter().map(|&i| e.eigenvalues[i].max(0.0)).collect();
    let vectors = order.iter().map(|&i| e.eigenvectors.column(i).iter().copied().collect()).collect();
    values.resize(m, 0.0);
    Spectrum { values, vectors, dual }
}

/// The first `want` unit eigenvectors in grid space.
fn grid_eigenvectors(a: &DMatrix<f64>, spec: &Spectrum, want: usize) -> Vec<Vec<f64>> {
    if !spec.dual {
        return spec.vectors[..want].to_vec();
    }
    let (n, m) = a.shape();
    let top = spec.values.first().copied().unwrap_or(0.0);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(want);
    for (lambda, v) in spec.values.iter().zip(&spec.vectors).take(want) {
        if *lambda <= top * 1e-12 || *lambda <= 0.0 {
            break;
        }
        let u = a.transpose() * nalgebra::DVector::from_column_slice(v);
        let norm = (*lambda * (n as f64 - 1.0)).sqrt();
        vecs.push(u.iter().map(|x| x / norm).collect());
    }
    // Null directions: complete the basis deterministically.
    let mut e = 0;
    while vecs.len() < want && e < m {
        let mut u = vec![0.0; m];
        u[e] = 1.0;
        for v in &vecs {
            let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
            u.iter_mut().zip(v).for_each(|(x, y)| *x -= d * y);
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            vecs.push(u.iter().map(|x| x / norm).collect());
        }
        e += 1;
    }
    vecs
}

/// FPCA with the default minimum of two components.
pub fn fpca(ensemble: &CurveEnsemble, var_target: f64) -> Result<FpcaResult> {
    fpca_with(ensemble, &FpcaOptions { var_target, ..FpcaOptions::default() })
}

pub fn fpca_with(ensemble: &CurveEnsemble, opts: &FpcaOptions) -> Result<FpcaResult> {
    let n = ensemble.len();
    if n < 2 {
        return Err(Error::TooFewCurves(n));
    }
    if !(opts.var_target > 0.0 && opts.var_target <= 1.0) {
        return Err(Error::BadConfig(format!("variance target {} outside (0, 1]", opts.var_target)));
    }
    let columns: Vec<usize> =
        (0..ensemble.rgrid.count()).filter(|&k| ensemble.curves.iter().all(|c| c[k].is_finite())).collect();
    let m = columns.len();
    if m < 3 {
        return Err(Error::DegenerateGrid(m));
    }
    let r: Vec<f64> = columns.iter().map(|&k| ensemble.rgrid.values()[k]).collect();
    let weights = trapezoid_weights(&r);
    let mean_curve: Vec<f64> =
        columns.iter().map(|&k| ensemble.curves.iter().map(|c| c[k]).sum::<f64>() / n as f64).collect();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let a = DMatrix::from_fn(n, m, |i, k| (ensemble.curves[i][columns[k]] - mean_curve[k]) * sqrt_w[k]);

    let spectrum = covariance_spectrum(&a);
    let eigenvalues = spectrum.values.clone();
    let total: f64 = eigenvalues.iter().sum();
    let mut acc = 0.0;
    let variance_explained: Vec<f64> = eigenvalues
        .iter()
        .map(|l| {
            acc += l;
            if total > 0.0 {
                (acc / total).min(1.0)
            } else {
                1.0
            }
        })
        .collect();
    let reach = variance_explained.iter().position(|&v| v >= opts.var_target - 1e-12).map_or(m, |p| p + 1);
    let n_retained = reach.max(opts.min_components).min(m).max(1);
    let vecs = grid_eigenvectors(&a, &spectrum, n_retained);

    let eigenfunctions: Vec<Vec<f64>> = vecs
        .iter()
        .map(|u| {
            let mut phi: Vec<f64> = u.iter().zip(&sqrt_w).map(|(x, s)| if *s > 0.0 { x / s } else { 0.0 }).collect();
            let lead = phi.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
            if lead < 0.0 {
                phi.iter_mut().for_each(|v| *v = -*v);
            }
            phi
        })
        .collect();
    let mut out = FpcaResult {
        columns,
        r,
        weights,
        mean_curve,
        eigenvalues,
        variance_explained,
        n_retained,
        eigenfunctions,
        scores: Vec::new(),
    };
    out.scores = ensemble.curves.iter().map(|c| out.project(c)).collect();
    Ok(out)
}

/// `<stat>.PC1 .. <stat>.PCk` score features, one map per curve.
pub fn score_named_features(stat_name: &str, result: &FpcaResult) -> Vec<Vec<(String, f64)>> {
    result
        .scores
        .iter()
        .map(|row| row.iter().enumerate().map(|(j, s)| (format!("{stat_name}.PC{}", j + 1), *s)).collect())
        .collect()
}
