//! Python bindings: point patterns, summary curves, areal indices,
//! witness persistence, FPCA and full feature extraction.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sashimi_core::areal::{self, Contiguity, QuadratGrid};
use sashimi_core::functional::{fpca_with, CurveEnsemble, FpcaOptions};
use sashimi_core::pipeline::{extract_features, AnalysisConfig};
use sashimi_core::summaries::{self, EdgeCorrection, SummaryCurve, DEFAULT_PCF_BANDWIDTH};
use sashimi_core::topology::{witness_persistence as witness, WitnessConfig, DEFAULT_LANDMARK_CAP};
use sashimi_core::{CellType, DistanceGrid, Error, MarkedPointPattern, ObservationWindow, Point};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn label(s: &str) -> PyResult<CellType> {
    CellType::new(s).map_err(err)
}

fn points(xy: &[(f64, f64)]) -> Vec<Point> {
    xy.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

fn correction(name: &str) -> PyResult<EdgeCorrection> {
    serde_json::from_value(serde_json::Value::String(name.to_lowercase()))
        .map_err(|_| PyValueError::new_err(format!("unknown correction {name:?}")))
}

fn contiguity(name: &str) -> PyResult<Contiguity> {
    serde_json::from_value(serde_json::Value::String(name.to_lowercase()))
        .map_err(|_| PyValueError::new_err(format!("unknown contiguity {name:?}")))
}

/// Planar points with one cell-type label each.
#[pyclass(name = "Pattern", frozen)]
struct PyPattern {
    inner: MarkedPointPattern,
}

#[pymethods]
impl PyPattern {
    /// `window` is `(x_min, x_max, y_min, y_max)`; inferred from the points when omitted.
    #[new]
    #[pyo3(signature = (x, y, types, window=None))]
    fn new(x: Vec<f64>, y: Vec<f64>, types: Vec<String>, window: Option<(f64, f64, f64, f64)>) -> PyResult<Self> {
        if x.len() != y.len() || x.len() != types.len() {
            return Err(PyValueError::new_err("x, y and types must have the same length"));
        }
        let pts: Vec<Point> = x.iter().zip(&y).map(|(&a, &b)| Point::new(a, b)).collect();
        let marks = types.iter().map(|t| label(t)).collect::<PyResult<Vec<_>>>()?;
        let inner = match window {
            Some((x0, x1, y0, y1)) => {
                MarkedPointPattern::new(pts, marks, ObservationWindow::new(x0, x1, y0, y1).map_err(err)?)
            }
            None => MarkedPointPattern::with_inferred_window(pts, marks),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    /// Parse `x,y,type` CSV text.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self { inner: sashimi_core::parse_csv(text.as_bytes(), usize::MAX).map_err(err)? })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn types(&self) -> Vec<String> {
        self.inner.types().iter().map(|t| t.to_string()).collect()
    }

    fn window(&self) -> (f64, f64, f64, f64) {
        let w = self.inner.window();
        (w.x_min(), w.x_max(), w.y_min(), w.y_max())
    }

    /// Coordinates, optionally of one type only.
    #[pyo3(signature = (of_type=None))]
    fn coords(&self, of_type: Option<&str>) -> PyResult<Vec<(f64, f64)>> {
        let pts = match of_type {
            Some(t) => self.inner.coords_of(&label(t)?),
            None => self.inner.points().to_vec(),
        };
        Ok(pts.iter().map(|p| (p.x, p.y)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Pattern(n={}, types={:?})", self.inner.len(), self.types())
    }
}

/// Default evaluation radii for a pattern: `bins` points up to a quarter of the shorter side.
#[pyfunction]
#[pyo3(signature = (pattern, bins=512))]
fn default_rgrid(pattern: &PyPattern, bins: usize) -> PyResult<Vec<f64>> {
    Ok(sashimi_core::default_rgrid(pattern.inner.window(), bins).map_err(err)?.values().to_vec())
}

fn curve_dict<'py>(py: Python<'py>, c: &SummaryCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &c.name)?;
    d.set_item("r", c.r.values().to_vec())?;
    d.set_item("estimate", c.estimate.clone())?;
    d.set_item("theoretical", c.theoretical.clone())?;
    d.set_item("correction", c.correction.to_string())?;
    Ok(d)
}

/// One summary curve.
///
/// `stat` is one of K, L, G, F, J, PCF or MCF. With `of_type` and `to_type`
/// the cross-type variant is computed; MCF needs both.
#[pyfunction]
#[pyo3(signature = (pattern, stat, r=None, of_type=None, to_type=None, correction=None, bandwidth=DEFAULT_PCF_BANDWIDTH))]
#[allow(clippy::too_many_arguments)]
fn summary<'py>(
    py: Python<'py>,
    pattern: &PyPattern,
    stat: &str,
    r: Option<Vec<f64>>,
    of_type: Option<&str>,
    to_type: Option<&str>,
    correction: Option<&str>,
    bandwidth: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let pat = &pattern.inner;
    let w = pat.window();
    let grid = match r {
        Some(v) => DistanceGrid::new(v).map_err(err)?,
        None => sashimi_core::default_rgrid(w, sashimi_core::pattern::DEFAULT_BINS).map_err(err)?,
    };
    let stat = stat.to_uppercase();
    let nearest = matches!(stat.as_str(), "G" | "F" | "J");
    let corr = match correction {
        Some(c) => self::correction(c)?,
        None if nearest => EdgeCorrection::Border,
        None => EdgeCorrection::Isotropic,
    };
    let pair = match (of_type, to_type) {
        (Some(a), Some(b)) => Some((label(a)?, label(b)?)),
        (Some(a), None) => {
            let sub = pat.subset_by_type(&label(a)?);
            return summary_uni(py, &sub, &stat, &grid, corr, bandwidth);
        }
        (None, Some(_)) => return Err(PyValueError::new_err("to_type needs of_type")),
        (None, None) => None,
    };
    let Some((p, q)) = pair else {
        return summary_uni(py, pat, &stat, &grid, corr, bandwidth);
    };
    let k = || summaries::k_cross(pat, &p, &q, &grid, corr);
    let g = || summaries::g_cross(pat, &p, &q, &grid, corr);
    let f = || summaries::f_cross(pat, &q, &grid, corr, None);
    let c = match stat.as_str() {
        "K" => k(),
        "L" => k().and_then(|k| summaries::l_function(&k)),
        "G" => g(),
        "F" => f(),
        "J" => g().and_then(|g| summaries::j_function(&g, &f()?)),
        "PCF" => k().and_then(|k| summaries::pcf(&k, bandwidth)),
        "MCF" => summaries::mark_connection(pat, &p, &q, &grid, corr, bandwidth),
        other => return Err(PyValueError::new_err(format!("unknown statistic {other:?}"))),
    }
    .map_err(err)?;
    curve_dict(py, &c)
}

fn summary_uni<'py>(
    py: Python<'py>,
    pat: &MarkedPointPattern,
    stat: &str,
    grid: &DistanceGrid,
    corr: EdgeCorrection,
    bandwidth: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let (pts, w) = (pat.points(), pat.window());
    let k = || summaries::k_function(pts, w, grid, corr);
    let g = || summaries::g_function(pts, w, grid, corr);
    let f = || summaries::f_function(pts, w, grid, corr, None);
    let c = match stat {
        "K" => k(),
        "L" => k().and_then(|k| summaries::l_function(&k)),
        "G" => g(),
        "F" => f(),
        "J" => g().and_then(|g| summaries::j_function(&g, &f()?)),
        "PCF" => k().and_then(|k| summaries::pcf(&k, bandwidth)),
        "MCF" => return Err(PyValueError::new_err("MCF needs of_type and to_type")),
        other => return Err(PyValueError::new_err(format!("unknown statistic {other:?}"))),
    }
    .map_err(err)?;
    curve_dict(py, &c)
}

/// Row-major q x q quadrat counts, optionally of one type only.
#[pyfunction]
#[pyo3(signature = (pattern, q=areal::DEFAULT_Q, of_type=None))]
fn quadrat_counts(pattern: &PyPattern, q: usize, of_type: Option<&str>) -> PyResult<Vec<f64>> {
    let pts = match of_type {
        Some(t) => pattern.inner.coords_of(&label(t)?),
        None => pattern.inner.points().to_vec(),
    };
    Ok(areal::quadrat_counts(&pts, pattern.inner.window(), q).map_err(err)?.counts().to_vec())
}

fn grid_of(counts: Vec<f64>) -> PyResult<QuadratGrid> {
    let q = (counts.len() as f64).sqrt().round() as usize;
    if q * q != counts.len() {
        return Err(PyValueError::new_err("counts must hold q*q values"));
    }
    QuadratGrid::from_counts(q, counts, ObservationWindow::unit_square()).map_err(err)
}

/// Moran's I of a row-major q x q field.
#[pyfunction]
#[pyo3(signature = (values, contiguity="queen"))]
fn morans_i(values: Vec<f64>, contiguity: &str) -> PyResult<f64> {
    let g = grid_of(values)?;
    let w = areal::build_weights(g.q(), self::contiguity(contiguity)?).map_err(err)?;
    areal::morans_i(&g, &w).map_err(err)
}

/// Geary's C of a row-major q x q field.
#[pyfunction]
#[pyo3(signature = (values, contiguity="queen"))]
fn gearys_c(values: Vec<f64>, contiguity: &str) -> PyResult<f64> {
    let g = grid_of(values)?;
    let w = areal::build_weights(g.q(), self::contiguity(contiguity)?).map_err(err)?;
    areal::gearys_c(&g, &w).map_err(err)
}

/// Lee's L between two row-major q x q fields.
#[pyfunction]
#[pyo3(signature = (p, q, contiguity="queen"))]
fn lees_l(p: Vec<f64>, q: Vec<f64>, contiguity: &str) -> PyResult<f64> {
    let (gp, gq) = (grid_of(p)?, grid_of(q)?);
    let w = areal::build_weights(gp.q(), self::contiguity(contiguity)?).map_err(err)?;
    areal::lees_l(&gp, &gq, &w).map_err(err)
}

/// Chi-square dispersion test on quadrat counts: `(statistic, dof, p_upper)`.
#[pyfunction]
fn quadrat_test(counts: Vec<f64>) -> PyResult<(f64, usize, f64)> {
    let r = areal::quadrat_test(&grid_of(counts)?).map_err(err)?;
    Ok((r.statistic, r.dof, r.p_upper))
}

/// Join counts `(pp, pq, qq)` of a binary q x q field.
#[pyfunction]
#[pyo3(signature = (presence, contiguity="queen"))]
fn join_counts(presence: Vec<bool>, contiguity: &str) -> PyResult<(f64, f64, f64)> {
    let q = (presence.len() as f64).sqrt().round() as usize;
    if q * q != presence.len() {
        return Err(PyValueError::new_err("presence must hold q*q values"));
    }
    let w = areal::build_weights(q, self::contiguity(contiguity)?).map_err(err)?;
    let j = areal::join_counts_binary(&presence, None, &w).map_err(err)?;
    Ok((j.j_pp, j.j_pq, j.j_qq))
}

/// Similarity of two count vectors: tanimoto, jaccard, dice, morisita_horn,
/// bhattacharyya or cosine.
#[pyfunction]
fn similarity(kind: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let f = match kind.to_lowercase().as_str() {
        "tanimoto" => areal::tanimoto,
        "jaccard" => areal::jaccard,
        "dice" => areal::dice_sorensen,
        "morisita_horn" | "mh" => areal::morisita_horn,
        "bhattacharyya" | "bc" => areal::bhattacharyya,
        "cosine" => areal::cosine_similarity,
        other => return Err(PyValueError::new_err(format!("unknown similarity {other:?}"))),
    };
    f(&p, &q).map_err(err)
}

/// Clark-Evans aggregation index, optionally of one type only.
#[pyfunction]
#[pyo3(signature = (pattern, of_type=None))]
fn clark_evans(pattern: &PyPattern, of_type: Option<&str>) -> PyResult<f64> {
    let pts = match of_type {
        Some(t) => pattern.inner.coords_of(&label(t)?),
        None => pattern.inner.points().to_vec(),
    };
    areal::clark_evans(&pts, pattern.inner.window()).map_err(err)
}

/// Witness-complex persistence: a list of `(dim, birth, death, capped)`.
#[pyfunction]
#[pyo3(signature = (landmarks, witnesses, max_eps=None, landmark_cap=DEFAULT_LANDMARK_CAP, seed=0, max_dim=2))]
fn witness_persistence(
    landmarks: Vec<(f64, f64)>,
    witnesses: Vec<(f64, f64)>,
    max_eps: Option<f64>,
    landmark_cap: usize,
    seed: u64,
    max_dim: usize,
) -> PyResult<Vec<(usize, f64, f64, bool)>> {
    let cfg = WitnessConfig { max_dim, max_eps, landmark_cap, seed };
    let (d, _) = witness(&points(&landmarks), &points(&witnesses), &cfg).map_err(err)?;
    Ok(d.intervals.iter().map(|i| (i.dim, i.birth, i.death, i.capped)).collect())
}

/// FPCA of curves sampled on `r`.
#[pyfunction]
#[pyo3(signature = (r, curves, var_target=0.9, min_components=2))]
fn fpca<'py>(
    py: Python<'py>,
    r: Vec<f64>,
    curves: Vec<Vec<f64>>,
    var_target: f64,
    min_components: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let ens = CurveEnsemble::new(DistanceGrid::new(r).map_err(err)?, curves).map_err(err)?;
    let res = fpca_with(&ens, &FpcaOptions { var_target, min_components }).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("r", res.r)?;
    d.set_item("mean", res.mean_curve)?;
    d.set_item("eigenvalues", res.eigenvalues)?;
    d.set_item("variance_explained", res.variance_explained)?;
    d.set_item("n_retained", res.n_retained)?;
    d.set_item("eigenfunctions", res.eigenfunctions)?;
    d.set_item("scores", res.scores)?;
    Ok(d)
}

/// Full single-image feature table as `{name: value}`, plus the NaN reasons.
///
/// `config` is the JSON analysis config; `types` overrides its type selection.
#[pyfunction]
#[pyo3(signature = (pattern, types=None, config=None))]
fn extract(
    pattern: &PyPattern,
    types: Option<Vec<String>>,
    config: Option<&str>,
) -> PyResult<(BTreeMap<String, f64>, BTreeMap<String, String>)> {
    let mut cfg: AnalysisConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => AnalysisConfig::default(),
    };
    if let Some(t) = types {
        cfg.selected_types = t.iter().map(|s| label(s)).collect::<PyResult<_>>()?;
    }
    if cfg.selected_types.is_empty() {
        cfg.selected_types = pattern.inner.types().to_vec();
    }
    let e = extract_features(&pattern.inner, &cfg).map_err(err)?;
    Ok((e.names.into_iter().zip(e.values).collect(), e.reasons))
}

#[pymodule]
fn sashimi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPattern>()?;
    m.add_function(wrap_pyfunction!(default_rgrid, m)?)?;
    m.add_function(wrap_pyfunction!(summary, m)?)?;
    m.add_function(wrap_pyfunction!(quadrat_counts, m)?)?;
    m.add_function(wrap_pyfunction!(morans_i, m)?)?;
    m.add_function(wrap_pyfunction!(gearys_c, m)?)?;
    m.add_function(wrap_pyfunction!(lees_l, m)?)?;
    m.add_function(wrap_pyfunction!(quadrat_test, m)?)?;
    m.add_function(wrap_pyfunction!(join_counts, m)?)?;
    m.add_function(wrap_pyfunction!(similarity, m)?)?;
    m.add_function(wrap_pyfunction!(clark_evans, m)?)?;
    m.add_function(wrap_pyfunction!(witness_persistence, m)?)?;
    m.add_function(wrap_pyfunction!(fpca, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    Ok(())
}
