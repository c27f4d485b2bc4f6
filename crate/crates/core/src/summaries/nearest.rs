//! Nearest-neighbour (G), empty-space (F) and J functions.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{check_same_grid, EdgeCorrection, SummaryCurve, EPS_DIV};
use crate::error::{Error, Result};
use crate::index::PointIndex;
use crate::pattern::{CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point};

/// Smallest side of the F-function reference lattice.
const MIN_LATTICE: usize = 32;

/// Distance from each point to its nearest other point.
pub fn nearest_neighbor_distances(points: &[Point]) -> Vec<f64> {
    let index = PointIndex::for_nearest(points);
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| index.nearest(p, Some(i)).map_or(f64::INFINITY, |(_, d)| d))
        .collect()
}

fn nearest_in(queries: &[Point], targets: &[Point]) -> Vec<f64> {
    let index = PointIndex::for_nearest(targets);
    queries.par_iter().map(|q| index.nearest(q, None).map_or(f64::INFINITY, |(_, d)| d)).collect()
}

/// Regular `m x m` lattice over the window, half a step in from the boundary.
pub fn reference_lattice(window: &ObservationWindow, m: usize) -> Vec<Point> {
    let (dx, dy) = (window.width() / m as f64, window.height() / m as f64);
    let mut out = Vec::with_capacity(m * m);
    for iy in 0..m {
        for ix in 0..m {
            out.push(Point::new(
                window.x_min() + (ix as f64 + 0.5) * dx,
                window.y_min() + (iy as f64 + 0.5) * dy,
            ));
        }
    }
    out
}

/// Lattice side for `n` data points: `max(32, ceil(sqrt(10 n)))`.
fn lattice_side(n: usize, resolution: Option<usize>) -> usize {
    resolution.unwrap_or_else(|| ((10.0 * n as f64).sqrt().ceil() as usize).max(MIN_LATTICE)).max(1)
}

/// Empirical distribution of `dists` on `grid`. Border correction keeps, at
/// radius r, only the sites at least r from the boundary.
fn distance_cdf(dists: &[f64], sites: &[Point], window: &ObservationWindow, grid: &DistanceGrid, correction: EdgeCorrection) -> Vec<f64> {
    let m = grid.count();
    let mut hits = vec![0i64; m + 1];
    let mut eligible = vec![0i64; m + 1];
    for (d, s) in dists.iter().zip(sites) {
        let limit = match correction {
            EdgeCorrection::Border => {
                let b = window.border_distance(s);
                grid.values().partition_point(|&r| r <= b)
            }
            _ => m,
        };
        eligible[0] += 1;
        eligible[limit] -= 1;
        let bin = grid.first_at_least(*d);
        if bin < limit {
            hits[bin] += 1;
            hits[limit] -= 1;
        }
    }
    let (mut h, mut e) = (0i64, 0i64);
    (0..m)
        .map(|k| {
            h += hits[k];
            e += eligible[k];
            if e > 0 {
                h as f64 / e as f64
            } else {
                f64::NAN
            }
        })
        .collect()
}

fn csr_cdf(grid: &DistanceGrid, intensity: f64) -> Vec<f64> {
    grid.values().iter().map(|&r| 1.0 - (-intensity * PI * r * r).exp()).collect()
}

fn check_nn_correction(c: EdgeCorrection) -> Result<()> {
    if c == EdgeCorrection::Isotropic {
        return Err(Error::BadConfig("nearest-neighbour functions support none or border correction".into()));
    }
    Ok(())
}

/// Nearest-neighbour distance distribution G.
pub fn g_function(
    points: &[Point],
    window: &ObservationWindow,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    check_nn_correction(correction)?;
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    let d = nearest_neighbor_distances(points);
    Ok(SummaryCurve {
        name: "G".into(),
        r: rgrid.clone(),
        estimate: distance_cdf(&d, points, window, rgrid, correction),
        theoretical: csr_cdf(rgrid, points.len() as f64 / window.area()),
        correction,
    })
}

/// Distribution of distances from type-`p` points to their nearest type-`q` point.
pub fn g_cross(
    pattern: &MarkedPointPattern,
    p: &CellType,
    q: &CellType,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    check_nn_correction(correction)?;
    let xp = pattern.coords_of(p);
    if xp.is_empty() {
        return Err(Error::EmptyType(p.to_string()));
    }
    if p == q {
        return Ok(g_function(&xp, pattern.window(), rgrid, correction)?.renamed("G.CROSS"));
    }
    let xq = pattern.coords_of(q);
    if xq.is_empty() {
        return Err(Error::EmptyType(q.to_string()));
    }
    let d = nearest_in(&xp, &xq);
    let window = pattern.window();
    Ok(SummaryCurve {
        name: "G.CROSS".into(),
        r: rgrid.clone(),
        estimate: distance_cdf(&d, &xp, window, rgrid, correction),
        theoretical: csr_cdf(rgrid, xq.len() as f64 / window.area()),
        correction,
    })
}

fn empty_space(
    targets: &[Point],
    window: &ObservationWindow,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
    resolution: Option<usize>,
) -> Vec<f64> {
    let lattice = reference_lattice(window, lattice_side(targets.len(), resolution));
    let d = nearest_in(&lattice, targets);
    let mut est = distance_cdf(&d, &lattice, window, rgrid, correction);
    // Empty-space distance 0 has probability zero; lattice coincidences are ignored.
    if est[0].is_finite() {
        est[0] = 0.0;
    }
    est
}

/// Empty-space function F on a regular reference lattice.
///
/// `resolution` overrides the lattice side (default `max(32, ceil(sqrt(10 n)))`).
pub fn f_function(
    points: &[Point],
    window: &ObservationWindow,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
    resolution: Option<usize>,
) -> Result<SummaryCurve> {
    check_nn_correction(correction)?;
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    Ok(SummaryCurve {
        name: "F".into(),
        r: rgrid.clone(),
        estimate: empty_space(points, window, rgrid, correction, resolution),
        theoretical: csr_cdf(rgrid, points.len() as f64 / window.area()),
        correction,
    })
}

/// Empty-space function measured to the nearest type-`q` point.
pub fn f_cross(
    pattern: &MarkedPointPattern,
    q: &CellType,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
    resolution: Option<usize>,
) -> Result<SummaryCurve> {
    check_nn_correction(correction)?;
    let xq = pattern.coords_of(q);
    if xq.is_empty() {
        return Err(Error::EmptyType(q.to_string()));
    }
    let window = pattern.window();
    Ok(SummaryCurve {
        name: "F.CROSS".into(),
        r: rgrid.clone(),
        estimate: empty_space(&xq, window, rgrid, correction, resolution),
        theoretical: csr_cdf(rgrid, xq.len() as f64 / window.area()),
        correction,
    })
}

/// `J(r) = (1 - G(r)) / (1 - F(r))`, NaN where `1 - F(r) <= 1e-9`.
pub fn j_function(g: &SummaryCurve, f: &SummaryCurve) -> Result<SummaryCurve> {
    check_same_grid(g, f)?;
    let estimate = g
        .estimate
        .iter()
        .zip(&f.estimate)
        .map(|(&gv, &fv)| {
            let den = 1.0 - fv;
            if den.is_nan() || gv.is_nan() || den <= EPS_DIV {
                f64::NAN
            } else {
                (1.0 - gv) / den
            }
        })
        .collect();
    let name = match g.name.strip_prefix('G') {
        Some(rest) => format!("J{rest}"),
        None => format!("J({})", g.name),
    };
    Ok(SummaryCurve { name, r: g.r.clone(), estimate, theoretical: vec![1.0; g.r.count()], correction: g.correction })
}
