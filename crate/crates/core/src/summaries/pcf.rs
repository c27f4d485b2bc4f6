//! Pair correlation from the derivative of K, and the mark connection function.

use std::f64::consts::PI;

use super::{check_same_grid, k_cross, k_function, EdgeCorrection, SummaryCurve, EPS_DIV};
use crate::error::{Error, Result};
use crate::pattern::{CellType, DistanceGrid, MarkedPointPattern};

/// Half-width, in grid steps, of the local-linear derivative window.
pub const DEFAULT_PCF_BANDWIDTH: usize = 2;

/// `pcf(r) = K'(r) / (2 pi r)` with `K'` from a local-linear fit over
/// `r_i +- bandwidth` grid steps (truncated at the grid ends). NaN at r = 0.
pub fn pcf(k: &SummaryCurve, bandwidth: usize) -> Result<SummaryCurve> {
    if k.r.uniform_step().is_none() {
        return Err(Error::GridMismatch("pcf needs a uniformly spaced grid".into()));
    }
    if bandwidth == 0 {
        return Err(Error::BadConfig("pcf bandwidth must be at least one grid step".into()));
    }
    let r = k.r.values();
    let m = r.len();
    let mut estimate = vec![f64::NAN; m];
    for i in 1..m {
        let lo = i.saturating_sub(bandwidth);
        let hi = (i + bandwidth).min(m - 1);
        let window = &k.estimate[lo..=hi];
        if window.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let ts: Vec<f64> = r[lo..=hi].iter().map(|&x| x - r[i]).collect();
        let tbar = ts.iter().sum::<f64>() / ts.len() as f64;
        let kbar = window.iter().sum::<f64>() / window.len() as f64;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, kv) in ts.iter().zip(window) {
            sxy += (t - tbar) * (kv - kbar);
            sxx += (t - tbar) * (t - tbar);
        }
        estimate[i] = sxy / sxx / (2.0 * PI * r[i]);
    }
    let name = match k.name.strip_prefix('K') {
        Some(rest) => format!("PCF{rest}"),
        None => format!("PCF({})", k.name),
    };
    Ok(SummaryCurve { name, r: k.r.clone(), estimate, theoretical: vec![1.0; m], correction: k.correction })
}

/// `mcf(r) = lambda_p lambda_q pcf_pq(r) / (lambda^2 pcf(r))`, NaN where `pcf(r) <= 1e-9`.
pub fn mark_connection(
    pattern: &MarkedPointPattern,
    p: &CellType,
    q: &CellType,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
    bandwidth: usize,
) -> Result<SummaryCurve> {
    let n = pattern.len();
    let (np, nq) = (pattern.count_of(p), pattern.count_of(q));
    if np == 0 {
        return Err(Error::EmptyType(p.to_string()));
    }
    if nq == 0 {
        return Err(Error::EmptyType(q.to_string()));
    }
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let all = pcf(&k_function(pattern.points(), pattern.window(), rgrid, correction)?, bandwidth)?;
    let cross = pcf(&k_cross(pattern, p, q, rgrid, correction)?, bandwidth)?;
    mark_connection_from(&all, &cross, (np as f64 * nq as f64) / (n as f64 * n as f64))
}

/// Mark connection from precomputed pooled and cross pair correlations,
/// `share = lambda_p lambda_q / lambda^2`.
pub fn mark_connection_from(all: &SummaryCurve, cross: &SummaryCurve, share: f64) -> Result<SummaryCurve> {
    check_same_grid(all, cross)?;
    let estimate = all
        .estimate
        .iter()
        .zip(&cross.estimate)
        .map(|(&g, &gpq)| if g.is_nan() || gpq.is_nan() || g <= EPS_DIV { f64::NAN } else { share * gpq / g })
        .collect();
    Ok(SummaryCurve {
        name: "MK.CONN".into(),
        r: all.r.clone(),
        estimate,
        theoretical: vec![share; all.len()],
        correction: all.correction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{ObservationWindow, Point};
    use approx::assert_relative_eq;

    fn k_of(scale: f64) -> SummaryCurve {
        let g = DistanceGrid::uniform(0.25, 101).unwrap();
        SummaryCurve {
            name: "K.CROSS".into(),
            estimate: g.values().iter().map(|r| scale * PI * r * r).collect(),
            theoretical: vec![0.0; g.count()],
            r: g,
            correction: EdgeCorrection::None,
        }
    }

    #[test]
    fn csr_form_gives_one() {
        let p = pcf(&k_of(1.0), 2).unwrap();
        assert_eq!(p.name, "PCF.CROSS");
        assert!(p.estimate[0].is_nan());
        for v in &p.estimate[2..p.len() - 2] {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-9);
        }
        let p2 = pcf(&k_of(2.0), 2).unwrap();
        for v in &p2.estimate[2..p2.len() - 2] {
            assert_relative_eq!(*v, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_nonuniform_grid() {
        let mut k = k_of(1.0);
        k.r = DistanceGrid::new((0..101).map(|i| (i as f64).powi(2) * 1e-4).collect()).unwrap();
        assert!(matches!(pcf(&k, 2), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn single_type_connection_is_one() {
        let pts: Vec<Point> =
            (0..200).map(|i| Point::new((i as f64 * 0.6180339).fract(), (i as f64 * 0.7548776).fract())).collect();
        let pat = MarkedPointPattern::unmarked(pts, "t", ObservationWindow::unit_square()).unwrap();
        let t = CellType::new("t").unwrap();
        let g = DistanceGrid::uniform(0.2, 41).unwrap();
        let m = mark_connection(&pat, &t, &t, &g, EdgeCorrection::Isotropic, 2).unwrap();
        for v in m.estimate.iter().filter(|v| v.is_finite()) {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
        }
        assert!(m.estimate.iter().skip(10).any(|v| v.is_finite()));
    }
}
