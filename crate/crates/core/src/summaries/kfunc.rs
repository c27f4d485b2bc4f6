//! Ripley's K and its directional, cross-type and mark-weighted variants, plus L.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use super::{isotropic_weight, EdgeCorrection, MarkWeightFn, SummaryCurve};
use crate::error::{Error, Result};
use crate::index::PointIndex;
use crate::pattern::{CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point};

/// Centres per work unit; fixed so the reduction order never depends on the thread count.
const CHUNK: usize = 256;

/// Per-radius sums of pair weights together with the number of eligible centres.
struct PairSums {
    sums: Vec<f64>,
    centres: Vec<f64>,
}

/// Accumulate `sum_i sum_j I(d_ij <= r) w_ij g(i, j)` for every r in `grid`.
///
/// With `same`, centres and targets are the same set and `i == j` is skipped.
/// Under border correction centre `i` contributes to radius r only when its
/// distance to the boundary is at least r.
#[allow(clippy::too_many_arguments)]
fn accumulate_pairs<F, G>(
    window: &ObservationWindow,
    centres: &[Point],
    targets: &[Point],
    same: bool,
    grid: &DistanceGrid,
    correction: EdgeCorrection,
    keep: F,
    pair_weight: G,
) -> PairSums
where
    F: Fn(&Point, &Point) -> bool + Sync,
    G: Fn(usize, usize) -> f64 + Sync,
{
    let m = grid.count();
    let rmax = grid.rmax();
    let index = PointIndex::new(targets, rmax);
    let border = correction == EdgeCorrection::Border;
    let n_chunks = centres.len().div_ceil(CHUNK);

    let partials: Vec<(Vec<f64>, Vec<i64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0.0f64; m + 1];
            let mut count = vec![0i64; m + 1];
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(centres.len());
            for (i, ci) in centres.iter().enumerate().take(hi).skip(lo) {
                let limit = if border {
                    let b = window.border_distance(ci);
                    grid.values().partition_point(|&r| r <= b)
                } else {
                    m
                };
                if limit == 0 {
                    continue;
                }
                count[0] += 1;
                count[limit] -= 1;
                index.for_each_within(ci, rmax, |j, d| {
                    if same && j == i {
                        return;
                    }
                    let cj = &targets[j];
                    if !keep(ci, cj) {
                        return;
                    }
                    let bin = grid.first_at_least(d);
                    if bin >= limit {
                        return;
                    }
                    let edge = match correction {
                        EdgeCorrection::Isotropic => isotropic_weight(window, ci, d),
                        _ => 1.0,
                    };
                    let w = edge * pair_weight(i, j);
                    hist[bin] += w;
                    hist[limit] -= w;
                });
            }
            (hist, count)
        })
        .collect();

    let mut hist = vec![0.0f64; m + 1];
    let mut count = vec![0i64; m + 1];
    for (h, c) in &partials {
        for k in 0..=m {
            hist[k] += h[k];
            count[k] += c[k];
        }
    }
    let mut sums = Vec::with_capacity(m);
    let mut centres_at = Vec::with_capacity(m);
    let (mut s, mut n) = (0.0, 0i64);
    for k in 0..m {
        s += hist[k];
        n += count[k];
        sums.push(s);
        centres_at.push(n as f64);
    }
    PairSums { sums, centres: centres_at }
}

/// Turn pair sums into an estimate. `per_centre` is the number of partner
/// points each centre can have (N - 1 for univariate, N_q for cross-type).
fn normalise(ps: &PairSums, area: f64, n_centres: usize, per_centre: f64, correction: EdgeCorrection) -> Vec<f64> {
    match correction {
        EdgeCorrection::Border => ps
            .sums
            .iter()
            .zip(&ps.centres)
            .map(|(&s, &c)| if c > 0.0 { area * s / (c * per_centre) } else { f64::NAN })
            .collect(),
        _ => {
            let denom = n_centres as f64 * per_centre;
            ps.sums.iter().map(|&s| area * s / denom).collect()
        }
    }
}

fn csr_k(grid: &DistanceGrid) -> Vec<f64> {
    grid.values().iter().map(|&r| PI * r * r).collect()
}

/// Ripley's K: `|A| / (N (N - 1)) * sum_j sum_{i != j} I(d_ij <= r) w_ij`.
pub fn k_function(
    points: &[Point],
    window: &ObservationWindow,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let ps = accumulate_pairs(window, points, points, true, rgrid, correction, |_, _| true, |_, _| 1.0);
    Ok(SummaryCurve {
        name: "K".into(),
        r: rgrid.clone(),
        estimate: normalise(&ps, window.area(), n, (n - 1) as f64, correction),
        theoretical: csr_k(rgrid),
        correction,
    })
}

/// K restricted to ordered pairs whose bearing i -> j lies in
/// `[theta - dtheta/2, theta + dtheta/2)` modulo 2pi.
pub fn k_directional(
    points: &[Point],
    window: &ObservationWindow,
    theta: f64,
    dtheta: f64,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    if !(dtheta > 0.0 && dtheta <= TAU) || !theta.is_finite() {
        return Err(Error::BadSector(dtheta));
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let full = dtheta >= TAU;
    let start = theta - 0.5 * dtheta;
    let in_sector = |a: &Point, b: &Point| {
        if full {
            return true;
        }
        let bearing = (b.y - a.y).atan2(b.x - a.x);
        (bearing - start).rem_euclid(TAU) < dtheta
    };
    let ps = accumulate_pairs(window, points, points, true, rgrid, correction, in_sector, |_, _| 1.0);
    let share = dtheta / TAU;
    Ok(SummaryCurve {
        name: "K.DIR".into(),
        r: rgrid.clone(),
        estimate: normalise(&ps, window.area(), n, (n - 1) as f64, correction),
        theoretical: rgrid.values().iter().map(|&r| PI * r * r * share).collect(),
        correction,
    })
}

/// Cross-type K: `|A| / (N_p N_q) * sum_{i in X_p} sum_{j in X_q} I(d_ij <= r) w_ij`.
///
/// With `p == q` this is the univariate K of `X_p`.
pub fn k_cross(
    pattern: &MarkedPointPattern,
    p: &CellType,
    q: &CellType,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    let xp = pattern.coords_of(p);
    if xp.is_empty() {
        return Err(Error::EmptyType(p.to_string()));
    }
    if p == q {
        return Ok(k_function(&xp, pattern.window(), rgrid, correction)?.renamed("K.CROSS"));
    }
    let xq = pattern.coords_of(q);
    if xq.is_empty() {
        return Err(Error::EmptyType(q.to_string()));
    }
    let window = pattern.window();
    let ps = accumulate_pairs(window, &xp, &xq, false, rgrid, correction, |_, _| true, |_, _| 1.0);
    Ok(SummaryCurve {
        name: "K.CROSS".into(),
        r: rgrid.clone(),
        estimate: normalise(&ps, window.area(), xp.len(), xq.len() as f64, correction),
        theoretical: csr_k(rgrid),
        correction,
    })
}

/// Mark-weighted K: `|A| / (N (N - 1) fbar) * sum_i sum_{j != i} f(m_i, m_j) I(d_ij <= r) w_ij`,
/// where `fbar` is the mean of `f` over all ordered pairs of distinct points.
pub fn k_mark_weighted(
    pattern: &MarkedPointPattern,
    f: &MarkWeightFn,
    rgrid: &DistanceGrid,
    correction: EdgeCorrection,
) -> Result<SummaryCurve> {
    let n = pattern.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let types = pattern.types();
    let kt = types.len();
    let mut table = vec![0.0; kt * kt];
    for a in 0..kt {
        for b in 0..kt {
            table[a * kt + b] = f.eval(&types[a], &types[b])?;
        }
    }
    let mut counts = vec![0usize; kt];
    for &m in pattern.mark_ids() {
        counts[m as usize] += 1;
    }
    let mut total = 0.0;
    for a in 0..kt {
        for b in 0..kt {
            let pairs = counts[a] * (counts[b] - usize::from(a == b));
            total += table[a * kt + b] * pairs as f64;
        }
    }
    let fbar = total / (n * (n - 1)) as f64;
    if fbar <= 0.0 {
        return Err(Error::ZeroNormalizer);
    }
    let ids = pattern.mark_ids();
    let weight = |i: usize, j: usize| table[ids[i] as usize * kt + ids[j] as usize];
    let window = pattern.window();
    let points = pattern.points();
    let ps = accumulate_pairs(window, points, points, true, rgrid, correction, |_, _| true, weight);
    let estimate = normalise(&ps, window.area(), n, (n - 1) as f64, correction)
        .into_iter()
        .map(|k| k / fbar)
        .collect();
    Ok(SummaryCurve { name: "K.MARK".into(), r: rgrid.clone(), estimate, theoretical: csr_k(rgrid), correction })
}

/// `L(r) = sqrt(K(r) / pi)`, for univariate and cross-type K alike.
pub fn l_function(k: &SummaryCurve) -> Result<SummaryCurve> {
    if let Some((e, r)) = k.estimate.iter().zip(k.r.values()).find(|(e, _)| e.is_finite() && **e < 0.0) {
        return Err(Error::NegativeInput(*e, *r));
    }
    let name = match k.name.strip_prefix('K') {
        Some(rest) => format!("L{rest}"),
        None => format!("L({})", k.name),
    };
    Ok(SummaryCurve {
        name,
        r: k.r.clone(),
        estimate: k.estimate.iter().map(|&v| (v / PI).sqrt()).collect(),
        theoretical: k.r.values().to_vec(),
        correction: k.correction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn unit() -> ObservationWindow {
        ObservationWindow::unit_square()
    }

    fn grid() -> DistanceGrid {
        DistanceGrid::uniform(0.25, 26).unwrap()
    }

    fn pair() -> Vec<Point> {
        vec![Point::new(0.4, 0.5), Point::new(0.5, 0.5)]
    }

    #[test]
    fn two_points_step() {
        let k = k_function(&pair(), &unit(), &grid(), EdgeCorrection::None).unwrap();
        for (r, v) in k.r.values().iter().zip(&k.estimate) {
            // 0.4 -> 0.5 is 0.09999999999999998 in binary, so the step sits at r = 0.1
            let want = if *r >= 0.1 - 1e-12 { 1.0 } else { 0.0 };
            assert_eq!(*v, want, "r = {r}");
        }
        assert_relative_eq!(k.theoretical[4], PI * 0.04 * 0.04, epsilon = 1e-15);
    }

    #[test]
    fn too_few_points() {
        let one = vec![Point::new(0.5, 0.5)];
        assert!(matches!(
            k_function(&one, &unit(), &grid(), EdgeCorrection::None),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn directional_sector_membership() {
        let g = grid();
        let k = k_directional(&pair(), &unit(), 0.0, PI / 3.0, &g, EdgeCorrection::None).unwrap();
        // only the directed pair pointing along +x counts: |A| / 2 * 1
        assert_eq!(*k.estimate.last().unwrap(), 0.5);
        assert_eq!(k.estimate[0], 0.0);
        let k = k_directional(&pair(), &unit(), FRAC_PI_2, PI / 6.0, &g, EdgeCorrection::None).unwrap();
        assert!(k.estimate.iter().all(|&v| v == 0.0));
        assert!(matches!(
            k_directional(&pair(), &unit(), 0.0, 0.0, &g, EdgeCorrection::None),
            Err(Error::BadSector(_))
        ));
    }

    #[test]
    fn directional_full_circle_is_plain_k() {
        let pts: Vec<Point> =
            (0..40).map(|i| Point::new((i as f64 * 0.137).fract(), (i as f64 * 0.611).fract())).collect();
        for corr in [EdgeCorrection::None, EdgeCorrection::Isotropic, EdgeCorrection::Border] {
            let a = k_function(&pts, &unit(), &grid(), corr).unwrap();
            let b = k_directional(&pts, &unit(), 1.3, TAU, &grid(), corr).unwrap();
            assert_eq!(a.estimate, b.estimate);
            assert_eq!(a.theoretical, b.theoretical);
        }
    }

    fn toy_pattern() -> MarkedPointPattern {
        let pts = vec![Point::new(0.4, 0.5), Point::new(0.5, 0.5), Point::new(0.2, 0.2), Point::new(0.25, 0.3)];
        let marks = ["p", "q", "p", "p"].iter().map(|s| CellType::new(s).unwrap()).collect();
        MarkedPointPattern::new(pts, marks, unit()).unwrap()
    }

    #[test]
    fn cross_single_pair() {
        let pts = vec![Point::new(0.4, 0.5), Point::new(0.5, 0.5)];
        let marks = vec![CellType::new("p").unwrap(), CellType::new("q").unwrap()];
        let pat = MarkedPointPattern::new(pts, marks, unit()).unwrap();
        let (p, q) = (CellType::new("p").unwrap(), CellType::new("q").unwrap());
        let k = k_cross(&pat, &p, &q, &grid(), EdgeCorrection::None).unwrap();
        assert_eq!(*k.estimate.last().unwrap(), 1.0);
        assert_eq!(k.estimate[1], 0.0);
    }

    #[test]
    fn cross_with_itself_is_univariate() {
        let pat = toy_pattern();
        let p = CellType::new("p").unwrap();
        let a = k_cross(&pat, &p, &p, &grid(), EdgeCorrection::Isotropic).unwrap();
        let b = k_function(&pat.coords_of(&p), pat.window(), &grid(), EdgeCorrection::Isotropic).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn cross_empty_type() {
        let pat = toy_pattern();
        let (p, s) = (CellType::new("p").unwrap(), CellType::new("stromal").unwrap());
        assert_eq!(k_cross(&pat, &p, &s, &grid(), EdgeCorrection::None), Err(Error::EmptyType("stromal".into())));
        assert_eq!(k_cross(&pat, &s, &p, &grid(), EdgeCorrection::None), Err(Error::EmptyType("stromal".into())));
    }

    #[test]
    fn mark_weighted_unit_weights_is_plain_k() {
        let pat = toy_pattern();
        let ones = MarkWeightFn::custom(|_, _| 1.0);
        let a = k_mark_weighted(&pat, &ones, &grid(), EdgeCorrection::Isotropic).unwrap();
        let b = k_function(pat.points(), pat.window(), &grid(), EdgeCorrection::Isotropic).unwrap();
        for (x, y) in a.estimate.iter().zip(&b.estimate) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn mark_weighted_constant_numeric_marks() {
        let pts = vec![Point::new(0.1, 0.1), Point::new(0.2, 0.15), Point::new(0.5, 0.5)];
        let marks = vec![CellType::new("3").unwrap(); 3];
        let pat = MarkedPointPattern::new(pts, marks, unit()).unwrap();
        let a = k_mark_weighted(&pat, &MarkWeightFn::Product, &grid(), EdgeCorrection::None).unwrap();
        let b = k_function(pat.points(), pat.window(), &grid(), EdgeCorrection::None).unwrap();
        for (x, y) in a.estimate.iter().zip(&b.estimate) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn mark_weighted_errors() {
        let pat = toy_pattern();
        assert_eq!(
            k_mark_weighted(&pat, &MarkWeightFn::Product, &grid(), EdgeCorrection::None),
            Err(Error::NonNumericMark("p".into()))
        );
        let zero = MarkWeightFn::custom(|_, _| 0.0);
        assert_eq!(k_mark_weighted(&pat, &zero, &grid(), EdgeCorrection::None), Err(Error::ZeroNormalizer));
    }

    #[test]
    fn l_examples() {
        let g = grid();
        let k = SummaryCurve {
            name: "K".into(),
            r: g.clone(),
            estimate: g.values().iter().map(|r| PI * r * r).collect(),
            theoretical: vec![0.0; g.count()],
            correction: EdgeCorrection::None,
        };
        let l = l_function(&k).unwrap();
        assert_eq!(l.name, "L");
        for (a, b) in l.estimate.iter().zip(g.values()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
        let mut k4 = k.clone();
        k4.estimate[3] = 4.0 * PI;
        assert_relative_eq!(l_function(&k4).unwrap().estimate[3], 2.0);
        k4.estimate[5] = -0.1;
        assert!(matches!(l_function(&k4), Err(Error::NegativeInput(..))));
        let cross = k.renamed("K.CROSS");
        assert_eq!(l_function(&cross).unwrap().name, "L.CROSS");
    }
}
