//! Brute-force reference implementations. Written from the textbook
//! definitions with plain loops and dense matrices; they share no code with
//! the library beyond its input types.

#![allow(dead_code)]

pub mod checks;

use std::f64::consts::{PI, TAU};

use sashimi_core::topology::FilteredComplex;
use sashimi_core::{ObservationWindow, Point};

pub type Rect = (f64, f64, f64, f64);

pub fn rect(w: &ObservationWindow) -> Rect {
    (w.x_min(), w.x_max(), w.y_min(), w.y_max())
}

fn area(r: Rect) -> f64 {
    (r.1 - r.0) * (r.3 - r.2)
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn border(r: Rect, p: &Point) -> f64 {
    (p.x - r.0).min(r.1 - p.x).min(p.y - r.2).min(r.3 - p.y)
}

/// Fraction of the circle (c, radius) inside the rectangle: find every
/// crossing of the circle with the four edge lines, then test the midpoint
/// of each arc between consecutive crossings.
pub fn arc_fraction(r: Rect, c: &Point, radius: f64) -> f64 {
    if radius <= 0.0 {
        return 1.0;
    }
    let mut angles = vec![0.0, TAU];
    for xl in [r.0, r.1] {
        let u = (xl - c.x) / radius;
        if u.abs() < 1.0 {
            let a = u.acos();
            angles.push(a);
            angles.push(TAU - a);
        }
    }
    for yl in [r.2, r.3] {
        let u = (yl - c.y) / radius;
        if u.abs() < 1.0 {
            let a = u.asin();
            angles.push(a.rem_euclid(TAU));
            angles.push((PI - a).rem_euclid(TAU));
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut inside = 0.0;
    for w in angles.windows(2) {
        if w[1] - w[0] <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let (x, y) = (c.x + radius * mid.cos(), c.y + radius * mid.sin());
        if x >= r.0 && x <= r.1 && y >= r.2 && y <= r.3 {
            inside += w[1] - w[0];
        }
    }
    inside / TAU
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Corr {
    None,
    Isotropic,
    Border,
}

/// Ripley K by direct enumeration of ordered pairs. `same` skips i == j.
pub fn k_pairs(r: Rect, from: &[Point], to: &[Point], same: bool, radii: &[f64], corr: Corr) -> Vec<f64> {
    k_pairs_sector(r, from, to, same, radii, corr, None)
}

/// As [`k_pairs`] with an optional bearing sector `(theta, dtheta)`.
pub fn k_pairs_sector(
    r: Rect,
    from: &[Point],
    to: &[Point],
    same: bool,
    radii: &[f64],
    corr: Corr,
    sector: Option<(f64, f64)>,
) -> Vec<f64> {
    let per = if same { from.len() as f64 - 1.0 } else { to.len() as f64 };
    radii
        .iter()
        .map(|&t| {
            let mut sum = 0.0;
            let mut centres = 0usize;
            for (i, a) in from.iter().enumerate() {
                if corr == Corr::Border && border(r, a) < t {
                    continue;
                }
                centres += 1;
                for (j, b) in to.iter().enumerate() {
                    if same && i == j {
                        continue;
                    }
                    let d = dist(a, b);
                    if d > t {
                        continue;
                    }
                    if let Some((theta, dtheta)) = sector {
                        let bearing = (b.y - a.y).atan2(b.x - a.x);
                        let off = (bearing - (theta - dtheta / 2.0)).rem_euclid(TAU);
                        if off >= dtheta {
                            continue;
                        }
                    }
                    sum += match corr {
                        Corr::Isotropic => {
                            let e = arc_fraction(r, a, d);
                            if e > 0.0 {
                                1.0 / e
                            } else {
                                0.0
                            }
                        }
                        _ => 1.0,
                    };
                }
            }
            match corr {
                Corr::Border if centres == 0 => f64::NAN,
                Corr::Border => area(r) * sum / (centres as f64 * per),
                _ => area(r) * sum / (from.len() as f64 * per),
            }
        })
        .collect()
}

/// Nearest distance from `p` to `set`, skipping index `skip`.
pub fn nearest(p: &Point, set: &[Point], skip: Option<usize>) -> f64 {
    set.iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, q)| dist(p, q))
        .fold(f64::INFINITY, f64::min)
}

/// Reduced-sample (or raw) distribution of per-site distances.
pub fn ecdf(r: Rect, sites: &[Point], d: &[f64], radii: &[f64], corr: Corr) -> Vec<f64> {
    radii
        .iter()
        .map(|&t| {
            let (mut hit, mut n) = (0usize, 0usize);
            for (s, &di) in sites.iter().zip(d) {
                if corr == Corr::Border && border(r, s) < t {
                    continue;
                }
                n += 1;
                if di <= t {
                    hit += 1;
                }
            }
            if n == 0 {
                f64::NAN
            } else {
                hit as f64 / n as f64
            }
        })
        .collect()
}

pub fn g_cdf(r: Rect, from: &[Point], to: &[Point], same: bool, radii: &[f64], corr: Corr) -> Vec<f64> {
    let d: Vec<f64> = from.iter().enumerate().map(|(i, p)| nearest(p, to, same.then_some(i))).collect();
    ecdf(r, from, &d, radii, corr)
}

/// Lattice side used for the empty-space function with `n` data points.
pub fn lattice_side(n: usize) -> usize {
    let mut m = 32;
    while m * m < 10 * n {
        m += 1;
    }
    m
}

pub fn f_cdf(r: Rect, targets: &[Point], radii: &[f64], corr: Corr, side: Option<usize>) -> Vec<f64> {
    let m = side.unwrap_or_else(|| lattice_side(targets.len()));
    // Sites sit half a lattice step in from the boundary.
    let (dx, dy) = ((r.1 - r.0) / m as f64, (r.3 - r.2) / m as f64);
    let mut sites = Vec::new();
    for iy in 0..m {
        for ix in 0..m {
            sites.push(Point::new(r.0 + (ix as f64 + 0.5) * dx, r.2 + (iy as f64 + 0.5) * dy));
        }
    }
    let d: Vec<f64> = sites.iter().map(|s| nearest(s, targets, None)).collect();
    let mut f = ecdf(r, &sites, &d, radii, corr);
    if f[0].is_finite() {
        f[0] = 0.0;
    }
    f
}

pub fn j_ratio(g: &[f64], f: &[f64]) -> Vec<f64> {
    g.iter()
        .zip(f)
        .map(|(&g, &f)| if g.is_nan() || f.is_nan() || 1.0 - f <= 1e-9 { f64::NAN } else { (1.0 - g) / (1.0 - f) })
        .collect()
}

/// Least-squares slope of K over `+-bw` grid points, divided by `2 pi r`.
pub fn pcf_from_k(radii: &[f64], k: &[f64], bw: usize) -> Vec<f64> {
    let m = radii.len();
    (0..m)
        .map(|i| {
            if i == 0 {
                return f64::NAN;
            }
            let lo = i.saturating_sub(bw);
            let hi = (i + bw).min(m - 1);
            if k[lo..=hi].iter().any(|v| !v.is_finite()) {
                return f64::NAN;
            }
            let n = (hi - lo + 1) as f64;
            let xs = &radii[lo..=hi];
            let ys = &k[lo..=hi];
            let xm = xs.iter().sum::<f64>() / n;
            let ym = ys.iter().sum::<f64>() / n;
            let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
            num / den / (2.0 * PI * radii[i])
        })
        .collect()
}

pub fn mcf(pcf_all: &[f64], pcf_cross: &[f64], share: f64) -> Vec<f64> {
    pcf_all
        .iter()
        .zip(pcf_cross)
        .map(|(&a, &c)| if a.is_nan() || c.is_nan() || a <= 1e-9 { f64::NAN } else { share * c / a })
        .collect()
}

// ---- areal ----

pub fn quadrat_counts(r: Rect, pts: &[Point], q: usize) -> Vec<f64> {
    let mut c = vec![0.0; q * q];
    for p in pts {
        if p.x < r.0 || p.x > r.1 || p.y < r.2 || p.y > r.3 {
            continue;
        }
        let cell = |v: f64, lo: f64, hi: f64| {
            let mut k = 0;
            // Largest k whose lower gridline is at or below v.
            while k + 1 < q && lo + (k + 1) as f64 * (hi - lo) / q as f64 <= v {
                k += 1;
            }
            k
        };
        c[cell(p.y, r.2, r.3) * q + cell(p.x, r.0, r.1)] += 1.0;
    }
    c
}

/// Dense 0/1 contiguity matrix.
pub fn weights(q: usize, queen: bool) -> Vec<Vec<f64>> {
    let n = q * q;
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (ri, ci, rj, cj) = ((i / q) as i64, (i % q) as i64, (j / q) as i64, (j % q) as i64);
            let (dr, dc) = ((ri - rj).abs(), (ci - cj).abs());
            let adj = if queen { dr.max(dc) == 1 } else { dr + dc == 1 };
            if adj {
                w[i][j] = 1.0;
            }
        }
    }
    w
}

fn avg(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn moran(x: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let m = avg(x);
    let (mut num, mut s0) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            num += w[i][j] * (x[i] - m) * (x[j] - m);
            s0 += w[i][j];
        }
    }
    let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    n as f64 / s0 * num / den
}

pub fn geary(x: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let m = avg(x);
    let (mut num, mut s0) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            num += w[i][j] * (x[i] - x[j]).powi(2);
            s0 += w[i][j];
        }
    }
    let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    (n as f64 - 1.0) * num / (2.0 * s0 * den)
}

/// Lee's L with lag fields, raw-field means and the `N / sum_i (sum_j w_ij)^2` prefactor.
pub fn lee(x: &[f64], y: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let (mx, my) = (avg(x), avg(y));
    let lag = |v: &[f64], i: usize| (0..n).map(|j| w[i][j] * v[j]).sum::<f64>();
    let mut pre = 0.0;
    for row in w {
        pre += row.iter().sum::<f64>().powi(2);
    }
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (lag(x, i) - mx, lag(y, i) - my);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    n as f64 / pre * sxy / (sxx.sqrt() * syy.sqrt())
}

pub fn chi2(counts: &[f64]) -> f64 {
    let e = counts.iter().sum::<f64>() / counts.len() as f64;
    counts.iter().map(|o| (o - e).powi(2) / e).sum()
}

/// (pp, pq, qq) from half the sum over ordered adjacent pairs.
pub fn joins(b: &[bool], w: &[Vec<f64>]) -> (f64, f64, f64) {
    let (mut pp, mut pq, mut qq) = (0.0, 0.0, 0.0);
    for i in 0..b.len() {
        for j in 0..b.len() {
            if i == j {
                continue;
            }
            let (bi, bj) = (b[i] as u8 as f64, b[j] as u8 as f64);
            pp += 0.5 * w[i][j] * bi * bj;
            pq += 0.5 * w[i][j] * (bi - bj).powi(2);
            qq += 0.5 * w[i][j] * (1.0 - bi) * (1.0 - bj);
        }
    }
    (pp, pq, qq)
}

fn support(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    p.iter().zip(q).filter(|(a, b)| **a + **b > 0.0).map(|(a, b)| (*a, *b)).unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn tanimoto(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = support(p, q);
    let pq = dot(&p, &q);
    pq / (dot(&p, &p) + dot(&q, &q) - pq)
}

pub fn dice(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = support(p, q);
    2.0 * dot(&p, &q) / (dot(&p, &p) + dot(&q, &q))
}

fn normalised(v: &[f64]) -> Vec<f64> {
    let t: f64 = v.iter().sum();
    v.iter().map(|x| x / t).collect()
}

pub fn morisita_horn(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = (normalised(p), normalised(q));
    2.0 * dot(&p, &q) / (dot(&p, &p) + dot(&q, &q))
}

pub fn bhattacharyya(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = (normalised(p), normalised(q));
    p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum()
}

pub fn cosine(p: &[f64], q: &[f64]) -> f64 {
    dot(p, q) / (dot(p, p).sqrt() * dot(q, q).sqrt())
}

pub fn clark_evans(r: Rect, pts: &[Point]) -> f64 {
    let mean_nn = pts.iter().enumerate().map(|(i, p)| nearest(p, pts, Some(i))).sum::<f64>() / pts.len() as f64;
    let lambda = pts.len() as f64 / area(r);
    mean_nn / (1.0 / (2.0 * lambda.sqrt()))
}

// ---- persistence ----

/// (dim, birth, death, capped) from a dense GF(2) column reduction of the
/// full boundary matrix, in filtration order.
pub fn dense_persistence(c: &FilteredComplex) -> Vec<(usize, f64, f64, bool)> {
    let s = c.simplices();
    let n = s.len();
    let mut cols: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for (j, sj) in s.iter().enumerate() {
        if sj.dim() == 0 {
            continue;
        }
        for (i, si) in s.iter().enumerate() {
            if si.dim() + 1 == sj.dim() && si.vertices().iter().all(|v| sj.vertices().contains(v)) {
                cols[j][i] = true;
            }
        }
    }
    let low = |col: &[bool]| col.iter().rposition(|&b| b);
    let mut low_of: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        loop {
            let Some(l) = low(&cols[j]) else { break };
            let Some(k) = (0..j).find(|&k| low_of[k] == Some(l)) else { break };
            let other = cols[k].clone();
            for (a, b) in cols[j].iter_mut().zip(other) {
                *a ^= b;
            }
        }
        low_of[j] = low(&cols[j]);
    }
    let mut paired = vec![false; n];
    let mut out = Vec::new();
    for j in 0..n {
        if let Some(i) = low_of[j] {
            paired[i] = true;
            paired[j] = true;
            if s[i].dim() <= 1 && s[j].value > s[i].value {
                out.push((s[i].dim(), s[i].value, s[j].value, false));
            }
        }
    }
    for i in 0..n {
        if !paired[i] && low_of[i].is_none() && s[i].dim() <= 1 {
            out.push((s[i].dim(), s[i].value, c.max_eps(), true));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
