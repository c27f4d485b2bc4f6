//! Library-versus-oracle comparisons shared by the equivalence tests and the
//! acceptance run. Each check reports the first mismatch instead of panicking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sashimi_core::areal::{self, build_weights, Contiguity};
use sashimi_core::generators::{matern_ii, poisson_csr, thomas_cluster};
use sashimi_core::summaries::{self, EdgeCorrection};
use sashimi_core::topology::{FilteredComplex, Simplex};
use sashimi_core::{CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point};

use super::Corr;

pub type Check = Result<(), String>;

/// Absolute below magnitude one, relative above.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn curve(what: &str, got: &[f64], want: &[f64], tol: f64) -> Check {
    if got.len() != want.len() {
        return Err(format!("{what}: length {} vs {}", got.len(), want.len()));
    }
    match got.iter().zip(want).position(|(g, w)| !close(*g, *w, tol)) {
        Some(k) => Err(format!("{what}[{k}]: {} vs oracle {}", got[k], want[k])),
        None => Ok(()),
    }
}

fn scalar(what: &str, got: f64, want: f64, tol: f64) -> Check {
    if close(got, want, tol) {
        Ok(())
    } else {
        Err(format!("{what}: {got} vs oracle {want}"))
    }
}

fn run<T, E: std::fmt::Display>(what: &str, r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn corr(c: Corr) -> EdgeCorrection {
    match c {
        Corr::None => EdgeCorrection::None,
        Corr::Isotropic => EdgeCorrection::Isotropic,
        Corr::Border => EdgeCorrection::Border,
    }
}

/// CSR (`kind` 0), Thomas (1) or Matern II (2) pattern of 12 to 500 points with labels a, b, c.
pub fn pattern(kind: u8, seed: u64, w: f64, h: f64) -> MarkedPointPattern {
    let win = ObservationWindow::new(0.0, w, 0.0, h).unwrap();
    let area = w * h;
    let mut pts = match kind {
        0 => poisson_csr(150.0 / area, &win, seed).unwrap(),
        1 => thomas_cluster(15.0 / area, 10.0, 0.03 * w.min(h), &win, seed).unwrap(),
        _ => matern_ii(300.0 / area, 0.02 * w.min(h), &win, seed).unwrap(),
    };
    pts.truncate(500);
    while pts.len() < 12 {
        let k = pts.len() as f64;
        pts.push(Point::new(w * (0.13 + 0.061 * k) % w, h * (0.29 + 0.037 * k) % h));
    }
    let labels = ["a", "b", "c"].map(|s| CellType::new(s).unwrap());
    let marks = (0..pts.len()).map(|i| labels[(i * 7 + seed as usize) % 3].clone()).collect();
    MarkedPointPattern::new(pts, marks, win).unwrap()
}

/// K, directional K, cross K, pcf, mcf (all corrections) and G, G cross,
/// F, F cross, J (none and border) against the oracles.
pub fn summaries(p: &MarkedPointPattern, bins: usize, tol: f64) -> Check {
    let win = p.window();
    let r = super::rect(win);
    let grid = DistanceGrid::uniform(0.25 * win.width().min(win.height()), bins).unwrap();
    let radii = grid.values();
    let [a, b] = ["a", "b"].map(|s| CellType::new(s).unwrap());
    let (xa, xb) = (p.coords_of(&a), p.coords_of(&b));
    let all = p.points();
    let n = all.len() as f64;

    for c in [Corr::None, Corr::Isotropic, Corr::Border] {
        let want_k = super::k_pairs(r, all, all, true, radii, c);
        let k = run("K", summaries::k_function(all, win, &grid, corr(c)))?;
        curve(&format!("K {c:?}"), &k.estimate, &want_k, tol)?;

        let want_kx = super::k_pairs(r, &xa, &xb, false, radii, c);
        let kx = run("K cross", summaries::k_cross(p, &a, &b, &grid, corr(c)))?;
        curve(&format!("K cross {c:?}"), &kx.estimate, &want_kx, tol)?;

        let kd = run("K dir", summaries::k_directional(all, win, 0.7, 1.3, &grid, corr(c)))?;
        let want = super::k_pairs_sector(r, all, all, true, radii, c, Some((0.7, 1.3)));
        curve(&format!("K directional {c:?}"), &kd.estimate, &want, tol)?;

        let want_pcf = super::pcf_from_k(radii, &want_k, 2);
        let pc = run("pcf", summaries::pcf(&k, 2))?;
        curve(&format!("pcf {c:?}"), &pc.estimate, &want_pcf, tol)?;

        let want_cross = super::pcf_from_k(radii, &want_kx, 2);
        let want = super::mcf(&want_pcf, &want_cross, xa.len() as f64 * xb.len() as f64 / (n * n));
        let mk = run("mcf", summaries::mark_connection(p, &a, &b, &grid, corr(c), 2))?;
        curve(&format!("mcf {c:?}"), &mk.estimate, &want, tol)?;
    }

    for c in [Corr::None, Corr::Border] {
        let want_g = super::g_cdf(r, all, all, true, radii, c);
        let g = run("G", summaries::g_function(all, win, &grid, corr(c)))?;
        curve(&format!("G {c:?}"), &g.estimate, &want_g, tol)?;

        let gx = run("G cross", summaries::g_cross(p, &a, &b, &grid, corr(c)))?;
        curve(&format!("G cross {c:?}"), &gx.estimate, &super::g_cdf(r, &xa, &xb, false, radii, c), tol)?;

        let want_f = super::f_cdf(r, all, radii, c, None);
        let f = run("F", summaries::f_function(all, win, &grid, corr(c), None))?;
        curve(&format!("F {c:?}"), &f.estimate, &want_f, tol)?;

        let fx = run("F cross", summaries::f_cross(p, &b, &grid, corr(c), Some(40)))?;
        curve(&format!("F cross {c:?}"), &fx.estimate, &super::f_cdf(r, &xb, radii, c, Some(40)), tol)?;

        let j = run("J", summaries::j_function(&g, &f))?;
        curve(&format!("J {c:?}"), &j.estimate, &super::j_ratio(&want_g, &want_f), tol)?;
    }
    Ok(())
}

/// Quadrat counts, weights, Moran, Geary, Lee, chi-squared, join counts,
/// the similarity indices and Clark-Evans against direct evaluation.
pub fn areal(p: &MarkedPointPattern, q: usize, tol: f64) -> Check {
    let win = p.window();
    let r = super::rect(win);
    let [a, b] = ["a", "b"].map(|s| CellType::new(s).unwrap());
    let (xa, xb) = (p.coords_of(&a), p.coords_of(&b));
    let ga = run("quadrats", areal::quadrat_counts(&xa, win, q))?;
    let gb = run("quadrats", areal::quadrat_counts(&xb, win, q))?;
    let (ca, cb) = (super::quadrat_counts(r, &xa, q), super::quadrat_counts(r, &xb, q));
    if ga.counts() != &ca[..] || gb.counts() != &cb[..] {
        return Err("quadrat counts differ".into());
    }
    let flat = |c: &[f64]| c.iter().all(|&v| v == c[0]);

    for queen in [false, true] {
        let w = run("weights", build_weights(q, if queen { Contiguity::Queen } else { Contiguity::Rook }))?;
        let dense = super::weights(q, queen);
        for i in 0..q * q {
            for j in 0..q * q {
                if w.weight(i, j) != dense[i][j] {
                    return Err(format!("w[{i}][{j}] (queen={queen})"));
                }
            }
        }
        if !flat(&ca) {
            scalar("Moran", run("Moran", areal::morans_i(&ga, &w))?, super::moran(&ca, &dense), tol)?;
            scalar("Geary", run("Geary", areal::gearys_c(&ga, &w))?, super::geary(&ca, &dense), tol)?;
        }
        if let Ok(l) = areal::lees_l(&ga, &gb, &w) {
            scalar("Lee", l, super::lee(&ca, &cb, &dense), tol)?;
        }
        let pres: Vec<bool> = ca.iter().map(|&c| c >= 1.0).collect();
        let jc = run("joins", areal::join_counts(&ga, &w, 1.0))?;
        let (pp, pq, qq) = super::joins(&pres, &dense);
        if (jc.j_pp, jc.j_pq, jc.j_qq) != (pp, pq, qq) {
            return Err(format!("join counts {jc:?} vs oracle ({pp}, {pq}, {qq})"));
        }
    }

    if ga.total() > 0.0 {
        let t = run("chi2", areal::quadrat_test(&ga))?;
        scalar("chi2", t.statistic, super::chi2(&ca), tol)?;
    }
    if ga.total() > 0.0 && gb.total() > 0.0 {
        scalar("Tanimoto", run("Tanimoto", areal::tanimoto(&ca, &cb))?, super::tanimoto(&ca, &cb), tol)?;
        scalar("Jaccard", run("Jaccard", areal::jaccard(&ca, &cb))?, super::tanimoto(&ca, &cb), tol)?;
        scalar("Dice", run("Dice", areal::dice_sorensen(&ca, &cb))?, super::dice(&ca, &cb), tol)?;
        scalar("MH", run("MH", areal::morisita_horn(&ca, &cb))?, super::morisita_horn(&ca, &cb), tol)?;
        scalar("BC", run("BC", areal::bhattacharyya(&ca, &cb))?, super::bhattacharyya(&ca, &cb), tol)?;
        scalar("cosine", run("cosine", areal::cosine_similarity(&ca, &cb))?, super::cosine(&ca, &cb), tol)?;
    }
    let ce = run("Clark-Evans", areal::clark_evans(p.points(), win))?;
    scalar("Clark-Evans", ce, super::clark_evans(r, p.points()), tol)
}

/// Random filtered complex on `n` vertices with small integer values (many
/// ties) and at most 200 simplices.
pub fn random_complex(seed: u64, n: usize, p_edge: f64, p_tri: f64) -> FilteredComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Vec::new();
    let vval: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
    for (v, &x) in vval.iter().enumerate() {
        s.push(Simplex::new(&[v as u32], x).unwrap());
    }
    let mut edges = std::collections::HashMap::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < p_edge && s.len() < 200 {
                let v = vval[a].max(vval[b]) + rng.random_range(0..6) as f64;
                edges.insert((a, b), v);
                s.push(Simplex::new(&[a as u32, b as u32], v).unwrap());
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if let (Some(x), Some(y), Some(z)) = (edges.get(&(a, b)), edges.get(&(a, c)), edges.get(&(b, c))) {
                    if rng.random::<f64>() < p_tri && s.len() < 200 {
                        let v = x.max(*y).max(*z) + rng.random_range(0..4) as f64;
                        s.push(Simplex::new(&[a as u32, b as u32, c as u32], v).unwrap());
                    }
                }
            }
        }
    }
    FilteredComplex::from_simplices(s, 20.0)
}

/// Library diagram as sorted `(dim, birth, death, capped)` tuples.
pub fn diagram(c: &FilteredComplex) -> Result<Vec<(usize, f64, f64, bool)>, String> {
    let d = run("persistence", sashimi_core::topology::persistent_homology(c))?;
    let mut v: Vec<_> = d.intervals.iter().map(|iv| (iv.dim, iv.birth, iv.death, iv.capped)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

pub fn persistence(c: &FilteredComplex) -> Check {
    let (got, want) = (diagram(c)?, super::dense_persistence(c));
    if got == want {
        Ok(())
    } else {
        Err(format!("{} simplices: {got:?} vs oracle {want:?}", c.len()))
    }
}
