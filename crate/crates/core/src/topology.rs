//! Witness-complex persistent homology in dimensions 0 and 1.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::Point;
use crate::summaries::fmt_value;

/// Landmark sets larger than this are thinned by farthest-point selection.
pub const DEFAULT_LANDMARK_CAP: usize = 256;

/// Witnesses processed per distance block.
const WITNESS_BLOCK: usize = 2048;

/// A simplex of dimension 0..=2 on landmark indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    vertices: [u32; 3],
    dim: u8,
    pub value: f64,
}

impl Simplex {
    /// Simplex on 1 to 3 distinct vertices; vertices are stored sorted.
    pub fn new(vertices: &[u32], value: f64) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 3 {
            return Err(Error::BadDimension(vertices.len().saturating_sub(1)));
        }
        let mut v = [u32::MAX; 3];
        v[..vertices.len()].copy_from_slice(vertices);
        v[..vertices.len()].sort_unstable();
        if v[..vertices.len()].windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFiltration(format!("repeated vertex in {vertices:?}")));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidFiltration(format!("filtration value {value}")));
        }
        Ok(Self { vertices: v, dim: (vertices.len() - 1) as u8, value })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices[..=self.dim as usize]
    }

    fn key(&self) -> [u32; 3] {
        self.vertices
    }

    fn facets(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        let v = self.vertices();
        (0..if self.dim == 0 { 0 } else { v.len() }).map(move |skip| {
            let mut out = [u32::MAX; 3];
            for (k, x) in v.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, x)| x).enumerate() {
                out[k] = *x;
            }
            out
        })
    }
}

/// Simplices ordered by (value, dimension, vertices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_eps: f64,
}

impl FilteredComplex {
    /// Sorts into filtration order. Face monotonicity is checked by
    /// [`persistent_homology`].
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_eps: f64) -> Self {
        simplices.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.dim.cmp(&b.dim)).then(a.key().cmp(&b.key())));
        let max_dim = simplices.iter().map(Simplex::dim).max().unwrap_or(0);
        Self { simplices, max_dim, max_eps }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_eps(&self) -> f64 {
        self.max_eps
    }
}

/// Default filtration cap: half the diameter of the landmark bounding box.
pub fn default_max_eps(landmarks: &[Point]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in landmarks {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    if landmarks.is_empty() {
        return 0.0;
    }
    0.5 * (x1 - x0).hypot(y1 - y0)
}

fn canonical(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    v
}

/// Farthest-point subsample of size `k`, starting from a seed-chosen point of
/// the lexicographically sorted input. Ties go to the lower sorted index.
pub fn maxmin_landmarks(points: &[Point], k: usize, seed: u64) -> Vec<Point> {
    let pts = canonical(points);
    if pts.len() <= k {
        return pts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..pts.len())];
    let mut dist: Vec<f64> = pts.iter().map(|p| p.dist(&pts[chosen[0]])).collect();
    while chosen.len() < k {
        let (next, _) = dist
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        chosen.push(next);
        for (d, p) in dist.iter_mut().zip(&pts) {
            *d = d.min(p.dist(&pts[next]));
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pts[i]).collect()
}

fn edge_slot(a: usize, b: usize, n: usize) -> usize {
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// `min_w max(x[w], y[w])`, laid out in fixed lanes so it vectorises.
fn min_of_max(x: &[f64], y: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [f64::INFINITY; LANES];
    let (xc, yc) = (x.chunks_exact(LANES), y.chunks_exact(LANES));
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for k in 0..LANES {
            let m = if a[k] > b[k] { a[k] } else { b[k] };
            acc[k] = if m < acc[k] { m } else { acc[k] };
        }
    }
    let mut best = acc.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    for (a, b) in xr.iter().zip(yr) {
        best = best.min(a.max(*b));
    }
    best
}

fn max_into(out: &mut [f64], x: &[f64], y: &[f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
        *o = if a > b { *a } else { *b };
    }
}

/// Landmark-by-witness distances for one block of witnesses.
fn distance_block(landmarks: &[Point], witnesses: &[Point]) -> Vec<Vec<f64>> {
    landmarks.par_iter().map(|l| witnesses.iter().map(|w| l.dist(w)).collect()).collect()
}

/// Witness complex with `eps(sigma) = min_w max_{l in sigma} d(w, l)`,
/// keeping simplices up to `max_dim` with `eps <= max_eps`.
///
/// Inputs are sorted lexicographically first, so vertex `i` is the `i`-th
/// landmark in that order.
pub fn build_witness_complex(
    landmarks: &[Point],
    witnesses: &[Point],
    max_dim: usize,
    max_eps: f64,
) -> Result<FilteredComplex> {
    if landmarks.is_empty() {
        return Err(Error::NoLandmarks);
    }
    if witnesses.is_empty() {
        return Err(Error::NoWitnesses);
    }
    if !(1..=2).contains(&max_dim) {
        return Err(Error::BadDimension(max_dim));
    }
    if !(max_eps >= 0.0) {
        return Err(Error::BadConfig(format!("filtration cap {max_eps}")));
    }
    let lm = canonical(landmarks);
    let wt = canonical(witnesses);
    let n = lm.len();
    let n_edges = n * n.saturating_sub(1) / 2;

    let mut vert = vec![f64::INFINITY; n];
    let mut edge = vec![f64::INFINITY; n_edges];
    for block in wt.chunks(WITNESS_BLOCK) {
        let d = distance_block(&lm, block);
        for (v, row) in vert.iter_mut().zip(&d) {
            *v = row.iter().fold(*v, |m, &x| m.min(x));
        }
        let rows: Vec<Vec<f64>> =
            (0..n).into_par_iter().map(|a| (a + 1..n).map(|b| min_of_max(&d[a], &d[b])).collect()).collect();
        for (a, row) in rows.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let s = edge_slot(a, a + 1 + k, n);
                edge[s] = edge[s].min(v);
            }
        }
    }

    let mut simplices: Vec<Simplex> = Vec::new();
    for (i, &v) in vert.iter().enumerate().filter(|(_, v)| **v <= max_eps) {
        simplices.push(Simplex { vertices: [i as u32, u32::MAX, u32::MAX], dim: 0, value: v });
    }
    for a in 0..n {
        for b in a + 1..n {
            let v = edge[edge_slot(a, b, n)];
            if v <= max_eps {
                simplices.push(Simplex { vertices: [a as u32, b as u32, u32::MAX], dim: 1, value: v });
            }
        }
    }

    if max_dim == 2 && n >= 3 {
        // Candidate triangles: all three edges under the cap.
        let ok = |a: usize, b: usize| edge[edge_slot(a, b, n)] <= max_eps;
        let cands: Vec<(u32, u32, Vec<u32>)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| ok(a, b))
            .map(|(a, b)| (a as u32, b as u32, (b + 1..n).filter(|&c| ok(a, c) && ok(b, c)).map(|c| c as u32).collect()))
            .filter(|(_, _, cs): &(u32, u32, Vec<u32>)| !cs.is_empty())
            .collect();
        let mut tri: Vec<Vec<f64>> = cands.iter().map(|(_, _, cs)| vec![f64::INFINITY; cs.len()]).collect();
        for block in wt.chunks(WITNESS_BLOCK) {
            let d = distance_block(&lm, block);
            tri.par_iter_mut().zip(&cands).for_each(|(vals, (a, b, cs))| {
                let mut m = vec![0.0; block.len()];
                max_into(&mut m, &d[*a as usize], &d[*b as usize]);
                for (v, &c) in vals.iter_mut().zip(cs) {
                    *v = v.min(min_of_max(&m, &d[c as usize]));
                }
            });
        }
        for ((a, b, cs), vals) in cands.iter().zip(&tri) {
            for (&c, &v) in cs.iter().zip(vals) {
                if v <= max_eps {
                    simplices.push(Simplex { vertices: [*a, *b, c], dim: 2, value: v });
                }
            }
        }
    }
    Ok(FilteredComplex::from_simplices(simplices, max_eps))
}

/// One persistence interval. Capped intervals never died below the filtration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub capped: bool,
}

impl Interval {
    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub intervals: Vec<Interval>,
    pub max_eps: f64,
}

impl PersistenceDiagram {
    pub fn of_dim(&self, dim: usize) -> impl Iterator<Item = &Interval> + '_ {
        self.intervals.iter().filter(move |iv| iv.dim == dim)
    }

    /// `dim,birth,death,capped` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death,capped\n");
        for iv in &self.intervals {
            out.push_str(&format!("{},{},{},{}\n", iv.dim, iv.birth, iv.death, iv.capped));
        }
        out
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Persistence pairs over GF(2) for dimensions 0 and 1.
///
/// Dimension 0 uses union-find with the elder rule. Dimension 1 reduces the
/// coboundary matrix of the edges that do not merge components, which yields
/// the same pairing as the boundary-matrix reduction. Classes alive at the cap
/// get `death = max_eps` and `capped = true`; other zero-length intervals are dropped.
pub fn persistent_homology(complex: &FilteredComplex) -> Result<PersistenceDiagram> {
    let s = &complex.simplices;
    let cap = complex.max_eps;
    let mut index: HashMap<[u32; 3], usize> = HashMap::with_capacity(s.len());
    for (i, sx) in s.iter().enumerate() {
        if sx.value > cap {
            return Err(Error::InvalidFiltration(format!("value {} above the cap {cap}", sx.value)));
        }
        for f in sx.facets() {
            match index.get(&f) {
                Some(&j) if s[j].value <= sx.value => {}
                Some(_) => {
                    return Err(Error::InvalidFiltration(format!("face of {:?} enters after it", sx.vertices())))
                }
                None => return Err(Error::InvalidFiltration(format!("face of {:?} is missing", sx.vertices()))),
            }
        }
        if index.insert(sx.key(), i).is_some() {
            return Err(Error::InvalidFiltration(format!("duplicate simplex {:?}", sx.vertices())));
        }
    }

    let mut intervals = Vec::new();
    let mut keep = |dim: usize, birth: f64, death: f64, capped: bool| {
        if capped || death > birth {
            intervals.push(Interval { dim, birth, death, capped });
        }
    };

    // H0: components keyed by their oldest vertex (lowest filtration index).
    let mut parent: Vec<usize> = (0..s.len()).collect();
    let mut positive_edges = Vec::new();
    for (i, sx) in s.iter().enumerate().filter(|(_, sx)| sx.dim == 1) {
        let [a, b] = [sx.vertices[0], sx.vertices[1]].map(|v| index[&[v, u32::MAX, u32::MAX]]);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            positive_edges.push(i);
        } else {
            let (old, young) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[young] = old;
            keep(0, s[young].value, sx.value, false);
        }
    }
    for i in (0..s.len()).filter(|&i| s[i].dim == 0) {
        if find(&mut parent, i) == i {
            keep(0, s[i].value, cap, true);
        }
    }

    // H1: coboundary columns of the positive edges, latest edge first.
    let mut cofaces: HashMap<usize, Vec<u32>> = positive_edges.iter().map(|&e| (e, Vec::new())).collect();
    for (t, sx) in s.iter().enumerate().filter(|(_, sx)| sx.dim == 2) {
        for f in sx.facets() {
            if let Some(col) = cofaces.get_mut(&index[&f]) {
                col.push(t as u32);
            }
        }
    }
    let mut pivot_owner: HashMap<u32, Vec<u32>> = HashMap::new();
    for &e in positive_edges.iter().rev() {
        let mut col = cofaces.remove(&e).unwrap_or_default();
        col.sort_unstable();
        while let Some(&low) = col.first() {
            match pivot_owner.get(&low) {
                Some(other) => col = symmetric_difference(&col, other),
                None => break,
            }
        }
        match col.first() {
            Some(&low) => {
                keep(1, s[e].value, s[low as usize].value, false);
                pivot_owner.insert(low, col);
            }
            None => keep(1, s[e].value, cap, true),
        }
    }

    intervals.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
            .then(a.capped.cmp(&b.capped))
    });
    Ok(PersistenceDiagram { intervals, max_eps: cap })
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// min, max, mean and population standard deviation; NaN when empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self { min: f64::NAN, max: f64::NAN, mean: f64::NAN, std: f64::NAN };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSummary {
    pub prefix: String,
    pub dim: usize,
    pub n_features: usize,
    pub birth: Moments,
    pub death: Moments,
    pub lifetime: Moments,
}

impl PersistenceSummary {
    /// Feature names for `prefix` and `dim`, in the order [`Self::features`] emits them.
    pub fn feature_names(prefix: &str, dim: usize) -> Vec<String> {
        let mut out = Vec::with_capacity(13);
        for family in ["birth", "death", "lifetime"] {
            for stat in ["min", "max", "mean", "std"] {
                out.push(format!("{prefix}_h{dim}_{family}_{stat}"));
            }
        }
        out.push(format!("{prefix}_h{dim}_n_features"));
        out
    }

    pub fn features(&self) -> Vec<(String, f64)> {
        let values = [self.birth, self.death, self.lifetime]
            .into_iter()
            .flat_map(|m| [m.min, m.max, m.mean, m.std])
            .chain([self.n_features as f64]);
        Self::feature_names(&self.prefix, self.dim).into_iter().zip(values).collect()
    }

    pub fn to_csv_row(&self) -> String {
        self.features().iter().map(|(_, v)| fmt_value(*v)).collect::<Vec<_>>().join(",")
    }
}

/// Birth/death/lifetime statistics of the `dim` intervals, capped deaths taken at the cap.
pub fn persistence_summaries(diagram: &PersistenceDiagram, dim: usize, prefix: &str) -> Result<PersistenceSummary> {
    if dim > 1 {
        return Err(Error::BadDimension(dim));
    }
    let ivs: Vec<&Interval> = diagram.of_dim(dim).collect();
    let births: Vec<f64> = ivs.iter().map(|iv| iv.birth).collect();
    let deaths: Vec<f64> = ivs.iter().map(|iv| iv.death).collect();
    let lifetimes: Vec<f64> = ivs.iter().map(|iv| iv.lifetime()).collect();
    Ok(PersistenceSummary {
        prefix: prefix.to_string(),
        dim,
        n_features: ivs.len(),
        birth: Moments::of(&births),
        death: Moments::of(&deaths),
        lifetime: Moments::of(&lifetimes),
    })
}

/// Settings for [`witness_persistence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WitnessConfig {
    pub max_dim: usize,
    /// `None` selects [`default_max_eps`] of the landmarks.
    pub max_eps: Option<f64>,
    pub landmark_cap: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self { max_dim: 2, max_eps: None, landmark_cap: DEFAULT_LANDMARK_CAP, seed: 0 }
    }
}

/// Landmark thinning, complex construction and reduction in one call.
/// Returns the diagram and the number of landmarks used.
pub fn witness_persistence(
    landmarks: &[Point],
    witnesses: &[Point],
    cfg: &WitnessConfig,
) -> Result<(PersistenceDiagram, usize)> {
    if landmarks.is_empty() {
        return Err(Error::NoLandmarks);
    }
    if cfg.landmark_cap == 0 {
        return Err(Error::BadConfig("landmark cap must be positive".into()));
    }
    let lm = maxmin_landmarks(landmarks, cfg.landmark_cap, cfg.seed);
    let max_eps = cfg.max_eps.unwrap_or_else(|| default_max_eps(&lm));
    let complex = build_witness_complex(&lm, witnesses, cfg.max_dim, max_eps)?;
    Ok((persistent_homology(&complex)?, lm.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn hand_complexes() {
        let c = build_witness_complex(&pts(&[(0.0, 0.0)]), &pts(&[(1.0, 0.0)]), 2, 5.0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.simplices()[0].value, 1.0);
        let c = build_witness_complex(&pts(&[(0.0, 0.0), (2.0, 0.0)]), &pts(&[(1.0, 0.0)]), 2, 5.0).unwrap();
        let vals: Vec<(usize, f64)> = c.simplices().iter().map(|s| (s.dim(), s.value)).collect();
        assert_eq!(vals, vec![(0, 1.0), (0, 1.0), (1, 1.0)]);
        assert_eq!(build_witness_complex(&pts(&[(0.0, 0.0)]), &[], 2, 1.0), Err(Error::NoWitnesses));
        assert_eq!(build_witness_complex(&[], &pts(&[(0.0, 0.0)]), 2, 1.0), Err(Error::NoLandmarks));
    }

    #[test]
    fn single_vertex_is_capped() {
        let c = build_witness_complex(&pts(&[(0.0, 0.0)]), &pts(&[(1.0, 0.0)]), 2, 5.0).unwrap();
        let d = persistent_homology(&c).unwrap();
        assert_eq!(d.intervals, vec![Interval { dim: 0, birth: 1.0, death: 5.0, capped: true }]);
    }

    #[test]
    fn hollow_triangle_has_loop() {
        let s = vec![
            Simplex::new(&[0], 0.0).unwrap(),
            Simplex::new(&[1], 0.0).unwrap(),
            Simplex::new(&[2], 0.0).unwrap(),
            Simplex::new(&[0, 1], 1.0).unwrap(),
            Simplex::new(&[1, 2], 1.0).unwrap(),
            Simplex::new(&[0, 2], 2.0).unwrap(),
            Simplex::new(&[0, 1, 2], 3.0).unwrap(),
        ];
        let d = persistent_homology(&FilteredComplex::from_simplices(s.clone(), 4.0)).unwrap();
        let h1: Vec<_> = d.of_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death, h1[0].capped), (2.0, 3.0, false));
        assert_eq!(d.of_dim(0).count(), 3);
        let open = FilteredComplex::from_simplices(s[..6].to_vec(), 4.0);
        let d = persistent_homology(&open).unwrap();
        assert!(d.of_dim(1).all(|iv| iv.capped && iv.death == 4.0));
    }

    #[test]
    fn rejects_bad_filtration() {
        let s = vec![
            Simplex::new(&[0], 2.0).unwrap(),
            Simplex::new(&[1], 0.0).unwrap(),
            Simplex::new(&[0, 1], 1.0).unwrap(),
        ];
        let c = FilteredComplex::from_simplices(s, 3.0);
        assert!(matches!(persistent_homology(&c), Err(Error::InvalidFiltration(_))));
        let c = FilteredComplex::from_simplices(vec![Simplex::new(&[0, 1], 1.0).unwrap()], 3.0);
        assert!(matches!(persistent_homology(&c), Err(Error::InvalidFiltration(_))));
    }

    #[test]
    fn summary_statistics() {
        let diagram = PersistenceDiagram {
            intervals: vec![
                Interval { dim: 0, birth: 0.0, death: 1.0, capped: false },
                Interval { dim: 0, birth: 0.0, death: 3.0, capped: false },
            ],
            max_eps: 5.0,
        };
        let s = persistence_summaries(&diagram, 0, "witness_tumor_immune").unwrap();
        assert_eq!(s.n_features, 2);
        assert_relative_eq!(s.lifetime.mean, 2.0);
        assert_relative_eq!(s.lifetime.std, 1.0);
        let f = s.features();
        assert_eq!(f.len(), 13);
        assert_eq!(f[12], ("witness_tumor_immune_h0_n_features".to_string(), 2.0));
        let empty = persistence_summaries(&diagram, 1, "p").unwrap();
        assert_eq!(empty.n_features, 0);
        assert!(empty.features()[..12].iter().all(|(_, v)| v.is_nan()));
        let one = Moments::of(&[0.2]);
        assert_eq!((one.min, one.max, one.mean, one.std), (0.2, 0.2, 0.2, 0.0));
    }

    #[test]
    fn maxmin_keeps_extremes() {
        let p: Vec<Point> = (0..100).map(|i| Point::new(i as f64, 0.0)).collect();
        let lm = maxmin_landmarks(&p, 3, 7);
        assert_eq!(lm.len(), 3);
        assert!(lm.contains(&Point::new(0.0, 0.0)) || lm.contains(&Point::new(99.0, 0.0)));
        assert_eq!(lm, maxmin_landmarks(&p.iter().rev().copied().collect::<Vec<_>>(), 3, 7));
    }
}
