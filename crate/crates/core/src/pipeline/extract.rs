use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schema::{ordered_pairs, pair_code, unordered_pairs, witness_prefix, UNI_STATS};
use super::{curve_names, feature_schema, AnalysisConfig, Family, FeatureKind, Role};
use crate::areal::{
    bhattacharyya, build_weights, clark_evans, cosine_similarity, dice_sorensen, gearys_c, jaccard,
    join_counts_binary, lees_l, morans_i, morisita_horn, quadrat_counts, quadrat_test, tanimoto, QuadratGrid,
    SpatialWeights,
};
use crate::error::{Error, Result};
use crate::functional::{fpca_with, CurveEnsemble, FpcaOptions, DEFAULT_MIN_COMPONENTS};
use crate::pattern::{default_rgrid, CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point};
use crate::summaries::{
    f_cross, f_function, g_cross, g_function, j_function, k_cross, k_function, l_function,
    mark_connection_from, pcf, SummaryCurve,
};
use crate::topology::{persistence_summaries, witness_persistence, PersistenceDiagram, WitnessConfig};

/// Per-image bookkeeping written to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetadata {
    pub n_points: usize,
    /// Point count per selected label.
    pub n_per_type: BTreeMap<String, usize>,
    /// Role code to label.
    pub roles: BTreeMap<String, String>,
    pub window: ObservationWindow,
    pub window_inferred: bool,
    pub config_hash: String,
    pub rmax: f64,
    /// Landmarks used and the filtration cap, per witness prefix.
    pub topology: BTreeMap<String, TopologyMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyMeta {
    pub landmarks: usize,
    pub max_eps: f64,
    /// Intervals whose death was set to the cap.
    pub capped: usize,
}

/// Everything computed for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub image: String,
    /// Feature names in schema order.
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Why a feature is NaN.
    pub reasons: BTreeMap<String, String>,
    /// Curves by statistic name.
    pub curves: BTreeMap<String, SummaryCurve>,
    pub diagrams: BTreeMap<String, PersistenceDiagram>,
    pub rgrid: DistanceGrid,
    pub metadata: ImageMetadata,
}

impl Extraction {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn named(mut self, image: impl Into<String>) -> Self {
        self.image = image.into();
        self
    }

    fn set(&mut self, name: &str, value: f64, reason: Option<String>) {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            self.values[i] = value;
            match reason {
                Some(r) => self.reasons.insert(name.to_string(), r),
                None => self.reasons.remove(name),
            };
        }
    }
}

/// Distance grid shared by several images: the configured `rmax`, or the
/// smallest automatic one.
pub fn shared_rgrid(windows: &[ObservationWindow], config: &AnalysisConfig) -> Result<DistanceGrid> {
    match config.rmax {
        Some(r) => DistanceGrid::uniform(r, config.bins),
        None => windows
            .iter()
            .map(|w| default_rgrid(w, config.bins))
            .min_by(|a, b| match (a, b) {
                (Ok(a), Ok(b)) => a.rmax().total_cmp(&b.rmax()),
                (Err(_), _) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            })
            .unwrap_or_else(|| Err(Error::EmptyInput)),
    }
}

struct Ctx<'a> {
    pattern: &'a MarkedPointPattern,
    config: &'a AnalysisConfig,
    rgrid: &'a DistanceGrid,
    roles: Vec<(Role, CellType)>,
}

impl Ctx<'_> {
    fn label(&self, r: Role) -> &CellType {
        &self.roles.iter().find(|(x, _)| *x == r).expect("role assigned").1
    }

    fn coords(&self, r: Role) -> Vec<Point> {
        self.pattern.coords_of(self.label(r))
    }

    fn absent(&self, roles: &[Role]) -> Option<String> {
        let missing: Vec<String> = roles
            .iter()
            .filter(|&&r| self.pattern.count_of(self.label(r)) == 0)
            .map(|&r| format!("{} ({r})", self.label(r)))
            .collect();
        (!missing.is_empty()).then(|| format!("type absent: {}", missing.join(", ")))
    }
}

type Scalars = Vec<(String, f64, Option<String>)>;
type Curves = Vec<(SummaryCurve, Option<String>)>;

fn curve_or_nan(name: String, res: Result<SummaryCurve>, ctx: &Ctx) -> (SummaryCurve, Option<String>) {
    let corr = if name.starts_with('G') || name.starts_with('F') || name.starts_with('J') {
        ctx.config.nn_correction
    } else {
        ctx.config.correction
    };
    match res {
        Ok(c) => (c.renamed(name), None),
        Err(e) => (SummaryCurve::undefined(name, ctx.rgrid, corr), Some(e.to_string())),
    }
}

/// K, L, G, F, J, PCF for one point set.
fn univariate(ctx: &Ctx, suffix: &str, points: &[Point], absent: Option<String>) -> Curves {
    let cfg = ctx.config;
    let w = ctx.pattern.window();
    let name = |s: &str| format!("{s}.REP{suffix}");
    if let Some(reason) = absent {
        return UNI_STATS
            .iter()
            .map(|s| (curve_or_nan(name(s), Err(Error::EmptyPattern), ctx).0, Some(reason.clone())))
            .collect();
    }
    let (k, (g, f)) = rayon::join(
        || k_function(points, w, ctx.rgrid, cfg.correction),
        || {
            rayon::join(
                || g_function(points, w, ctx.rgrid, cfg.nn_correction),
                || f_function(points, w, ctx.rgrid, cfg.nn_correction, cfg.f_resolution),
            )
        },
    );
    let l = k.clone().and_then(|k| l_function(&k));
    let p = k.clone().and_then(|k| pcf(&k, cfg.pcf_bandwidth));
    let j = match (&g, &f) {
        (Ok(g), Ok(f)) => j_function(g, f),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    [("K", k), ("L", l), ("G", g), ("F", f), ("J", j), ("PCF", p)]
        .into_iter()
        .map(|(s, c)| curve_or_nan(name(s), c, ctx))
        .collect()
}

const CROSS_STATS: [&str; 7] = ["K.CROSS", "L.CROSS", "G.CROSS", "F.CROSS", "J.CROSS", "PCF.CROSS", "MK.CONN"];

/// Cross K, L, G, F, J, PCF and the mark connection function for `a` to `b`.
fn bivariate(ctx: &Ctx, a: Role, b: Role, pooled_pcf: &Result<SummaryCurve>) -> Curves {
    let cfg = ctx.config;
    let code = pair_code(a, b);
    let name = |s: &str| format!("{s}.{code}");
    if let Some(reason) = ctx.absent(&[a, b]) {
        return CROSS_STATS
            .iter()
            .map(|s| (curve_or_nan(name(s), Err(Error::EmptyPattern), ctx).0, Some(reason.clone())))
            .collect();
    }
    let (p, q) = (ctx.label(a), ctx.label(b));
    let pat = ctx.pattern;
    let (k, (g, f)) = rayon::join(
        || k_cross(pat, p, q, ctx.rgrid, cfg.correction),
        || {
            rayon::join(
                || g_cross(pat, p, q, ctx.rgrid, cfg.nn_correction),
                || f_cross(pat, q, ctx.rgrid, cfg.nn_correction, cfg.f_resolution),
            )
        },
    );
    let l = k.clone().and_then(|k| l_function(&k));
    let pc = k.clone().and_then(|k| pcf(&k, cfg.pcf_bandwidth));
    let j = match (&g, &f) {
        (Ok(g), Ok(f)) => j_function(g, f),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let n = pat.len() as f64;
    let share = pat.count_of(p) as f64 * pat.count_of(q) as f64 / (n * n);
    let mk = match (pooled_pcf, &pc) {
        (Ok(all), Ok(cross)) => mark_connection_from(all, cross, share),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    CROSS_STATS
        .into_iter()
        .zip([k, l, g, f, j, pc, mk])
        .map(|(s, c)| curve_or_nan(name(s), c, ctx))
        .collect()
}

fn summaries(ctx: &Ctx, roles: &[Role]) -> Curves {
    let pooled = univariate(ctx, "", ctx.pattern.points(), None);
    let pooled_pcf = pooled
        .iter()
        .find(|(c, _)| c.name == "PCF.REP")
        .map(|(c, why)| match why {
            None => Ok(c.clone()),
            Some(w) => Err(Error::BadConfig(format!("pooled pair correlation undefined: {w}"))),
        })
        .unwrap_or(Err(Error::EmptyPattern));
    let per_type: Vec<Curves> = roles
        .par_iter()
        .map(|&r| univariate(ctx, &format!(".{r}"), &ctx.coords(r), ctx.absent(&[r])))
        .collect();
    let pairs: Vec<Curves> =
        ordered_pairs(roles).par_iter().map(|&(a, b)| bivariate(ctx, a, b, &pooled_pcf)).collect();
    pooled.into_iter().chain(per_type.into_iter().flatten()).chain(pairs.into_iter().flatten()).collect()
}

fn scalar(name: String, res: Result<f64>) -> (String, f64, Option<String>) {
    match res {
        Ok(v) => (name, v, None),
        Err(e) => (name, f64::NAN, Some(e.to_string())),
    }
}

fn areal(ctx: &Ctx, roles: &[Role]) -> Result<Scalars> {
    let cfg = ctx.config;
    let window = ctx.pattern.window();
    let w: SpatialWeights = build_weights(cfg.q, cfg.contiguity)?;
    let grids: HashMap<Role, QuadratGrid> =
        roles.iter().map(|&r| Ok((r, quadrat_counts(&ctx.coords(r), window, cfg.q)?))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for &r in roles {
        let names = ["CE", "MoranI", "GearyC", "QuadX2", "QuadX2P"].map(|s| format!("{s}.{r}"));
        if let Some(reason) = ctx.absent(&[r]) {
            out.extend(names.into_iter().map(|n| (n, f64::NAN, Some(reason.clone()))));
            continue;
        }
        let g = &grids[&r];
        let qt = quadrat_test(g);
        let [ce, mi, gc, qx, qp] = names;
        out.push(scalar(ce, clark_evans(&ctx.coords(r), window)));
        out.push(scalar(mi, morans_i(g, &w)));
        out.push(scalar(gc, gearys_c(g, &w)));
        out.push(scalar(qx, qt.clone().map(|t| t.statistic)));
        out.push(scalar(qp, qt.map(|t| t.p_upper)));
    }
    for (a, b) in unordered_pairs(roles) {
        let code = format!("{a}{b}");
        let names = super::schema::PAIR_SCALARS.map(|s| format!("{s}.{code}"));
        if let Some(reason) = ctx.absent(&[a, b]) {
            out.extend(names.into_iter().map(|n| (n, f64::NAN, Some(reason.clone()))));
            continue;
        }
        let (ga, gb) = (&grids[&a], &grids[&b]);
        let (va, vb) = (ga.counts(), gb.counts());
        let t = cfg.presence_threshold;
        let presence: Vec<bool> = va.iter().map(|&c| c >= t).collect();
        let mask: Vec<bool> = va.iter().zip(vb).map(|(&x, &y)| x >= t || y >= t).collect();
        let jc = join_counts_binary(&presence, Some(&mask), &w);
        let [lee, jpp, jpq, jqq, tan, jac, dice, mh, bc, cos] = names;
        out.push(scalar(lee, lees_l(ga, gb, &w)));
        out.push(scalar(jpp, jc.clone().map(|j| j.j_pp)));
        out.push(scalar(jpq, jc.clone().map(|j| j.j_pq)));
        out.push(scalar(jqq, jc.map(|j| j.j_qq)));
        out.push(scalar(tan, tanimoto(va, vb)));
        out.push(scalar(jac, jaccard(va, vb)));
        out.push(scalar(dice, dice_sorensen(va, vb)));
        out.push(scalar(mh, morisita_horn(va, vb)));
        out.push(scalar(bc, bhattacharyya(va, vb)));
        out.push(scalar(cos, cosine_similarity(va, vb)));
    }
    Ok(out)
}

type TopologyOut = (Scalars, BTreeMap<String, PersistenceDiagram>, BTreeMap<String, TopologyMeta>);

fn topology(ctx: &Ctx, roles: &[Role]) -> TopologyOut {
    let cfg = ctx.config;
    let wc = WitnessConfig { max_dim: cfg.max_dim, max_eps: cfg.max_eps, landmark_cap: cfg.landmark_cap, seed: cfg.seed };
    let results: Vec<_> = unordered_pairs(roles)
        .par_iter()
        .map(|&(a, b)| {
            let prefix = witness_prefix(a, b);
            let names: Vec<String> = (0..=1)
                .flat_map(|d| crate::topology::PersistenceSummary::feature_names(&prefix, d))
                .collect();
            let fail = |reason: String| {
                (names.iter().map(|n| (n.clone(), f64::NAN, Some(reason.clone()))).collect::<Scalars>(), None)
            };
            if let Some(reason) = ctx.absent(&[a, b]) {
                return (prefix, fail(reason));
            }
            match witness_persistence(&ctx.coords(a), &ctx.coords(b), &wc) {
                Ok((diagram, landmarks)) => {
                    let mut feats = Scalars::new();
                    for dim in 0..=1 {
                        let s = persistence_summaries(&diagram, dim, &prefix).expect("dimension 0 or 1");
                        let why = |v: f64| v.is_nan().then(|| format!("no H{dim} intervals"));
                        feats.extend(s.features().into_iter().map(|(n, v)| (n, v, why(v))));
                    }
                    let meta = TopologyMeta {
                        landmarks,
                        max_eps: diagram.max_eps,
                        capped: diagram.intervals.iter().filter(|iv| iv.capped).count(),
                    };
                    (prefix, (feats, Some((diagram, meta))))
                }
                Err(e) => (prefix, fail(e.to_string())),
            }
        })
        .collect();
    let mut scalars = Scalars::new();
    let (mut diagrams, mut meta) = (BTreeMap::new(), BTreeMap::new());
    for (prefix, (feats, dm)) in results {
        scalars.extend(feats);
        if let Some((d, m)) = dm {
            diagrams.insert(prefix.clone(), d);
            meta.insert(prefix, m);
        }
    }
    (scalars, diagrams, meta)
}

/// Features and curves for one image on the automatic (or configured) grid.
pub fn extract_features(pattern: &MarkedPointPattern, config: &AnalysisConfig) -> Result<Extraction> {
    let rgrid = shared_rgrid(&[*pattern.window()], config)?;
    extract_features_on(pattern, config, &rgrid)
}

const FPCA_PENDING: &str = "FPCA score needs at least two images";

/// Features and curves for one image on a given grid.
pub fn extract_features_on(
    pattern: &MarkedPointPattern,
    config: &AnalysisConfig,
    rgrid: &DistanceGrid,
) -> Result<Extraction> {
    config.validate()?;
    let roles = config.role_assignment()?;
    if roles.iter().all(|(_, t)| pattern.count_of(t) == 0) {
        return Err(Error::NoSelectedTypePresent);
    }
    let labels: Vec<CellType> = roles.iter().map(|(_, t)| t.clone()).collect();
    let pooled = pattern.subset_by_types(&labels);
    let role_list: Vec<Role> = roles.iter().map(|(r, _)| *r).collect();
    let ctx = Ctx { pattern: &pooled, config, rgrid, roles: roles.clone() };

    let ((curves, areal_out), topo) = rayon::join(
        || {
            rayon::join(
                || if config.has(Family::Summaries) { summaries(&ctx, &role_list) } else { Vec::new() },
                || if config.has(Family::Areal) { areal(&ctx, &role_list) } else { Ok(Vec::new()) },
            )
        },
        || {
            if config.has(Family::Topology) {
                topology(&ctx, &role_list)
            } else {
                Default::default()
            }
        },
    );
    let (topo_scalars, diagrams, topo_meta) = topo;

    let schema = feature_schema(config)?;
    let names: Vec<String> = schema.iter().map(|f| f.name.clone()).collect();
    let mut values = vec![f64::NAN; names.len()];
    let mut reasons = BTreeMap::new();
    let position: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    for (name, v, why) in areal_out?.into_iter().chain(topo_scalars) {
        let i = *position.get(name.as_str()).expect("computed feature is in the schema");
        values[i] = v;
        if let Some(w) = why {
            reasons.insert(name, w);
        }
    }
    let mut curve_map = BTreeMap::new();
    let mut curve_reasons: HashMap<String, String> = HashMap::new();
    for (c, why) in curves {
        if let Some(w) = why {
            curve_reasons.insert(c.name.clone(), w);
        }
        curve_map.insert(c.name.clone(), c);
    }
    debug_assert_eq!(curve_map.len(), curve_names(config)?.len());
    for spec in schema.iter().filter(|s| s.kind == FeatureKind::Fpca) {
        let why = curve_reasons.get(&spec.statistic).cloned().unwrap_or_else(|| FPCA_PENDING.to_string());
        reasons.insert(spec.name.clone(), why);
    }

    let metadata = ImageMetadata {
        n_points: pooled.len(),
        n_per_type: roles.iter().map(|(_, t)| (t.to_string(), pattern.count_of(t))).collect(),
        roles: roles.iter().map(|(r, t)| (r.code().to_string(), t.to_string())).collect(),
        window: *pattern.window(),
        window_inferred: pattern.window_inferred(),
        config_hash: config.hash(),
        rmax: rgrid.rmax(),
        topology: topo_meta,
    };
    Ok(Extraction {
        image: "image".into(),
        names,
        values,
        reasons,
        curves: curve_map,
        diagrams,
        rgrid: rgrid.clone(),
        metadata,
    })
}

/// Outcome of the cross-image FPCA for one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaStat {
    pub n_retained: usize,
    pub variance_explained: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Grid columns used (others were undefined in some image).
    pub n_columns: usize,
    pub r_range: Option<(f64, f64)>,
    pub error: Option<String>,
}

pub type FpcaReport = BTreeMap<String, FpcaStat>;

/// FPCA of every functional statistic across images; fills the `.PC<k>` columns.
pub fn fpca_across_images(images: &mut [Extraction], config: &AnalysisConfig) -> Result<FpcaReport> {
    if images.len() < 2 {
        return Err(Error::TooFewCurves(images.len()));
    }
    let rgrid = images[0].rgrid.clone();
    if images.iter().any(|e| e.rgrid != rgrid) {
        return Err(Error::GridMismatch("images use different distance grids".into()));
    }
    let opts = FpcaOptions { var_target: config.var_target, min_components: DEFAULT_MIN_COMPONENTS };
    let names = curve_names(config)?;
    let results: Vec<(String, Result<crate::functional::FpcaResult>)> = names
        .par_iter()
        .map(|name| {
            let curves: Vec<Vec<f64>> = images
                .iter()
                .map(|e| e.curves.get(name).map_or_else(|| vec![f64::NAN; rgrid.count()], |c| c.estimate.clone()))
                .collect();
            let res = CurveEnsemble::new(rgrid.clone(), curves).and_then(|ens| fpca_with(&ens, &opts));
            (name.clone(), res)
        })
        .collect();
    let mut report = FpcaReport::new();
    let keep = 8;
    for (name, res) in results {
        match res {
            Ok(f) => {
                for (img, scores) in images.iter_mut().zip(&f.scores) {
                    for k in 1..=config.n_pcs {
                        let col = format!("{name}.PC{k}");
                        match scores.get(k - 1) {
                            Some(&s) => img.set(&col, s, None),
                            None => img.set(&col, f64::NAN, Some(format!("component {k} not retained"))),
                        }
                    }
                }
                report.insert(
                    name,
                    FpcaStat {
                        n_retained: f.n_retained,
                        variance_explained: f.variance_explained.iter().take(keep).copied().collect(),
                        eigenvalues: f.eigenvalues.iter().take(keep).copied().collect(),
                        n_columns: f.columns.len(),
                        r_range: f.r.first().copied().zip(f.r.last().copied()),
                        error: None,
                    },
                );
            }
            Err(e) => {
                for img in images.iter_mut() {
                    for k in 1..=config.n_pcs {
                        img.set(&format!("{name}.PC{k}"), f64::NAN, Some(format!("FPCA failed: {e}")));
                    }
                }
                report.insert(
                    name,
                    FpcaStat {
                        n_retained: 0,
                        variance_explained: Vec::new(),
                        eigenvalues: Vec::new(),
                        n_columns: 0,
                        r_range: None,
                        error: Some(e.to_string()),
                    },
                );
            }
        }
    }
    Ok(report)
}
