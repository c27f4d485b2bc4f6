//! Seeded point-process simulators and CSR envelopes.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`; simulation
//! `i` of an envelope runs on stream `i + 1` of the same seed, so results are
//! reproducible bit for bit on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::PointIndex;
use crate::pattern::{CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point};
use crate::summaries::{
    f_function, g_function, j_function, k_function, l_function, pcf, EdgeCorrection, SummaryCurve,
    DEFAULT_PCF_BANDWIDTH,
};

/// Generator with a fixed seed and stream.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_rate(v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::BadIntensity(v))
    }
}

fn poisson_count(mean: f64, rng: &mut ChaCha8Rng) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|_| Error::BadIntensity(mean))?;
    Ok(d.sample(rng) as usize)
}

fn uniform_in(window: &ObservationWindow, rng: &mut ChaCha8Rng) -> Point {
    Point::new(
        window.x_min() + rng.random::<f64>() * window.width(),
        window.y_min() + rng.random::<f64>() * window.height(),
    )
}

fn csr_with(intensity: f64, window: &ObservationWindow, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    check_rate(intensity)?;
    let n = poisson_count(intensity * window.area(), rng)?;
    Ok((0..n).map(|_| uniform_in(window, rng)).collect())
}

/// Homogeneous Poisson process.
pub fn poisson_csr(intensity: f64, window: &ObservationWindow, seed: u64) -> Result<Vec<Point>> {
    csr_with(intensity, window, &mut rng_for(seed, 0))
}

/// Thomas cluster process: Poisson parents in the window, Poisson offspring
/// with isotropic Gaussian displacement; offspring outside the window are dropped.
pub fn thomas_cluster(
    parent_intensity: f64,
    mean_offspring: f64,
    sigma: f64,
    window: &ObservationWindow,
    seed: u64,
) -> Result<Vec<Point>> {
    check_rate(mean_offspring)?;
    check_rate(sigma)?;
    let mut rng = rng_for(seed, 0);
    let parents = csr_with(parent_intensity, window, &mut rng)?;
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::BadIntensity(sigma))?;
    let mut out = Vec::new();
    for p in parents {
        let k = poisson_count(mean_offspring, &mut rng)?;
        for _ in 0..k {
            let c = Point::new(p.x + normal.sample(&mut rng), p.y + normal.sample(&mut rng));
            if window.contains(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Matern type-II hard-core thinning of a CSR proposal. A proposal survives
/// when no older proposal lies strictly closer than `hardcore_r`.
/// The proposal set is exactly `poisson_csr(proposal_intensity, window, seed)`.
pub fn matern_ii(proposal_intensity: f64, hardcore_r: f64, window: &ObservationWindow, seed: u64) -> Result<Vec<Point>> {
    check_rate(hardcore_r)?;
    let proposals = poisson_csr(proposal_intensity, window, seed)?;
    if hardcore_r == 0.0 {
        return Ok(proposals);
    }
    let mut age_rng = rng_for(seed, 1);
    let ages: Vec<f64> = proposals.iter().map(|_| age_rng.random::<f64>()).collect();
    let index = PointIndex::new(&proposals, hardcore_r);
    let older = |j: usize, i: usize| (ages[j], j) < (ages[i], i);
    Ok(proposals
        .iter()
        .enumerate()
        .filter(|&(i, p)| {
            let mut blocked = false;
            index.for_each_within(p, hardcore_r, |j, d| blocked |= j != i && d < hardcore_r && older(j, i));
            !blocked
        })
        .map(|(_, p)| *p)
        .collect())
}

/// Independent random labels drawn with the given relative weights.
pub fn assign_marks(
    points: Vec<Point>,
    labels: &[(CellType, f64)],
    window: ObservationWindow,
    seed: u64,
) -> Result<MarkedPointPattern> {
    if labels.is_empty() || labels.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::BadConfig("label weights must be finite and nonnegative".into()));
    }
    let total: f64 = labels.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::BadConfig("label weights sum to zero".into()));
    }
    let mut rng = rng_for(seed, 2);
    let marks = points
        .iter()
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for (t, w) in labels {
                acc += w;
                if u < acc {
                    return t.clone();
                }
            }
            labels.last().map(|(t, _)| t.clone()).unwrap_or_else(|| unreachable!())
        })
        .collect();
    MarkedPointPattern::new(points, marks, window)
}

/// Statistic used by [`csr_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EnvelopeStatistic {
    K,
    L,
    G,
    F,
    J,
    Pcf,
}

impl EnvelopeStatistic {
    pub fn compute(self, points: &[Point], window: &ObservationWindow, rgrid: &DistanceGrid) -> Result<SummaryCurve> {
        let nn = EdgeCorrection::Border;
        match self {
            Self::K => k_function(points, window, rgrid, EdgeCorrection::Isotropic),
            Self::L => l_function(&k_function(points, window, rgrid, EdgeCorrection::Isotropic)?),
            Self::G => g_function(points, window, rgrid, nn),
            Self::F => f_function(points, window, rgrid, nn, None),
            Self::J => j_function(&g_function(points, window, rgrid, nn)?, &f_function(points, window, rgrid, nn, None)?),
            Self::Pcf => pcf(&k_function(points, window, rgrid, EdgeCorrection::Isotropic)?, DEFAULT_PCF_BANDWIDTH),
        }
    }
}

/// Pointwise simulation band around an observed curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub name: String,
    pub rgrid: DistanceGrid,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub observed: SummaryCurve,
    pub n_sim: usize,
    pub rank: usize,
}

impl Envelope {
    /// Fraction of grid points where the observed curve lies within `[lo, hi]`,
    /// over points where all three are defined.
    pub fn coverage(&self) -> f64 {
        let (mut inside, mut total) = (0usize, 0usize);
        for ((o, l), h) in self.observed.estimate.iter().zip(&self.lo).zip(&self.hi) {
            if o.is_finite() && l.is_finite() && h.is_finite() {
                total += 1;
                inside += usize::from(l <= o && o <= h);
            }
        }
        if total == 0 {
            f64::NAN
        } else {
            inside as f64 / total as f64
        }
    }
}

/// Band from precomputed simulated curves: the `rank`-th smallest and largest
/// finite value at each grid point (rank 1 is min/max).
pub fn envelope_from_curves(observed: SummaryCurve, sims: &[SummaryCurve], rank: usize) -> Result<Envelope> {
    if sims.is_empty() {
        return Err(Error::BadNSim);
    }
    if rank == 0 || rank > sims.len() {
        return Err(Error::BadConfig(format!("envelope rank {rank} outside 1..={}", sims.len())));
    }
    let m = observed.len();
    if let Some(s) = sims.iter().find(|s| s.r != observed.r) {
        return Err(Error::GridMismatch(format!("simulated {} on a different grid", s.name)));
    }
    let (mut lo, mut hi) = (vec![f64::NAN; m], vec![f64::NAN; m]);
    for k in 0..m {
        let mut vals: Vec<f64> = sims.iter().map(|s| s.estimate[k]).filter(|v| v.is_finite()).collect();
        if vals.len() >= rank {
            vals.sort_by(f64::total_cmp);
            lo[k] = vals[rank - 1];
            hi[k] = vals[vals.len() - rank];
        }
    }
    Ok(Envelope {
        name: observed.name.clone(),
        rgrid: observed.r.clone(),
        lo,
        hi,
        observed,
        n_sim: sims.len(),
        rank,
    })
}

/// CSR envelope at the observed intensity in the observed window.
/// Simulations whose statistic is undefined (too few points) are skipped.
pub fn csr_envelope(
    points: &[Point],
    window: &ObservationWindow,
    statistic: EnvelopeStatistic,
    rgrid: &DistanceGrid,
    n_sim: usize,
    seed: u64,
    rank: usize,
) -> Result<Envelope> {
    if n_sim == 0 {
        return Err(Error::BadNSim);
    }
    let observed = statistic.compute(points, window, rgrid)?;
    let intensity = points.len() as f64 / window.area();
    let sims: Vec<SummaryCurve> = (0..n_sim as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<SummaryCurve>> {
            let pts = csr_with(intensity, window, &mut rng_for(seed, i + 1))?;
            Ok(statistic.compute(&pts, window, rgrid).ok())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut env = envelope_from_curves(observed, &sims, rank.min(sims.len().max(1)))?;
    env.n_sim = n_sim;
    Ok(env)
}
