//! Functional summary statistics: the K/L/G/F/J/PCF family with cross-type
//! and mark-based variants.

mod edge;
mod kfunc;
mod nearest;
mod pcf;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{CellType, DistanceGrid};

pub use edge::{circle_fraction_inside, isotropic_weight};
pub use kfunc::{k_cross, k_directional, k_function, k_mark_weighted, l_function};
pub use nearest::{
    f_cross, f_function, g_cross, g_function, j_function, nearest_neighbor_distances, reference_lattice,
};
pub use pcf::{mark_connection, mark_connection_from, pcf, DEFAULT_PCF_BANDWIDTH};

/// Denominator guard for J and the mark connection function.
pub const EPS_DIV: f64 = 1e-9;

/// Edge-correction scheme attached to a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EdgeCorrection {
    None,
    #[default]
    Isotropic,
    Border,
}

impl fmt::Display for EdgeCorrection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeCorrection::None => "none",
            EdgeCorrection::Isotropic => "isotropic",
            EdgeCorrection::Border => "border",
        })
    }
}

/// A statistic evaluated on a distance grid next to its CSR reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCurve {
    pub name: String,
    pub r: DistanceGrid,
    pub estimate: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub correction: EdgeCorrection,
}

impl SummaryCurve {
    pub fn len(&self) -> usize {
        self.estimate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimate.is_empty()
    }

    /// All-NaN placeholder on `r`.
    pub fn undefined(name: impl Into<String>, r: &DistanceGrid, correction: EdgeCorrection) -> Self {
        let n = r.count();
        Self { name: name.into(), r: r.clone(), estimate: vec![f64::NAN; n], theoretical: vec![f64::NAN; n], correction }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `r,estimate,theoretical` rows; NaN becomes an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,estimate,theoretical\n");
        for ((r, e), t) in self.r.values().iter().zip(&self.estimate).zip(&self.theoretical) {
            out.push_str(&format!("{},{},{}\n", r, fmt_value(*e), fmt_value(*t)));
        }
        out
    }
}

pub(crate) fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

type PairWeight = dyn Fn(&CellType, &CellType) -> f64 + Send + Sync;

/// Weight applied to a mark pair by the mark-weighted K-function.
#[derive(Clone)]
pub enum MarkWeightFn {
    /// `f(a, b) = a * b` on marks parsed as numbers.
    Product,
    Custom(Arc<PairWeight>),
}

impl Default for MarkWeightFn {
    fn default() -> Self {
        MarkWeightFn::Product
    }
}

impl fmt::Debug for MarkWeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkWeightFn::Product => f.write_str("Product"),
            MarkWeightFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl MarkWeightFn {
    pub fn custom(f: impl Fn(&CellType, &CellType) -> f64 + Send + Sync + 'static) -> Self {
        MarkWeightFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, a: &CellType, b: &CellType) -> Result<f64> {
        let v = match self {
            MarkWeightFn::Product => numeric_mark(a)? * numeric_mark(b)?,
            MarkWeightFn::Custom(f) => f(a, b),
        };
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::BadMarkWeight(v))
        }
    }
}

fn numeric_mark(m: &CellType) -> Result<f64> {
    m.as_str().parse::<f64>().map_err(|_| Error::NonNumericMark(m.to_string()))
}

pub(crate) fn check_same_grid(a: &SummaryCurve, b: &SummaryCurve) -> Result<()> {
    if a.r != b.r || a.estimate.len() != b.estimate.len() {
        return Err(Error::GridMismatch(format!("{} and {} use different distance grids", a.name, b.name)));
    }
    Ok(())
}
