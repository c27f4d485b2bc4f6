//! Full feature extraction for one image, cross-image FPCA and the output
//! artifacts (features.csv, curves.json, manifest.json, diagram.csv).

mod extract;
mod output;
mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::areal::{Contiguity, DEFAULT_Q, MAX_Q};
use crate::error::{Error, Result};
use crate::functional::{DEFAULT_MIN_COMPONENTS, DEFAULT_VAR_TARGET};
use crate::pattern::{CellType, DEFAULT_BINS};
use crate::summaries::{EdgeCorrection, DEFAULT_PCF_BANDWIDTH};
use crate::topology::DEFAULT_LANDMARK_CAP;

pub use extract::{
    extract_features, extract_features_on, fpca_across_images, shared_rgrid, Extraction, FpcaReport, FpcaStat,
    ImageMetadata, TopologyMeta,
};
pub use output::{curves_json, diagram_csv, features_csv, features_json, manifest_json};
pub use schema::{curve_names, feature_schema, FeatureKind, FeatureSpec};

/// At most this many cell types can be analysed together.
pub const MAX_TYPES: usize = 3;

/// Tissue role of a selected cell type. Feature names use the one-letter code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(alias = "tumor")]
    T,
    #[serde(alias = "immune")]
    I,
    #[serde(alias = "stromal")]
    S,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::T, Role::I, Role::S];

    pub fn code(self) -> &'static str {
        match self {
            Role::T => "T",
            Role::I => "I",
            Role::S => "S",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::T => "tumor",
            Role::I => "immune",
            Role::S => "stromal",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Summaries,
    Areal,
    Topology,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Summaries, Family::Areal, Family::Topology];
}

/// Everything that determines the emitted features besides the input points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub selected_types: Vec<CellType>,
    /// Explicit roles; unlisted types take the remaining roles in T, I, S order.
    pub roles: BTreeMap<CellType, Role>,
    pub feature_families: BTreeSet<Family>,
    pub q: usize,
    pub contiguity: Contiguity,
    pub presence_threshold: f64,
    pub bins: usize,
    /// `None` means a quarter of the shorter window side.
    pub rmax: Option<f64>,
    pub seed: u64,
    /// Correction for K, L, PCF and the mark connection function.
    pub correction: EdgeCorrection,
    /// Correction for G, F and J.
    pub nn_correction: EdgeCorrection,
    pub pcf_bandwidth: usize,
    pub f_resolution: Option<usize>,
    pub max_dim: usize,
    pub max_eps: Option<f64>,
    pub landmark_cap: usize,
    /// Number of `.PC<k>` columns per functional statistic.
    pub n_pcs: usize,
    pub var_target: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            selected_types: Vec::new(),
            roles: BTreeMap::new(),
            feature_families: Family::ALL.into_iter().collect(),
            q: DEFAULT_Q,
            contiguity: Contiguity::Queen,
            presence_threshold: 1.0,
            bins: DEFAULT_BINS,
            rmax: None,
            seed: 0,
            correction: EdgeCorrection::Isotropic,
            nn_correction: EdgeCorrection::Border,
            pcf_bandwidth: DEFAULT_PCF_BANDWIDTH,
            f_resolution: None,
            max_dim: 2,
            max_eps: None,
            landmark_cap: DEFAULT_LANDMARK_CAP,
            n_pcs: DEFAULT_MIN_COMPONENTS,
            var_target: DEFAULT_VAR_TARGET,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadConfig(msg.into())
}

impl AnalysisConfig {
    pub fn with_types<S: AsRef<str>>(types: &[S]) -> Result<Self> {
        let selected_types = types.iter().map(CellType::new).collect::<Result<Vec<_>>>()?;
        let cfg = Self { selected_types, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.selected_types.len();
        if n == 0 {
            return Err(bad("select at least one cell type"));
        }
        if n > MAX_TYPES {
            return Err(bad(format!("at most three types can be selected, got {n}")));
        }
        if self.selected_types.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(bad("selected types must be distinct"));
        }
        if let Some(t) = self.roles.keys().find(|t| !self.selected_types.contains(t)) {
            return Err(bad(format!("role given for unselected type {t}")));
        }
        if self.roles.values().collect::<BTreeSet<_>>().len() != self.roles.len() {
            return Err(bad("roles must be distinct"));
        }
        if self.feature_families.is_empty() {
            return Err(bad("select at least one feature family"));
        }
        if !(2..=MAX_Q).contains(&self.q) {
            return Err(bad(format!("q must lie in 2..={MAX_Q}, got {}", self.q)));
        }
        if !(self.presence_threshold.is_finite() && self.presence_threshold > 0.0) {
            return Err(bad("presence threshold must be positive"));
        }
        if self.bins < 2 {
            return Err(bad("bins must be at least 2"));
        }
        if let Some(r) = self.rmax {
            if !(r.is_finite() && r > 0.0) {
                return Err(bad(format!("rmax must be positive, got {r}")));
            }
        }
        if self.nn_correction == EdgeCorrection::Isotropic {
            return Err(bad("nn_correction must be none or border"));
        }
        if self.pcf_bandwidth == 0 {
            return Err(bad("pcf_bandwidth must be at least 1"));
        }
        if self.f_resolution == Some(0) {
            return Err(bad("f_resolution must be positive"));
        }
        if !(1..=2).contains(&self.max_dim) {
            return Err(bad("max_dim must be 1 or 2"));
        }
        if let Some(e) = self.max_eps {
            if !(e.is_finite() && e >= 0.0) {
                return Err(bad("max_eps must be finite and nonnegative"));
            }
        }
        if self.landmark_cap == 0 {
            return Err(bad("landmark_cap must be positive"));
        }
        if self.n_pcs == 0 {
            return Err(bad("n_pcs must be positive"));
        }
        if !(self.var_target > 0.0 && self.var_target <= 1.0) {
            return Err(bad("var_target must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn has(&self, f: Family) -> bool {
        self.feature_families.contains(&f)
    }

    /// Selected types with their roles, in canonical role order T, I, S.
    pub fn role_assignment(&self) -> Result<Vec<(Role, CellType)>> {
        self.validate()?;
        let mut free = Role::ALL.iter().copied().filter(|r| !self.roles.values().any(|x| x == r));
        let mut out: Vec<(Role, CellType)> = self
            .selected_types
            .iter()
            .map(|t| (self.roles.get(t).copied().unwrap_or_else(|| free.next().unwrap_or(Role::S)), t.clone()))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Roles in canonical order, independent of the labels.
    pub fn roles_sorted(&self) -> Result<Vec<Role>> {
        Ok(self.role_assignment()?.into_iter().map(|(r, _)| r).collect())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
