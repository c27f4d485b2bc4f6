//! Canonical feature and curve names. The schema depends on the config only.

use serde::{Deserialize, Serialize};

use super::{AnalysisConfig, Family, Role};
use crate::error::Result;
use crate::topology::PersistenceSummary;

/// Univariate curve statistics, in emission order.
pub(crate) const UNI_STATS: [&str; 6] = ["K", "L", "G", "F", "J", "PCF"];
pub(crate) const TYPE_SCALARS: [&str; 5] = ["CE", "MoranI", "GearyC", "QuadX2", "QuadX2P"];
pub(crate) const PAIR_SCALARS: [&str; 10] =
    ["LeeL", "JoinPP", "JoinPQ", "JoinQQ", "Tanimoto", "Jaccard", "Dice", "MH", "BC", "Cosine"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Computed from one image.
    Scalar,
    /// FPCA score across images.
    Fpca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub family: Family,
    pub kind: FeatureKind,
    /// Curve or index the value derives from.
    pub statistic: String,
    pub roles: Vec<Role>,
    pub description: String,
}

pub(crate) fn pair_code(a: Role, b: Role) -> String {
    format!("{}2{}", a.code(), b.code())
}

pub(crate) fn ordered_pairs(roles: &[Role]) -> Vec<(Role, Role)> {
    roles.iter().flat_map(|&a| roles.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect()
}

pub(crate) fn unordered_pairs(roles: &[Role]) -> Vec<(Role, Role)> {
    roles.iter().enumerate().flat_map(|(i, &a)| roles[i + 1..].iter().map(move |&b| (a, b))).collect()
}

pub(crate) fn witness_prefix(a: Role, b: Role) -> String {
    format!("witness_{}_{}", a.name(), b.name())
}

fn describe_curve(name: &str) -> String {
    let mut parts = name.split('.');
    let stat = parts.next().unwrap_or_default();
    let what = match stat {
        "K" => "Ripley K",
        "L" => "Besag L",
        "G" => "nearest-neighbour distribution G",
        "F" => "empty-space function F",
        "J" => "J-function",
        "PCF" => "pair correlation function",
        "MK" => "mark connection function",
        _ => stat,
    };
    let rest: Vec<&str> = parts.collect();
    match rest.as_slice() {
        ["REP"] => format!("{what} of all selected types pooled"),
        ["REP", t] => format!("{what} of type {t}"),
        ["CROSS", p] | ["CONN", p] => format!("cross-type {what} from {}", p.replace('2', " to ")),
        _ => what.to_string(),
    }
}

/// Functional statistics emitted as curves, in emission order.
pub fn curve_names(config: &AnalysisConfig) -> Result<Vec<String>> {
    let roles = config.roles_sorted()?;
    if !config.has(Family::Summaries) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for stat in UNI_STATS {
        out.push(format!("{stat}.REP"));
        out.extend(roles.iter().map(|r| format!("{stat}.REP.{r}")));
    }
    let pairs = ordered_pairs(&roles);
    for stat in UNI_STATS {
        out.extend(pairs.iter().map(|&(a, b)| format!("{stat}.CROSS.{}", pair_code(a, b))));
    }
    out.extend(pairs.iter().map(|&(a, b)| format!("MK.CONN.{}", pair_code(a, b))));
    Ok(out)
}

/// Every feature column for `config`, in output order.
pub fn feature_schema(config: &AnalysisConfig) -> Result<Vec<FeatureSpec>> {
    let roles = config.roles_sorted()?;
    let mut out = Vec::new();
    for curve in curve_names(config)? {
        let curve_roles: Vec<Role> = Role::ALL
            .into_iter()
            .filter(|r| roles.contains(r) && curve.rsplit('.').next().is_some_and(|s| s.contains(r.code())))
            .collect();
        let curve_roles = if curve.ends_with(".REP") { roles.clone() } else { curve_roles };
        for k in 1..=config.n_pcs {
            out.push(FeatureSpec {
                name: format!("{curve}.PC{k}"),
                family: Family::Summaries,
                kind: FeatureKind::Fpca,
                statistic: curve.clone(),
                roles: curve_roles.clone(),
                description: format!("score {k} of {}", describe_curve(&curve)),
            });
        }
    }
    if config.has(Family::Areal) {
        for &r in &roles {
            for stat in TYPE_SCALARS {
                out.push(FeatureSpec {
                    name: format!("{stat}.{r}"),
                    family: Family::Areal,
                    kind: FeatureKind::Scalar,
                    statistic: stat.into(),
                    roles: vec![r],
                    description: format!("{stat} of type {r}"),
                });
            }
        }
        for (a, b) in unordered_pairs(&roles) {
            for stat in PAIR_SCALARS {
                out.push(FeatureSpec {
                    name: format!("{stat}.{a}{b}"),
                    family: Family::Areal,
                    kind: FeatureKind::Scalar,
                    statistic: stat.into(),
                    roles: vec![a, b],
                    description: format!("{stat} between types {a} and {b}"),
                });
            }
        }
    }
    if config.has(Family::Topology) {
        for (a, b) in unordered_pairs(&roles) {
            let prefix = witness_prefix(a, b);
            for dim in 0..=1 {
                for name in PersistenceSummary::feature_names(&prefix, dim) {
                    out.push(FeatureSpec {
                        name,
                        family: Family::Topology,
                        kind: FeatureKind::Scalar,
                        statistic: format!("{prefix}_h{dim}"),
                        roles: vec![a, b],
                        description: format!("H{dim} persistence, landmarks {}, witnesses {}", a.name(), b.name()),
                    });
                }
            }
        }
    }
    Ok(out)
}
