use serde_json::{json, Map, Value};

use super::extract::{Extraction, FpcaReport};
use super::{feature_schema, AnalysisConfig};
use crate::error::Result;
use crate::summaries::fmt_value;

pub const SCHEMA_VERSION: u32 = 1;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per image; header `image,<feature names>`; NaN as an empty field.
pub fn features_csv(images: &[Extraction]) -> String {
    let mut out = String::from("image");
    if let Some(first) = images.first() {
        for n in &first.names {
            out.push(',');
            out.push_str(n);
        }
    }
    out.push('\n');
    for img in images {
        out.push_str(&csv_field(&img.image));
        for v in &img.values {
            out.push(',');
            out.push_str(&fmt_value(*v));
        }
        out.push('\n');
    }
    out
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// `{"columns": [...], "rows": [{"image": .., "values": [...]}]}`, NaN as null.
pub fn features_json(images: &[Extraction]) -> String {
    let columns = images.first().map(|e| e.names.clone()).unwrap_or_default();
    let rows: Vec<Value> = images
        .iter()
        .map(|e| json!({"image": e.image, "values": e.values.iter().map(|&v| num(v)).collect::<Vec<_>>()}))
        .collect();
    json!({"columns": columns, "rows": rows}).to_string()
}

/// `statistic -> {r, estimate, theoretical, correction}` for one image.
pub fn curves_json(image: &Extraction) -> String {
    let mut m = Map::new();
    for (name, c) in &image.curves {
        let arr = |xs: &[f64]| Value::Array(xs.iter().map(|&v| num(v)).collect());
        m.insert(
            name.clone(),
            json!({
                "r": arr(c.r.values()),
                "estimate": arr(&c.estimate),
                "theoretical": arr(&c.theoretical),
                "correction": c.correction,
            }),
        );
    }
    Value::Object(m).to_string()
}

/// `pair,dim,birth,death,capped` for every witness diagram of one image.
pub fn diagram_csv(image: &Extraction) -> String {
    let mut out = String::from("pair,dim,birth,death,capped\n");
    for (prefix, d) in &image.diagrams {
        for iv in &d.intervals {
            out.push_str(&format!("{prefix},{},{},{},{}\n", iv.dim, iv.birth, iv.death, iv.capped));
        }
    }
    out
}

/// Schema with the provenance of every column, plus per-image metadata.
pub fn manifest_json(config: &AnalysisConfig, images: &[Extraction], fpca: Option<&FpcaReport>) -> Result<String> {
    let schema = feature_schema(config)?;
    let curves = super::curve_names(config)?;
    let roles: Map<String, Value> = config
        .role_assignment()?
        .into_iter()
        .map(|(r, t)| (r.code().to_string(), json!({"label": t, "name": r.name()})))
        .collect();
    let per_image: Vec<Value> = images
        .iter()
        .map(|e| {
            json!({
                "image": e.image,
                "metadata": e.metadata,
                "nan_reasons": e.reasons,
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "config_hash": config.hash(),
        "roles": roles,
        "n_features": schema.len(),
        "features": schema,
        "curves": curves,
        "rgrid": images.first().map(|e| json!({"rmax": e.rgrid.rmax(), "bins": e.rgrid.count()})),
        "images": per_image,
        "fpca": fpca,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("manifest serialises"))
}
