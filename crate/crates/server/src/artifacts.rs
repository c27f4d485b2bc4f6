//! The artifact set produced for one extraction run, shared by the CLI and the
//! HTTP service so both paths emit the same bytes.

use std::collections::BTreeSet;

use sashimi_core::pipeline::{
    curves_json, diagram_csv, extract_features_on, features_csv, features_json, fpca_across_images, manifest_json,
    shared_rgrid, AnalysisConfig, MAX_TYPES,
};
use sashimi_core::{CellType, Error, MarkedPointPattern, ObservationWindow, Result};

/// Curve and diagram files for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageArtifacts {
    pub image: String,
    pub curves_json: String,
    pub diagram_csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub features_csv: String,
    pub features_json: String,
    pub manifest_json: String,
    pub images: Vec<ImageArtifacts>,
}

/// Extract every image on a shared grid, run the cross-image FPCA when there
/// are at least two images, and render the artifacts.
///
/// `progress` receives the completed fraction after each image.
pub fn compute(
    patterns: &[(String, MarkedPointPattern)],
    config: &AnalysisConfig,
    progress: &(dyn Fn(f64) + Sync),
) -> Result<Artifacts> {
    config.validate()?;
    let windows: Vec<ObservationWindow> = patterns.iter().map(|(_, p)| *p.window()).collect();
    let rgrid = shared_rgrid(&windows, config)?;
    let total = patterns.len() as f64 + 1.0;
    let mut extractions = Vec::with_capacity(patterns.len());
    for (i, (name, pattern)) in patterns.iter().enumerate() {
        extractions.push(extract_features_on(pattern, config, &rgrid)?.named(name.clone()));
        progress((i + 1) as f64 / total);
    }
    let report = if extractions.len() >= 2 { Some(fpca_across_images(&mut extractions, config)?) } else { None };
    let images = extractions
        .iter()
        .map(|e| ImageArtifacts { image: e.image.clone(), curves_json: curves_json(e), diagram_csv: diagram_csv(e) })
        .collect();
    let out = Artifacts {
        features_csv: features_csv(&extractions),
        features_json: features_json(&extractions),
        manifest_json: manifest_json(config, &extractions, report.as_ref())?,
        images,
    };
    progress(1.0);
    Ok(out)
}

/// Fill an empty type selection with every label in the inputs, when there
/// are few enough of them.
pub fn resolve_types(config: &mut AnalysisConfig, patterns: &[(String, MarkedPointPattern)]) -> Result<()> {
    if !config.selected_types.is_empty() {
        return Ok(());
    }
    let labels: BTreeSet<CellType> = patterns.iter().flat_map(|(_, p)| p.types().iter().cloned()).collect();
    if labels.len() > MAX_TYPES {
        return Err(Error::BadConfig(format!(
            "at most three types can be selected; the input has {} ({}), choose up to three",
            labels.len(),
            labels.iter().map(CellType::as_str).collect::<Vec<_>>().join(", ")
        )));
    }
    config.selected_types = labels.into_iter().collect();
    Ok(())
}
