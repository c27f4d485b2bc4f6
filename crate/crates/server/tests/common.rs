#![allow(dead_code)]

use sashimi_core::generators::{assign_marks, poisson_csr, thomas_cluster};
use sashimi_core::{CellType, ObservationWindow};

/// Small 3-type clustered pattern as CSV text.
pub fn toy_csv(seed: u64, parents: f64) -> String {
    let w = ObservationWindow::new(0.0, 200.0, 0.0, 200.0).unwrap();
    let pts = thomas_cluster(parents / w.area(), 12.0, 6.0, &w, seed).unwrap();
    let labels: Vec<(CellType, f64)> =
        ["tumor", "immune", "stromal"].iter().map(|l| (CellType::new(l).unwrap(), 1.0)).collect();
    assign_marks(pts, &labels, w, seed).unwrap().to_csv()
}

pub fn csr_csv(n: f64, types: &[&str], seed: u64) -> String {
    let w = ObservationWindow::new(0.0, 1000.0, 0.0, 1000.0).unwrap();
    let pts = poisson_csr(n / w.area(), &w, seed).unwrap();
    let labels: Vec<(CellType, f64)> = types.iter().map(|l| (CellType::new(l).unwrap(), 1.0)).collect();
    assign_marks(pts, &labels, w, seed).unwrap().to_csv()
}
