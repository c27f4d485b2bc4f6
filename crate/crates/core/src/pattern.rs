//! Marked point patterns, observation windows and distance grids.
//!
//! A pattern stores coordinates together with an interned cell-type mark per
//! point. Patterns are immutable once built; subsets and relabelings produce
//! new patterns.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upload limit for CSV input (4 MiB).
pub const DEFAULT_MAX_BYTES: usize = 4 * 1024 * 1024;

/// Default number of evaluation radii.
pub const DEFAULT_BINS: usize = 512;

/// Fraction of the bounding-box extent added on each side of an inferred window.
const WINDOW_PAD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct ObservationWindow {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl TryFrom<WindowRepr> for ObservationWindow {
    type Error = Error;

    fn try_from(w: WindowRepr) -> Result<Self> {
        ObservationWindow::new(w.x_min, w.x_max, w.y_min, w.y_max)
    }
}

impl From<ObservationWindow> for WindowRepr {
    fn from(w: ObservationWindow) -> Self {
        WindowRepr { x_min: w.x_min, x_max: w.x_max, y_min: w.y_min, y_max: w.y_max }
    }
}

impl ObservationWindow {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::BadWindow("bounds must be finite".into()));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::BadWindow(format!(
                "need x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn unit_square() -> Self {
        Self { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0 }
    }

    /// Tight bounding box of `points`, expanded by 1% of its extent on every side.
    ///
    /// A degenerate extent (all points sharing a coordinate) borrows the other
    /// axis' extent, and falls back to a half-unit pad when both are zero.
    pub fn infer(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let fallback = if w.max(h) > 0.0 { WINDOW_PAD * w.max(h) } else { 0.5 };
        let px = if w > 0.0 { WINDOW_PAD * w } else { fallback };
        let py = if h > 0.0 { WINDOW_PAD * h } else { fallback };
        Self::new(x0 - px, x1 + px, y0 - py, y1 + py)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Distance from `p` to the nearest window edge (0 on the boundary).
    #[inline]
    pub fn border_distance(&self, p: &Point) -> f64 {
        (p.x - self.x_min).min(self.x_max - p.x).min(p.y - self.y_min).min(self.y_max - p.y)
    }

    /// Multiply all bounds by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.x_min * c, self.x_max * c, self.y_min * c, self.y_max * c)
    }
}

/// Categorical cell-type label. Labels are trimmed and compared case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CellType(String);

impl CellType {
    pub fn new(label: impl AsRef<str>) -> Result<Self> {
        let t = label.as_ref().trim();
        if t.is_empty() {
            return Err(Error::BadLabel(label.as_ref().to_string()));
        }
        Ok(Self(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for CellType {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        CellType::new(s)
    }
}

impl From<CellType> for String {
    fn from(c: CellType) -> String {
        c.0
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Points with categorical marks inside a rectangular window.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPointPattern {
    points: Vec<Point>,
    marks: Vec<u32>,
    types: Vec<CellType>,
    window: ObservationWindow,
    window_inferred: bool,
}

impl MarkedPointPattern {
    pub fn new(points: Vec<Point>, marks: Vec<CellType>, window: ObservationWindow) -> Result<Self> {
        if points.len() != marks.len() {
            return Err(Error::BadConfig(format!(
                "{} points but {} marks",
                points.len(),
                marks.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(Error::PointOutsideWindow { x: p.x, y: p.y });
        }
        let mut types: Vec<CellType> = Vec::new();
        let mut lookup: BTreeMap<CellType, u32> = BTreeMap::new();
        let marks = marks
            .into_iter()
            .map(|m| {
                *lookup.entry(m).or_insert_with_key(|k| {
                    types.push(k.clone());
                    (types.len() - 1) as u32
                })
            })
            .collect();
        Ok(Self { points, marks, types, window, window_inferred: false })
    }

    /// Unmarked pattern: every point carries the same label.
    pub fn unmarked(points: Vec<Point>, label: &str, window: ObservationWindow) -> Result<Self> {
        let t = CellType::new(label)?;
        let marks = vec![t; points.len()];
        Self::new(points, marks, window)
    }

    /// Build a pattern whose window is inferred from the points' bounding box.
    pub fn with_inferred_window(points: Vec<Point>, marks: Vec<CellType>) -> Result<Self> {
        let window = ObservationWindow::infer(&points)?;
        let mut p = Self::new(points, marks, window)?;
        p.window_inferred = true;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    pub fn window_inferred(&self) -> bool {
        self.window_inferred
    }

    /// Observed types in order of first appearance.
    pub fn types(&self) -> &[CellType] {
        &self.types
    }

    pub fn mark(&self, i: usize) -> &CellType {
        &self.types[self.marks[i] as usize]
    }

    pub(crate) fn mark_ids(&self) -> &[u32] {
        &self.marks
    }

    pub fn marks(&self) -> impl Iterator<Item = &CellType> + '_ {
        self.marks.iter().map(|&m| &self.types[m as usize])
    }

    pub fn count_of(&self, t: &CellType) -> usize {
        match self.type_index(t) {
            Some(k) => self.marks.iter().filter(|&&m| m == k).count(),
            None => 0,
        }
    }

    /// Points per type, sorted by label.
    pub fn type_counts(&self) -> BTreeMap<CellType, usize> {
        let mut counts = vec![0usize; self.types.len()];
        for &m in &self.marks {
            counts[m as usize] += 1;
        }
        self.types.iter().cloned().zip(counts).collect()
    }

    pub fn intensity(&self) -> f64 {
        self.len() as f64 / self.window.area()
    }

    pub fn intensity_of(&self, t: &CellType) -> f64 {
        self.count_of(t) as f64 / self.window.area()
    }

    fn type_index(&self, t: &CellType) -> Option<u32> {
        self.types.iter().position(|x| x == t).map(|k| k as u32)
    }

    /// Coordinates of the points carrying mark `t` (empty when `t` is absent).
    pub fn coords_of(&self, t: &CellType) -> Vec<Point> {
        match self.type_index(t) {
            Some(k) => self
                .points
                .iter()
                .zip(&self.marks)
                .filter(|(_, &m)| m == k)
                .map(|(p, _)| *p)
                .collect(),
            None => Vec::new(),
        }
    }

    /// The sub-pattern of type `t`, sharing this pattern's window.
    pub fn subset_by_type(&self, t: &CellType) -> MarkedPointPattern {
        let points = self.coords_of(t);
        let n = points.len();
        let (marks, types) = if n > 0 { (vec![0; n], vec![t.clone()]) } else { (Vec::new(), Vec::new()) };
        MarkedPointPattern {
            points,
            marks,
            types,
            window: self.window,
            window_inferred: self.window_inferred,
        }
    }

    /// Points whose mark is any of `ts`, original order preserved.
    pub fn subset_by_types(&self, ts: &[CellType]) -> MarkedPointPattern {
        let keep: Vec<u32> = ts.iter().filter_map(|t| self.type_index(t)).collect();
        let mut points = Vec::new();
        let mut marks = Vec::new();
        for (p, &m) in self.points.iter().zip(&self.marks) {
            if keep.contains(&m) {
                points.push(*p);
                marks.push(self.types[m as usize].clone());
            }
        }
        let mut out = MarkedPointPattern::new(points, marks, self.window).expect("subset of a valid pattern");
        out.window_inferred = self.window_inferred;
        out
    }

    /// Same points and marks inside a different window.
    pub fn with_window(&self, window: ObservationWindow) -> Result<Self> {
        if let Some(p) = self.points.iter().find(|p| !window.contains(p)) {
            return Err(Error::PointOutsideWindow { x: p.x, y: p.y });
        }
        Ok(Self { window, window_inferred: false, ..self.clone() })
    }

    /// Rename marks through `rename`; labels missing from the map are kept.
    pub fn relabel(&self, rename: &BTreeMap<CellType, CellType>) -> Result<Self> {
        let marks: Vec<CellType> = self.marks().map(|m| rename.get(m).unwrap_or(m).clone()).collect();
        let mut out = Self::new(self.points.clone(), marks, self.window)?;
        out.window_inferred = self.window_inferred;
        Ok(out)
    }

    /// Serialise as `x,y,type` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 24 + 9);
        out.push_str("x,y,type\n");
        for (p, m) in self.points.iter().zip(self.marks()) {
            out.push_str(&format!("{},{},{}\n", p.x, p.y, csv_field(m.as_str())));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parse `x,y,type` CSV into a pattern with an inferred window.
///
/// A header row is recognised when its first two fields are both non-numeric.
pub fn parse_csv(bytes: &[u8], limit: usize) -> Result<MarkedPointPattern> {
    if bytes.len() > limit {
        return Err(Error::FileTooLarge { size: bytes.len(), limit });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut points = Vec::new();
    let mut marks = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::MalformedRow { line, reason: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            let numeric = |s: &str| s.parse::<f64>().is_ok();
            if record.len() >= 2 && !numeric(&record[0]) && !numeric(&record[1]) {
                continue;
            }
        }
        if record.len() != 3 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 3 columns (x, y, type), found {}", record.len()),
            });
        }
        let coord = |s: &str, axis: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::MalformedRow { line, reason: format!("{axis} coordinate {s:?} is not a finite number") }),
            }
        };
        let x = coord(&record[0], "x")?;
        let y = coord(&record[1], "y")?;
        let mark = CellType::new(&record[2])
            .map_err(|_| Error::MalformedRow { line, reason: "empty cell type".into() })?;
        points.push(Point::new(x, y));
        marks.push(mark);
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    MarkedPointPattern::with_inferred_window(points, marks)
}

/// Evaluation radii: strictly increasing, starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DistanceGrid {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DistanceGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        DistanceGrid::new(v)
    }
}

impl From<DistanceGrid> for Vec<f64> {
    fn from(g: DistanceGrid) -> Vec<f64> {
        g.values
    }
}

impl DistanceGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::BadBins(values.len()));
        }
        if values[0] != 0.0 {
            return Err(Error::BadGrid("grid must start at 0".into()));
        }
        if values.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::BadGrid("grid must be finite and strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// `bins` equally spaced radii from 0 to `rmax` inclusive.
    pub fn uniform(rmax: f64, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::BadBins(bins));
        }
        if !(rmax > 0.0 && rmax.is_finite()) {
            return Err(Error::BadGrid(format!("rmax must be positive, got {rmax}")));
        }
        let last = (bins - 1) as f64;
        let values = (0..bins).map(|k| rmax * k as f64 / last).collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn rmax(&self) -> f64 {
        *self.values.last().expect("grid has at least two values")
    }

    /// Grid step when the spacing is uniform (relative tolerance 1e-9).
    pub fn uniform_step(&self) -> Option<f64> {
        let h = self.rmax() / (self.count() - 1) as f64;
        let ok = self.values.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }

    /// Index of the first radius `>= d`; equals `count()` when `d > rmax`.
    #[inline]
    pub fn first_at_least(&self, d: f64) -> usize {
        self.values.partition_point(|&r| r < d)
    }
}

/// Radii from 0 to a quarter of the window's shorter side.
pub fn default_rgrid(window: &ObservationWindow, bins: usize) -> Result<DistanceGrid> {
    if bins < 2 {
        return Err(Error::BadBins(bins));
    }
    DistanceGrid::uniform(0.25 * window.width().min(window.height()), bins)
}
