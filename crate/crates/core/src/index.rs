//! Uniform bucket grid over a point set for fixed-radius and nearest-neighbour queries.

use crate::pattern::Point;

/// Upper bound on buckets per point, keeps memory linear in n.
const MAX_CELLS_PER_POINT: usize = 4;

pub struct PointIndex<'a> {
    points: &'a [Point],
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    /// `starts[c]..starts[c + 1]` indexes `order` for bucket `c`.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> PointIndex<'a> {
    /// Index with buckets of side close to `cell` (enlarged when the grid would get too fine).
    pub fn new(points: &'a [Point], cell: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let (w, h) = (x1 - x0, y1 - y0);
        let max_cells = (MAX_CELLS_PER_POINT * points.len()).max(64) as f64;
        let mut cell = if cell.is_finite() && cell > 0.0 { cell } else { w.max(h).max(1.0) };
        // Enlarge until the bucket count fits the budget.
        let min_cell = ((w * h) / max_cells).sqrt().max(w.max(h) / 4096.0);
        if cell < min_cell {
            cell = min_cell;
        }
        if cell <= 0.0 {
            cell = 1.0;
        }
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);

        let mut counts = vec![0usize; nx * ny + 1];
        let cell_of = |p: &Point| -> usize {
            let cx = (((p.x - x0) / cell) as usize).min(nx - 1);
            let cy = (((p.y - y0) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        let ids: Vec<usize> = points.iter().map(cell_of).collect();
        for &c in &ids {
            counts[c + 1] += 1;
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut order = vec![0usize; points.len()];
        for (i, &c) in ids.iter().enumerate() {
            order[fill[c]] = i;
            fill[c] += 1;
        }
        Self { points, x0, y0, cell, nx, ny, starts, order }
    }

    /// Index sized for nearest-neighbour lookups (a couple of points per bucket).
    pub fn for_nearest(points: &'a [Point]) -> Self {
        let n = points.len().max(1) as f64;
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let area = ((x1 - x0) * (y1 - y0)).max(0.0);
        let cell = if area > 0.0 { (2.0 * area / n).sqrt() } else { (x1 - x0).max(y1 - y0) / n };
        Self::new(points, cell)
    }

    pub fn points(&self) -> &'a [Point] {
        self.points
    }

    #[inline]
    fn clamp_cell(&self, v: f64, origin: f64, n: usize) -> usize {
        let c = ((v - origin) / self.cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(n - 1)
        }
    }

    #[inline]
    fn bucket(&self, cx: usize, cy: usize) -> &[usize] {
        let c = cy * self.nx + cx;
        &self.order[self.starts[c]..self.starts[c + 1]]
    }

    /// Calls `f(j, d)` for every indexed point with `d = |q - p_j| <= r`.
    pub fn for_each_within(&self, q: &Point, r: f64, mut f: impl FnMut(usize, f64)) {
        if self.points.is_empty() {
            return;
        }
        let cx0 = self.clamp_cell(q.x - r, self.x0, self.nx);
        let cx1 = self.clamp_cell(q.x + r, self.x0, self.nx);
        let cy0 = self.clamp_cell(q.y - r, self.y0, self.ny);
        let cy1 = self.clamp_cell(q.y + r, self.y0, self.ny);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &j in self.bucket(cx, cy) {
                    let d = q.dist(&self.points[j]);
                    if d <= r {
                        f(j, d);
                    }
                }
            }
        }
    }

    /// Nearest indexed point to `q`, skipping index `exclude`. Ties resolve to the lower index.
    pub fn nearest(&self, q: &Point, exclude: Option<usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let consider = |j: usize, best: &mut Option<(usize, f64)>| {
            if Some(j) == exclude {
                return;
            }
            let d = q.dist(&self.points[j]);
            match *best {
                Some((bj, bd)) if d > bd || (d == bd && j > bj) => {}
                _ => *best = Some((j, d)),
            }
        };
        if self.points.is_empty() {
            return None;
        }
        let cx = self.clamp_cell(q.x, self.x0, self.nx) as isize;
        let cy = self.clamp_cell(q.y, self.y0, self.ny) as isize;
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let max_ring = nx.max(ny);
        for k in 0..=max_ring {
            let (ylo, yhi) = (cy - k, cy + k);
            let (xlo, xhi) = (cx - k, cx + k);
            for yy in ylo..=yhi {
                if yy < 0 || yy >= ny {
                    continue;
                }
                let edge_row = yy == ylo || yy == yhi;
                let step = if edge_row { 1 } else { (xhi - xlo).max(1) };
                let mut xx = xlo;
                while xx <= xhi {
                    if xx >= 0 && xx < nx {
                        for &j in self.bucket(xx as usize, yy as usize) {
                            consider(j, &mut best);
                        }
                    }
                    xx += step;
                }
            }
            // Every bucket outside ring k is at least k full cells away.
            if let Some((_, bd)) = best {
                if bd <= k as f64 * self.cell {
                    break;
                }
            }
        }
        best
    }
}
