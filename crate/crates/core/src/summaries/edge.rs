//! Ripley's isotropic edge correction for rectangular windows.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::pattern::{ObservationWindow, Point};

/// Fraction of the circle of radius `r` centred at `c` lying inside `window`.
///
/// Each window edge closer than `r` removes an arc of half-width `acos(d / r)`
/// centred on the edge normal; the arcs are merged on the circle and measured
/// exactly. `c` must lie inside the window.
pub fn circle_fraction_inside(window: &ObservationWindow, c: &Point, r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    // (distance to edge, angle of the outward normal)
    let edges = [
        (window.x_max() - c.x, 0.0),
        (window.y_max() - c.y, FRAC_PI_2),
        (c.x - window.x_min(), PI),
        (c.y - window.y_min(), 3.0 * FRAC_PI_2),
    ];
    let mut arcs: Vec<(f64, f64)> = Vec::with_capacity(5);
    for (d, normal) in edges {
        if d < r {
            let half = (d.max(0.0) / r).acos();
            let (lo, hi) = (normal - half, normal + half);
            if lo < 0.0 {
                arcs.push((lo + TAU, TAU));
                arcs.push((0.0, hi));
            } else {
                arcs.push((lo, hi));
            }
        }
    }
    if arcs.is_empty() {
        return 1.0;
    }
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut outside = 0.0;
    let (mut cur_lo, mut cur_hi) = arcs[0];
    for &(lo, hi) in &arcs[1..] {
        if lo <= cur_hi {
            cur_hi = cur_hi.max(hi);
        } else {
            outside += cur_hi - cur_lo;
            (cur_lo, cur_hi) = (lo, hi);
        }
    }
    outside += cur_hi - cur_lo;
    (1.0 - outside / TAU).clamp(0.0, 1.0)
}

/// Isotropic weight `1 / e` for a pair at distance `d` seen from `c`; zero when `e` vanishes.
#[inline]
pub fn isotropic_weight(window: &ObservationWindow, c: &Point, d: f64) -> f64 {
    let e = circle_fraction_inside(window, c, d);
    if e > 0.0 {
        1.0 / e
    } else {
        0.0
    }
}
