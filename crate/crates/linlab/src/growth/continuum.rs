//! Min-modulus continua on fat annuli.
//!
//! Searches the annulus A(r, r^mu) for a connected super-level component of
//! |L| (threshold M(r, L)) that separates the two boundary circles. The grid
//! is polar; the super-level set uses 4-neighbor connectivity and its
//! complement 8-neighbor (the fixed convention that avoids grid-separation
//! paradoxes), with angular wrap-around.
//!
//! Moderate radii are sampled directly through the functional-equation
//! reduction. Radii beyond native range use a block grid of whole
//! lambda-scales: rows within the window differ by exact integer reduction
//! steps, so relative angular alignment is exact and only a global rotation
//! (irrelevant to separation and moduli) is unknown.

use super::{push_log_abs, GrowthError};
use crate::extrange::{normalize_arg, TowerMagnitude};
use crate::linearizer::LinearizerHandle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

const CELL_BUDGET: u64 = 2_000;
/// Number of whole lambda-scales in the huge-radius search window: wide
/// enough for the slow near-Julia band to pinch off within the window.
const BLOCK_SCALES: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinuumVerdict {
    Pass,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuumReport {
    /// ln r (tower; radii can exceed native range).
    pub log_r: TowerMagnitude,
    pub mu: f64,
    pub rows: usize,
    pub cols: usize,
    /// log M(r, L), the super-level threshold.
    pub threshold_log_max: TowerMagnitude,
    pub separating_found: bool,
    /// log of the minimum modulus over the separating component.
    pub min_log_abs: Option<TowerMagnitude>,
    /// Bounding log-radii of the separating component.
    pub inner_log_radius: Option<TowerMagnitude>,
    pub outer_log_radius: Option<TowerMagnitude>,
    /// Whether min > threshold held strictly.
    pub strict: bool,
    pub verdict: ContinuumVerdict,
}

struct Grid {
    rows: usize,
    cols: usize,
    /// Per-cell log |L|; None when the cell could not be certified (its true
    /// value is then far below max-modulus-scale thresholds).
    values: Vec<Option<TowerMagnitude>>,
    /// Per-row log-radius.
    row_log_radius: Vec<TowerMagnitude>,
}

fn cell_log_abs_native(
    h: &LinearizerHandle,
    log_radius: f64,
    z_angle: f64,
) -> Option<TowerMagnitude> {
    let log_base = h.base_radius().ln();
    let value_of = |v: Complex64| -> TowerMagnitude {
        let n = v.norm();
        TowerMagnitude::from_value(if n > 0.0 { n.ln() } else { f64::NEG_INFINITY })
    };
    if log_radius <= log_base {
        let z = Complex64::from_polar(log_radius.exp(), z_angle);
        return h.koenigs_eval(z).ok().map(value_of);
    }
    let log_lambda = h.scale().norm().ln();
    let mut j = ((log_radius - log_base) / log_lambda).ceil();
    let mut s_log = log_radius - j * log_lambda;
    while s_log > log_base {
        j += 1.0;
        s_log -= log_lambda;
    }
    let w_angle = normalize_arg(z_angle - j * h.scale().arg());
    let w = Complex64::from_polar(s_log.exp(), w_angle);
    let v = h.koenigs_eval(w).ok()?;
    push_log_abs(h, v, &TowerMagnitude::from_value(j), CELL_BUDGET)
}

fn build_grid_native(
    h: &LinearizerHandle,
    log_r: f64,
    mu: f64,
    rows: usize,
    cols: usize,
) -> Grid {
    let span = (mu - 1.0) * log_r;
    let row_log_radius: Vec<f64> = (0..rows)
        .map(|i| log_r + span * (i as f64 + 0.5) / rows as f64)
        .collect();
    let values: Vec<Option<TowerMagnitude>> = row_log_radius
        .par_iter()
        .flat_map_iter(|&lr| {
            (0..cols).map(move |c| {
                let angle = std::f64::consts::TAU * (c as f64 + 0.5) / cols as f64;
                (lr, angle)
            })
        })
        .map(|(lr, angle)| cell_log_abs_native(h, lr, angle))
        .collect();
    Grid {
        rows,
        cols,
        values,
        row_log_radius: row_log_radius
            .into_iter()
            .map(TowerMagnitude::from_value)
            .collect(),
    }
}

fn build_grid_blocks(
    h: &LinearizerHandle,
    log_r: &TowerMagnitude,
    rows: usize,
    cols: usize,
) -> Grid {
    let log_base = h.base_radius().ln();
    let log_lambda = h.scale().norm().ln();
    let arg_lambda = h.scale().arg();
    // Two whole scales of safety margin above r for tower-precision slop.
    let j0 = log_r
        .add(&TowerMagnitude::from_value(-log_base))
        .scale(1.0 / log_lambda)
        .add(&TowerMagnitude::from_value(2.0));

    let sub = (rows / BLOCK_SCALES).max(1);
    let actual_rows = sub * BLOCK_SCALES;
    let mut row_log_radius = Vec::with_capacity(actual_rows);
    let mut row_geometry = Vec::with_capacity(actual_rows); // (block, s_log)
    for b in 0..BLOCK_SCALES {
        for k in 0..sub {
            let s_log = log_base - log_lambda * (1.0 - (k as f64 + 0.5) / sub as f64);
            row_geometry.push((b, s_log));
            let lr = j0
                .add(&TowerMagnitude::from_value(b as f64))
                .scale(log_lambda)
                .add(&TowerMagnitude::from_value(s_log));
            row_log_radius.push(lr);
        }
    }

    let values: Vec<Option<TowerMagnitude>> = row_geometry
        .par_iter()
        .flat_map_iter(|&(b, s_log)| {
            (0..cols).map(move |c| {
                let z_angle = std::f64::consts::TAU * (c as f64 + 0.5) / cols as f64;
                let w_angle = normalize_arg(z_angle - b as f64 * arg_lambda);
                (b, s_log, w_angle)
            })
        })
        .map(|(b, s_log, w_angle)| {
            let w = Complex64::from_polar(s_log.exp(), w_angle);
            let v = h.koenigs_eval(w).ok()?;
            let steps = j0.add(&TowerMagnitude::from_value(b as f64));
            push_log_abs(h, v, &steps, CELL_BUDGET)
        })
        .collect();

    Grid {
        rows: actual_rows,
        cols,
        values,
        row_log_radius,
    }
}

/// 8-neighbor offsets with angular wrap.
fn neighbors8(r: usize, c: usize, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = Vec::with_capacity(8);
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let nr = r as i64 + dr;
            if nr < 0 || nr >= rows as i64 {
                continue;
            }
            let nc = (c as i64 + dc).rem_euclid(cols as i64);
            out.push((nr as usize, nc as usize));
        }
    }
    out.into_iter()
}

fn neighbors4(r: usize, c: usize, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push((r - 1, c));
    }
    if r + 1 < rows {
        out.push((r + 1, c));
    }
    out.push((r, (c + 1) % cols));
    out.push((r, (c + cols - 1) % cols));
    out.into_iter()
}

/// Flood the non-blocking cells (8-connected) from all inner-wall cells not
/// in `block`; returns (visited mask, reached-outer-wall flag).
fn flood_complement(block: &[bool], rows: usize, cols: usize) -> (Vec<bool>, bool) {
    let mut visited = vec![false; rows * cols];
    let mut stack = Vec::new();
    for c in 0..cols {
        if !block[c] {
            visited[c] = true;
            stack.push((0usize, c));
        }
    }
    let mut reached_outer = rows == 1 && !stack.is_empty();
    while let Some((r, c)) = stack.pop() {
        if r == rows - 1 {
            reached_outer = true;
        }
        for (nr, nc) in neighbors8(r, c, rows, cols) {
            let i = nr * cols + nc;
            if !visited[i] && !block[i] {
                visited[i] = true;
                stack.push((nr, nc));
            }
        }
    }
    (visited, reached_outer)
}

/// 4-connected component labels over the super-level mask.
fn label_components(mask: &[bool], rows: usize, cols: usize) -> (Vec<u32>, u32) {
    let mut labels = vec![0u32; rows * cols];
    let mut next = 1u32;
    let mut stack = Vec::new();
    for start in 0..rows * cols {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        labels[start] = next;
        stack.push((start / cols, start % cols));
        while let Some((r, c)) = stack.pop() {
            for (nr, nc) in neighbors4(r, c, rows, cols) {
                let i = nr * cols + nc;
                if mask[i] && labels[i] == 0 {
                    labels[i] = next;
                    stack.push((nr, nc));
                }
            }
        }
        next += 1;
    }
    (labels, next - 1)
}

struct Separating {
    cells: Vec<usize>,
}

/// The base-threshold component has its minimum pinned at M(r); the useful
/// continuum is the one with the largest attainable minimum, which sits
/// higher in the fat annulus. Binary-search the largest cell-value level
/// whose super-level set still separates.
fn raise_threshold(grid: &Grid, base_mask: &[bool], base: Separating) -> Option<Separating> {
    let mut candidates: Vec<TowerMagnitude> = base
        .cells
        .iter()
        .step_by((base.cells.len() / 4096).max(1))
        .filter_map(|&i| grid.values[i])
        .collect();
    candidates.sort();
    candidates.dedup();
    if candidates.len() < 2 {
        return Some(base);
    }
    // Invariant: level `lo` separates, level `hi` is untested-or-failing.
    let (mut lo, mut hi) = (0usize, candidates.len());
    let mut best = base;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let tau = candidates[mid];
        let mask: Vec<bool> = grid
            .values
            .iter()
            .zip(base_mask)
            .map(|(v, &b)| b && matches!(v, Some(t) if t.cmp(&tau) == Ordering::Greater))
            .collect();
        match find_separating_component(&mask, grid.rows, grid.cols) {
            Some(sep) => {
                best = sep;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Some(best)
}

/// Finds a single 4-connected super-level component that alone blocks every
/// path (8-connected, through everything but the component) from the inner
/// wall to the outer wall.
fn find_separating_component(mask: &[bool], rows: usize, cols: usize) -> Option<Separating> {
    let (_, reached) = flood_complement(mask, rows, cols);
    if reached {
        return None;
    }
    let (labels, count) = label_components(mask, rows, cols);
    let mut sizes = vec![0usize; count as usize + 1];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    let mut order: Vec<u32> = (1..=count).collect();
    order.sort_by_key(|&l| std::cmp::Reverse(sizes[l as usize]));

    for &l in &order {
        let block: Vec<bool> = labels.iter().map(|&x| x == l).collect();
        let (_, reached) = flood_complement(&block, rows, cols);
        if !reached {
            let cells = labels
                .iter()
                .enumerate()
                .filter(|(_, &x)| x == l)
                .map(|(i, _)| i)
                .collect();
            return Some(Separating { cells });
        }
    }
    None
}

/// Search A(r, r^mu) for a super-level continuum of |L| with threshold
/// M(r, L) that separates the boundary circles, and report its minimum
/// modulus. `log_r` is ln r as a tower. An absent component at this
/// resolution is inconclusive, not a refutation.
pub fn min_modulus_continuum(
    h: &LinearizerHandle,
    log_r: &TowerMagnitude,
    mu: f64,
    rows: usize,
    cols: usize,
) -> Result<ContinuumReport, GrowthError> {
    assert!(mu > 1.0);
    let threshold = super::max_modulus_tower(h, log_r)?;

    let lr_native = log_r.to_f64();
    let pointwise_ok = lr_native.is_finite()
        && (mu * lr_native - h.base_radius().ln()) / h.scale().norm().ln()
            <= h.pointwise_step_limit();
    let grid = if pointwise_ok {
        build_grid_native(h, lr_native, mu, rows, cols)
    } else {
        build_grid_blocks(h, log_r, rows, cols)
    };

    let mask: Vec<bool> = grid
        .values
        .iter()
        .map(|v| matches!(v, Some(t) if t.cmp(&threshold) == Ordering::Greater))
        .collect();

    let separating = find_separating_component(&mask, grid.rows, grid.cols)
        .and_then(|base| raise_threshold(&grid, &mask, base));
    match separating {
        None => Ok(ContinuumReport {
            log_r: *log_r,
            mu,
            rows: grid.rows,
            cols: grid.cols,
            threshold_log_max: threshold,
            separating_found: false,
            min_log_abs: None,
            inner_log_radius: None,
            outer_log_radius: None,
            strict: false,
            verdict: ContinuumVerdict::Inconclusive,
        }),
        Some(sep) => {
            let mut min_val: Option<TowerMagnitude> = None;
            let mut row_lo = usize::MAX;
            let mut row_hi = 0usize;
            for &i in &sep.cells {
                let r = i / grid.cols;
                row_lo = row_lo.min(r);
                row_hi = row_hi.max(r);
                let v = grid.values[i].expect("separating cells are certified");
                min_val = Some(match min_val {
                    None => v,
                    Some(m) => {
                        if v < m {
                            v
                        } else {
                            m
                        }
                    }
                });
            }
            let m = min_val.unwrap();
            let strict = m.cmp(&threshold) == Ordering::Greater;
            Ok(ContinuumReport {
                log_r: *log_r,
                mu,
                rows: grid.rows,
                cols: grid.cols,
                threshold_log_max: threshold,
                separating_found: true,
                min_log_abs: Some(m),
                inner_log_radius: Some(grid.row_log_radius[row_lo]),
                outer_log_radius: Some(grid.row_log_radius[row_hi]),
                strict,
                verdict: if strict {
                    ContinuumVerdict::Pass
                } else {
                    ContinuumVerdict::Inconclusive
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separating_ring_is_found() {
        // A full ring of blocked cells in the middle row separates.
        let rows = 5;
        let cols = 8;
        let mut mask = vec![false; rows * cols];
        for c in 0..cols {
            mask[2 * cols + c] = true;
        }
        let sep = find_separating_component(&mask, rows, cols).unwrap();
        assert_eq!(sep.cells.len(), cols);
    }

    #[test]
    fn radial_wall_does_not_separate() {
        // A single radial spoke blocks nothing: paths wrap around.
        let rows = 5;
        let cols = 8;
        let mut mask = vec![false; rows * cols];
        for r in 0..rows {
            mask[r * cols + 3] = true;
        }
        assert!(find_separating_component(&mask, rows, cols).is_none());
    }

    #[test]
    fn ring_with_gap_does_not_separate() {
        let rows = 5;
        let cols = 8;
        let mut mask = vec![false; rows * cols];
        for c in 0..cols {
            if c != 5 {
                mask[2 * cols + c] = true;
            }
        }
        assert!(find_separating_component(&mask, rows, cols).is_none());
    }

    #[test]
    fn stepped_ring_with_diagonal_seam_leaks() {
        // The band wraps all columns but its two ends only meet at a corner;
        // with 4-connected foreground the ring is not closed, and the
        // 8-connected complement slips through the diagonal gap.
        let rows = 4;
        let cols = 6;
        let mut mask = vec![false; rows * cols];
        for c in 0..3 {
            mask[cols + c] = true;
        }
        for c in 2..6 {
            mask[2 * cols + c] = true;
        }
        assert!(find_separating_component(&mask, rows, cols).is_none());
    }

    #[test]
    fn stepped_ring_closed_orthogonally_separates() {
        let rows = 4;
        let cols = 6;
        let mut mask = vec![false; rows * cols];
        for c in [0usize, 1, 2, 5] {
            mask[cols + c] = true;
        }
        for c in 2..6 {
            mask[2 * cols + c] = true;
        }
        let sep = find_separating_component(&mask, rows, cols).unwrap();
        assert_eq!(sep.cells.len(), 8);
    }
}
