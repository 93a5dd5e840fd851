//! Escape-classification rendering: per-pixel verdicts over a viewport,
//! Julia-set boundary extraction, and binary PPM (P6) output with a JSON
//! palette sidecar.

use super::{classify_with_levels, EscapeLevels, WebsetsError};
use crate::linearizer::LinearizerHandle;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Marker byte for Julia-boundary pixels.
pub const BOUNDARY_CODE: u8 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
}

impl Viewport {
    pub fn square(center: Complex64, half: f64) -> Self {
        Viewport {
            center,
            half_width: half,
            half_height: half,
        }
    }
}

/// A classified pixel grid. Codes come from [`EscapeCode::code_byte`] plus
/// the boundary marker.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelGrid {
    pub width: usize,
    pub height: usize,
    pub viewport: Viewport,
    pub codes: Vec<u8>,
}

impl PixelGrid {
    pub fn code_at(&self, x: usize, y: usize) -> u8 {
        self.codes[y * self.width + x]
    }

    /// Pixel center in the plane; row 0 is the top of the image.
    pub fn pixel_point(&self, x: usize, y: usize) -> Complex64 {
        let fx = (x as f64 + 0.5) / self.width as f64;
        let fy = (y as f64 + 0.5) / self.height as f64;
        Complex64::new(
            self.viewport.center.re + (2.0 * fx - 1.0) * self.viewport.half_width,
            self.viewport.center.im + (1.0 - 2.0 * fy) * self.viewport.half_height,
        )
    }
}

/// Per-pixel fast-escape classification. Deterministic for fixed parameters:
/// pixels are assembled by index, independent of worker scheduling.
pub fn render_fast_escaping(
    h: &LinearizerHandle,
    viewport: Viewport,
    width: usize,
    height: usize,
    base_radius: f64,
    depth: u32,
    p_max: u8,
) -> Result<PixelGrid, WebsetsError> {
    let levels = EscapeLevels::compute(h, base_radius, depth, p_max)?;
    let codes: Vec<u8> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let grid = PixelGrid {
                width,
                height,
                viewport,
                codes: Vec::new(),
            };
            let z = grid.pixel_point(i % width, i / width);
            classify_with_levels(h, z, &levels, depth, p_max)
                .code
                .code_byte()
        })
        .collect();
    Ok(PixelGrid {
        width,
        height,
        viewport,
        codes,
    })
}

/// Marks pixels where a fast-escaping code meets any non-fast code in its
/// 8-neighborhood; the marked set approximates the Julia set of L.
pub fn julia_boundary_render(grid: &PixelGrid) -> PixelGrid {
    let w = grid.width as i64;
    let hgt = grid.height as i64;
    let is_fast = |x: i64, y: i64| -> bool {
        grid.codes[(y * w + x) as usize] >= 3 && grid.codes[(y * w + x) as usize] != BOUNDARY_CODE
    };
    let mut codes = grid.codes.clone();
    for y in 0..hgt {
        for x in 0..w {
            let fast = is_fast(x, y);
            let mut boundary = false;
            'neigh: for dy in -1..=1 {
                for dx in -1..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= hgt {
                        continue;
                    }
                    if is_fast(nx, ny) != fast {
                        boundary = true;
                        break 'neigh;
                    }
                }
            }
            if boundary && fast {
                codes[(y * w + x) as usize] = BOUNDARY_CODE;
            }
        }
    }
    PixelGrid {
        width: grid.width,
        height: grid.height,
        viewport: grid.viewport,
        codes,
    }
}

fn color_of(code: u8) -> [u8; 3] {
    match code {
        0 => [0, 0, 0],        // bounded
        1 => [40, 40, 48],     // undetermined
        2 => [70, 90, 160],    // escaping slow
        BOUNDARY_CODE => [255, 255, 255],
        p => {
            // Fast-escaping gradient by shift P = code - 3.
            let p = (p - 3).min(11) as u32;
            [
                (250 - 14 * p) as u8,
                (170 - 10 * p) as u8,
                (40 + 16 * p) as u8,
            ]
        }
    }
}

/// Serialize the grid as a binary P6 PPM (8-bit RGB).
pub fn write_ppm(grid: &PixelGrid, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", grid.width, grid.height)?;
    let mut row = Vec::with_capacity(grid.width * 3);
    for y in 0..grid.height {
        row.clear();
        for x in 0..grid.width {
            row.extend_from_slice(&color_of(grid.code_at(x, y)));
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// The palette sidecar: code byte -> RGB and meaning.
pub fn palette_json(p_max: u8) -> serde_json::Value {
    let mut entries = vec![
        serde_json::json!({"code": 0, "rgb": color_of(0), "meaning": "bounded_so_far"}),
        serde_json::json!({"code": 1, "rgb": color_of(1), "meaning": "undetermined"}),
        serde_json::json!({"code": 2, "rgb": color_of(2), "meaning": "escaping_slow"}),
        serde_json::json!({
            "code": BOUNDARY_CODE,
            "rgb": color_of(BOUNDARY_CODE),
            "meaning": "julia_boundary"
        }),
    ];
    for p in 0..=p_max {
        entries.push(serde_json::json!({
            "code": 3 + p,
            "rgb": color_of(3 + p),
            "meaning": format!("fast_escaping_P{p}")
        }));
    }
    serde_json::json!({ "palette": entries })
}

/// Count the nested fast-escaping shells around the grid center: the minimum
/// number of distinct fast components any path from the center to the image
/// border must cross (0-1 BFS over pixel adjacency, cost 1 on entering a
/// fast pixel from a non-fast one).
pub fn nested_fast_loops_around_center(grid: &PixelGrid) -> u32 {
    use std::collections::VecDeque;
    let w = grid.width;
    let hgt = grid.height;
    let fast = |i: usize| grid.codes[i] >= 3;
    let mut dist = vec![u32::MAX; w * hgt];
    let start = (hgt / 2) * w + (w / 2);
    let mut dq = VecDeque::new();
    dist[start] = if fast(start) { 1 } else { 0 };
    dq.push_back(start);
    while let Some(i) = dq.pop_front() {
        let (x, y) = (i % w, i / w);
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= hgt as i64 {
                continue;
            }
            let ni = ny as usize * w + nx as usize;
            let cost = u32::from(fast(ni) && !fast(i));
            if dist[i].saturating_add(cost) < dist[ni] {
                dist[ni] = dist[i] + cost;
                if cost == 0 {
                    dq.push_front(ni);
                } else {
                    dq.push_back(ni);
                }
            }
        }
    }
    let mut best = u32::MAX;
    for x in 0..w {
        best = best.min(dist[x]).min(dist[(hgt - 1) * w + x]);
    }
    for y in 0..hgt {
        best = best.min(dist[y * w]).min(dist[y * w + w - 1]);
    }
    best
}

/// Whether the fast-escaping pixels inside the annulus `inner <= |z| <=
/// outer` contain a closed loop around the origin: every 8-connected path of
/// non-fast-or-outside-annulus pixels from inside the inner circle to
/// outside the outer circle must be blocked.
pub fn fast_loop_in_annulus(grid: &PixelGrid, inner: f64, outer: f64) -> bool {
    let w = grid.width;
    let hgt = grid.height;
    let idx = |x: usize, y: usize| y * w + x;
    let mut blocked = vec![false; w * hgt];
    let mut any_blocked = false;
    let mut seeds = Vec::new();
    for y in 0..hgt {
        for x in 0..w {
            let r = grid.pixel_point(x, y).norm();
            let fast = grid.codes[idx(x, y)] >= 3 && grid.codes[idx(x, y)] != BOUNDARY_CODE;
            if fast && r >= inner && r <= outer {
                blocked[idx(x, y)] = true;
                any_blocked = true;
            } else if r < inner {
                seeds.push((x, y));
            }
        }
    }
    if !any_blocked {
        return false;
    }
    if seeds.is_empty() {
        seeds.push((w / 2, hgt / 2));
    }
    let mut visited = vec![false; w * hgt];
    let mut stack = Vec::new();
    for &(x, y) in &seeds {
        if !blocked[idx(x, y)] && !visited[idx(x, y)] {
            visited[idx(x, y)] = true;
            stack.push((x, y));
        }
    }
    while let Some((x, y)) = stack.pop() {
        let r = grid.pixel_point(x, y).norm();
        if r > outer || x == 0 || y == 0 || x == w - 1 || y == hgt - 1 {
            return false;
        }
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= hgt as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if !blocked[idx(nx, ny)] && !visited[idx(nx, ny)] {
                    visited[idx(nx, ny)] = true;
                    stack.push((nx, ny));
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::OracleLinearizer;

    fn exp_handle() -> LinearizerHandle {
        let o = OracleLinearizer::exp_for_power_map(2);
        LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
    }

    #[test]
    fn render_is_deterministic() {
        let h = exp_handle();
        let vp = Viewport::square(Complex64::new(0.0, 0.0), 20.0);
        let a = render_fast_escaping(&h, vp, 32, 32, 5.0, 3, 4).unwrap();
        let b = render_fast_escaping(&h, vp, 32, 32, 5.0, 3, 4).unwrap();
        assert_eq!(a.codes, b.codes);
    }

    #[test]
    fn exp_far_right_fast_left_not() {
        let h = exp_handle();
        let vp = Viewport::square(Complex64::new(0.0, 0.0), 20.0);
        let g = render_fast_escaping(&h, vp, 33, 33, 5.0, 4, 8).unwrap();
        // Right edge mid-height: large positive real, fast.
        assert!(g.code_at(32, 16) >= 3, "code {}", g.code_at(32, 16));
        // Left edge mid-height: orbit collapses toward small scale first.
        assert!(g.code_at(0, 16) < 3, "code {}", g.code_at(0, 16));
    }

    #[test]
    fn single_pixel_render_is_defined() {
        let h = exp_handle();
        let vp = Viewport::square(Complex64::new(0.0, 0.0), 1e-12);
        let g = render_fast_escaping(&h, vp, 1, 1, 5.0, 3, 4).unwrap();
        // Center is z = 0: orbit of L(0) = x0 = 1 under L: 1, e, e^e ... the
        // orbit escapes but lags the levels; it must not be fast at P = 0.
        assert_eq!(g.codes.len(), 1);
        let v = classify_with_levels(
            &h,
            Complex64::new(0.0, 0.0),
            &EscapeLevels::compute(&h, 5.0, 3, 4).unwrap(),
            3,
            4,
        );
        assert_eq!(g.codes[0], v.code.code_byte());
    }

    #[test]
    fn boundary_of_uniform_grid_is_empty() {
        let grid = PixelGrid {
            width: 8,
            height: 8,
            viewport: Viewport::square(Complex64::new(0.0, 0.0), 1.0),
            codes: vec![3; 64],
        };
        let j = julia_boundary_render(&grid);
        assert!(j.codes.iter().all(|&c| c == 3));
    }

    #[test]
    fn boundary_of_half_plane_split_is_a_line() {
        let mut codes = vec![0u8; 64];
        for y in 0..8 {
            for x in 4..8 {
                codes[y * 8 + x] = 3;
            }
        }
        let grid = PixelGrid {
            width: 8,
            height: 8,
            viewport: Viewport::square(Complex64::new(0.0, 0.0), 1.0),
            codes,
        };
        let j = julia_boundary_render(&grid);
        for y in 0..8 {
            for x in 0..8 {
                let c = j.code_at(x, y);
                if x == 4 {
                    assert_eq!(c, BOUNDARY_CODE);
                } else {
                    assert_ne!(c, BOUNDARY_CODE, "unexpected boundary at {x},{y}");
                }
            }
        }
    }

    #[test]
    fn ppm_bytes_are_well_formed() {
        let grid = PixelGrid {
            width: 16,
            height: 16,
            viewport: Viewport::square(Complex64::new(0.0, 0.0), 1.0),
            codes: vec![0; 256],
        };
        let mut buf = Vec::new();
        write_ppm(&grid, &mut buf).unwrap();
        let header = b"P6\n16 16\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 3 * 256);
    }

    #[test]
    fn nested_loop_count_sees_concentric_rings() {
        // Three concentric square rings of fast pixels.
        let n = 21usize;
        let mut codes = vec![0u8; n * n];
        for ring in [3usize, 6, 9] {
            for t in (n / 2 - ring)..=(n / 2 + ring) {
                codes[(n / 2 - ring) * n + t] = 3;
                codes[(n / 2 + ring) * n + t] = 3;
                codes[t * n + (n / 2 - ring)] = 3;
                codes[t * n + (n / 2 + ring)] = 3;
            }
        }
        let grid = PixelGrid {
            width: n,
            height: n,
            viewport: Viewport::square(Complex64::new(0.0, 0.0), 1.0),
            codes,
        };
        assert_eq!(nested_fast_loops_around_center(&grid), 3);
    }
}
