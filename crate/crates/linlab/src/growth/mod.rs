//! Maximum-modulus machinery, order-of-growth estimation, and the numerical
//! growth-bound checks (Hölder-type two-sided bounds, doubling-ratio
//! sandwiches, the fast radii sequence, and min-modulus continua).

pub mod continuum;

pub use continuum::{min_modulus_continuum, ContinuumReport, ContinuumVerdict};

use crate::extrange::{LpValue, TowerMagnitude, TruncationBound};
use crate::linearizer::{LinearizerError, LinearizerHandle};
use crate::maps::{PolynomialMap, QRPowerMap};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

const CIRCLE_SAMPLES: usize = 256;
const REFINE_ARCS: usize = 8;
const REFINE_ANGLE_TOL: f64 = 1e-6;
/// Exact-iteration budget when pushing a base value forward; orbits still at
/// small scale after this many steps sit far below max-modulus thresholds.
const PUSH_BUDGET: u64 = 2_000;
/// Past this many remaining steps the power-dominated closed form is used.
const PUSH_TAIL_MIN: u64 = 40;

#[derive(Debug, Error)]
pub enum GrowthError {
    #[error("radius window must span at least 3 decades of log r (got {lo}..{hi})")]
    WindowTooNarrow { lo: f64, hi: f64 },
    #[error("fewer than 8 usable samples in the fit window ({0})")]
    TooFewSamples(usize),
    #[error("M(R, L) <= R at R = {0}; increase R so the level sequence grows")]
    RadiusNotIncreasing(f64),
    #[error("M(r_n, L) > r_(n+1)^mu never holds up to n = {0}; increase R")]
    InequalityNeverHolds(u32),
    #[error(transparent)]
    Linearizer(#[from] LinearizerError),
}

/// One samples-of-M record: log r, log M(r, L) as a tower, sample count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub log_r: f64,
    pub log_max_modulus: TowerMagnitude,
    pub samples: u32,
    pub refined: bool,
}

/// Estimated order and lower order from envelope slopes of
/// (log r, log log M).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub rho: f64,
    pub lambda_low: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
}

/// Fitted constants of the two-sided power bound
/// `C1^{q_j(lo)} |x|^{lo^j} <= |h^j(x)| <= C2^{q_j(hi)} |x|^{hi^j}`
/// with lo = d/K and hi = dK in the plane.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderFit {
    pub c1: f64,
    pub c2: f64,
    pub r0: f64,
    pub exponent_low: f64,
    pub exponent_high: f64,
    /// Log-log slope of |h^j| at the largest sampled radii, reduced to one
    /// application (the j-th root of the measured slope).
    pub measured_upper_exponent: f64,
    /// Per-iterate verdicts of the displayed bound at every sampled radius.
    pub per_iterate: Vec<(u32, bool)>,
    pub pass: bool,
}

/// Either kind of planar map whose growth the Hölder fit examines.
#[derive(Clone, Debug)]
pub enum PlanarMap {
    Polynomial(PolynomialMap),
    QrPower(QRPowerMap),
}

impl PlanarMap {
    fn degree(&self) -> f64 {
        match self {
            PlanarMap::Polynomial(p) => p.degree() as f64,
            PlanarMap::QrPower(q) => q.degree() as f64,
        }
    }

    fn dilatation(&self) -> f64 {
        match self {
            PlanarMap::Polynomial(_) => 1.0,
            PlanarMap::QrPower(q) => q.dilatation(),
        }
    }

    fn eval_lp(&self, z: LpValue, bound: &mut TruncationBound) -> LpValue {
        match self {
            PlanarMap::Polynomial(p) => p.eval_lp(z, bound),
            PlanarMap::QrPower(q) => q.eval_lp(z),
        }
    }
}

/// A growth curve: log r -> log M(r). Implemented by plain handles and by
/// the scale-2 view.
pub trait GrowthCurve: Sync {
    fn log_max_modulus(&self, log_r: f64) -> Result<TowerMagnitude, GrowthError>;
}

impl GrowthCurve for LinearizerHandle {
    fn log_max_modulus(&self, log_r: f64) -> Result<TowerMagnitude, GrowthError> {
        max_modulus(self, log_r)
    }
}

/// Radius substitution that turns a multiplier-scale handle into the
/// scale-2 object: M_2(r) := M(r^s, L) with s = log|lambda| / log 2, so
/// that M_2(2r) relates to M_2(r) through one application of the map.
pub struct Scale2View<'a> {
    pub handle: &'a LinearizerHandle,
}

impl Scale2View<'_> {
    pub fn radius_exponent(&self) -> f64 {
        self.handle.scale().norm().ln() / std::f64::consts::LN_2
    }
}

impl GrowthCurve for Scale2View<'_> {
    fn log_max_modulus(&self, log_r: f64) -> Result<TowerMagnitude, GrowthError> {
        max_modulus(self.handle, log_r * self.radius_exponent())
    }
}

/// Push `L(w)` forward `steps` times through the map in log-polar
/// arithmetic, returning log |p^steps(L(w))| as a tower. Exact iteration is
/// capped at `budget` steps; once the orbit is power-dominated the closed
/// form covers the rest. `None` means the orbit was still at small scale at
/// the budget (true value far below any max-modulus threshold at that step
/// count).
pub(crate) fn push_log_abs(
    h: &LinearizerHandle,
    base_value: Complex64,
    steps: &TowerMagnitude,
    budget: u64,
) -> Option<TowerMagnitude> {
    let asym = h.asymptotics();
    let steps_f = steps.to_f64();
    let native_steps = if steps_f.is_finite() && steps_f <= 2f64.powi(52) {
        Some(steps_f as u64)
    } else {
        None
    };
    let mut bound = TruncationBound::exact();
    let mut cur = LpValue::from_complex(base_value);
    let mut done: u64 = 0;
    loop {
        if let Some(total) = native_steps {
            if done == total {
                return Some(match cur {
                    LpValue::Zero => TowerMagnitude::from_value(f64::NEG_INFINITY),
                    LpValue::Finite(p) => TowerMagnitude::from_value(p.log_mod),
                });
            }
        }
        let mut dominant = false;
        if let LpValue::Finite(p) = cur {
            if p.log_mod >= asym.threshold {
                dominant = true;
                let remaining = match native_steps {
                    Some(total) => {
                        let rem = total - done;
                        if rem <= PUSH_TAIL_MIN && p.log_mod < 1e290 {
                            // Cheap to finish exactly.
                            None
                        } else {
                            Some(TowerMagnitude::from_value(rem as f64))
                        }
                    }
                    None => Some(steps.add(&TowerMagnitude::from_value(-(done as f64)))),
                };
                if let Some(rem) = remaining {
                    return Some(asym.tail_log_abs(p.log_mod, &rem));
                }
            }
        }
        if !dominant && done >= budget {
            return None;
        }
        cur = h.map().eval_lp(cur, &mut bound);
        done += 1;
    }
}

/// Public debug wrapper around [`push_log_abs`].
pub fn push_log_abs_public(
    h: &LinearizerHandle,
    base_value: Complex64,
    steps: &TowerMagnitude,
    budget: u64,
) -> Option<TowerMagnitude> {
    push_log_abs(h, base_value, steps, budget)
}

/// log |L(z)| on the circle of base radius `s_log` at angle `theta` (in the
/// base plane), pushed through `steps` applications of the map.
fn circle_log_abs(
    h: &LinearizerHandle,
    s_log: f64,
    theta: f64,
    steps: &TowerMagnitude,
    budget: u64,
) -> Option<TowerMagnitude> {
    let w = Complex64::from_polar(s_log.exp(), theta);
    let v = h.koenigs_eval(w).ok()?;
    push_log_abs(h, v, steps, budget)
}

fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, Option<TowerMagnitude>)
where
    F: Fn(f64) -> Option<TowerMagnitude>,
{
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// log M(r, L) for log r given as a tower. Radii past the base circle reduce
/// through z = lambda^j w: M(r, L) = max over |w| = s of |p^j(L(w))|, with
/// the angular maximum refined by golden-section search on the top arcs.
pub fn max_modulus_tower(
    h: &LinearizerHandle,
    log_r: &TowerMagnitude,
) -> Result<TowerMagnitude, GrowthError> {
    let log_base = h.base_radius().ln();
    let log_lambda = h.scale().norm().ln();
    let lr_native = log_r.to_f64();

    // Reduction bookkeeping: steps j and base-circle log radius.
    let (steps, s_log) = if lr_native.is_finite() && lr_native <= 1e15 {
        if lr_native <= log_base {
            (TowerMagnitude::from_value(0.0), lr_native)
        } else {
            let mut j = ((lr_native - log_base) / log_lambda).ceil();
            let mut s = lr_native - j * log_lambda;
            while s > log_base {
                j += 1.0;
                s -= log_lambda;
            }
            (TowerMagnitude::from_value(j), s)
        }
    } else {
        // Tower radii: the fractional placement of the base circle is below
        // representational precision; anchor at the base radius itself.
        let j = log_r
            .add(&TowerMagnitude::from_value(-log_base))
            .scale(1.0 / log_lambda);
        (j, log_base)
    };

    let sample = |theta: f64| circle_log_abs(h, s_log, theta, &steps, PUSH_BUDGET);

    let mut n = CIRCLE_SAMPLES;
    for _attempt in 0..3 {
        let coarse: Vec<(f64, Option<TowerMagnitude>)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let theta = std::f64::consts::TAU * (k as f64) / (n as f64);
                (theta, sample(theta))
            })
            .collect();
        let mut ranked: Vec<(TowerMagnitude, f64)> = coarse
            .iter()
            .filter_map(|(t, v)| v.map(|m| (m, *t)))
            .collect();
        if ranked.is_empty() {
            return Err(GrowthError::TooFewSamples(0));
        }
        ranked.sort_by(|a, b| b.0.cmp(&a.0));
        let coarse_best = ranked[0].0;

        let arc = std::f64::consts::TAU / (n as f64);
        let mut best = coarse_best;
        for &(_, theta) in ranked.iter().take(REFINE_ARCS) {
            let (_, refined) = golden_max(sample, theta - arc, theta + arc, REFINE_ANGLE_TOL);
            if let Some(v) = refined {
                if v > best {
                    best = v;
                }
            }
        }

        // If refinement moved the max noticeably, the circle was
        // under-resolved: double and retry.
        let shift = TowerMagnitude::sub_to_f64(&best, &coarse_best);
        if shift.abs() <= 1e-3 || n >= 4 * CIRCLE_SAMPLES {
            return Ok(best);
        }
        n *= 2;
    }
    unreachable!()
}

/// log M(r, L) for native log r.
pub fn max_modulus(h: &LinearizerHandle, log_r: f64) -> Result<TowerMagnitude, GrowthError> {
    max_modulus_tower(h, &TowerMagnitude::from_value(log_r))
}

/// The iterated maximum-modulus sequence M^0 = R, M^1, ..., M^n as tower
/// values, each level feeding the next as a radius.
pub fn iterated_max_modulus(
    h: &LinearizerHandle,
    big_r: f64,
    n: u32,
) -> Result<Vec<TowerMagnitude>, GrowthError> {
    let mut levels = vec![TowerMagnitude::from_value(big_r)];
    for _ in 0..n {
        let last = levels.last().unwrap();
        // Deeper levels exceed the representable exponential nesting; the
        // height-cap domination rules downstream cover them.
        if last.height() + 1 >= crate::extrange::TOWER_MAX_LEVELS as u32 {
            break;
        }
        let next = max_modulus_tower(h, &last.ln())?.exp();
        if next <= *last {
            return Err(GrowthError::RadiusNotIncreasing(big_r));
        }
        levels.push(next);
    }
    Ok(levels)
}

/// Growth records over a log-spaced window, for CSV emission.
pub fn growth_series(
    curve: &dyn GrowthCurve,
    log_r_min: f64,
    log_r_max: f64,
    samples: usize,
) -> Result<Vec<GrowthRecord>, GrowthError> {
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples.max(2) - 1) as f64;
        let log_r = log_r_min * (log_r_max / log_r_min).powf(t);
        let m = curve.log_max_modulus(log_r)?;
        out.push(GrowthRecord {
            log_r,
            log_max_modulus: m,
            samples: CIRCLE_SAMPLES as u32,
            refined: true,
        });
    }
    Ok(out)
}

/// Upper convex hull of points sorted by x (Andrew monotone chain).
fn hull(points: &[(f64, f64)], upper: bool) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let sign = if upper { 1.0 } else { -1.0 };
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if sign * cross >= 0.0 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

fn least_squares_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        .sqrt()
        / n.sqrt();
    (slope, residual)
}

/// Order and lower order from the slope of log log M(r) against log r.
/// A plain least-squares slope cannot separate limsup from liminf; the
/// upper and lower convex envelopes of the sample cloud stand in for them.
pub fn order_estimate(
    curve: &dyn GrowthCurve,
    log_r_min: f64,
    log_r_max: f64,
    samples: usize,
) -> Result<OrderEstimate, GrowthError> {
    if !(log_r_max / log_r_min >= 999.0) {
        return Err(GrowthError::WindowTooNarrow {
            lo: log_r_min,
            hi: log_r_max,
        });
    }
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples.max(2) - 1) as f64;
        let log_r = log_r_min * (log_r_max / log_r_min).powf(t);
        let m = curve.log_max_modulus(log_r)?;
        let y = m.ln().to_f64();
        if y.is_finite() {
            points.push((log_r, y));
        }
    }
    if points.len() < 8 {
        return Err(GrowthError::TooFewSamples(points.len()));
    }
    let (slope_all, residual) = least_squares_slope(&points);
    let (slope_up, _) = least_squares_slope(&hull(&points, true));
    let (slope_lo, _) = least_squares_slope(&hull(&points, false));
    let _ = slope_all;
    Ok(OrderEstimate {
        rho: slope_up.max(slope_lo),
        lambda_low: slope_up.min(slope_lo),
        fit_window: (log_r_min, log_r_max),
        residual,
    })
}

/// Report of the order bracket at scale 2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketReport {
    pub estimate: OrderEstimate,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the two-sided order bracket
/// (log d - log K)/log 2 <= rho <= (log d + log K)/log 2 against the order
/// estimated on the scale-2 view of the handle, at tolerance 0.1.
pub fn growth_bracket_check(
    h: &LinearizerHandle,
    d: u32,
    k_dil: f64,
) -> Result<BracketReport, GrowthError> {
    let view = Scale2View { handle: h };
    let estimate = order_estimate(&view, 2.0, 2000.0, 48)?;
    let lower = ((d as f64).ln() - k_dil.ln()) / std::f64::consts::LN_2;
    let upper = ((d as f64).ln() + k_dil.ln()) / std::f64::consts::LN_2;
    let tolerance = 0.1;
    let pass = estimate.rho >= lower - tolerance && estimate.rho <= upper + tolerance;
    Ok(BracketReport {
        estimate,
        lower,
        upper,
        tolerance,
        pass,
    })
}

/// Fit and verify the two-sided Hölder-type growth bound for iterates up to
/// `j_max`, over log-spaced radii in [10, 10^6] at 64 angles.
pub fn holder_bounds_fit(map: &PlanarMap, j_max: u32) -> Result<HolderFit, GrowthError> {
    assert!(j_max <= 6, "iterate count capped at 6");
    let d = map.degree();
    let k_dil = map.dilatation();
    let beta_low = d / k_dil;
    let beta_high = d * k_dil;

    // Empirical escape threshold: smallest dyadic radius where |h| clears
    // |x| at all probe angles.
    let mut r0 = 2.0f64;
    while r0 < 1e6 {
        let ok = (0..64).all(|k| {
            let theta = std::f64::consts::TAU * (k as f64) / 64.0;
            let z = LpValue::from_complex(Complex64::from_polar(r0, theta));
            let mut b = TruncationBound::exact();
            match map.eval_lp(z, &mut b) {
                LpValue::Finite(p) => p.log_mod > r0.ln(),
                LpValue::Zero => false,
            }
        });
        if ok {
            break;
        }
        r0 *= 2.0;
    }

    let radii: Vec<f64> = (0..24)
        .map(|i| {
            let t = i as f64 / 23.0;
            let lo = (10.0f64).max(r0);
            lo * (1e6 / lo).powf(t)
        })
        .collect();
    let angles: Vec<f64> = (0..64)
        .map(|k| std::f64::consts::TAU * (k as f64) / 64.0)
        .collect();

    // Log-moduli of all iterates at all samples.
    let mut log_abs: Vec<Vec<Vec<f64>>> = Vec::new(); // [iterate-1][radius][angle]
    for _ in 0..j_max {
        log_abs.push(vec![vec![0.0; angles.len()]; radii.len()]);
    }
    for (ri, &r) in radii.iter().enumerate() {
        for (ai, &theta) in angles.iter().enumerate() {
            let mut z = LpValue::from_complex(Complex64::from_polar(r, theta));
            let mut b = TruncationBound::exact();
            for j in 0..j_max {
                z = map.eval_lp(z, &mut b);
                let lm = match z {
                    LpValue::Finite(p) => p.log_mod,
                    LpValue::Zero => f64::NEG_INFINITY,
                };
                log_abs[j as usize][ri][ai] = lm;
            }
        }
    }

    // Fit C1, C2 from the first iterate. Shrinking C1 keeps the lower bound
    // valid, so it is capped at C2 to keep the pair ordered.
    let mut c1_log = f64::MAX;
    let mut c2_log = f64::MIN;
    for (ri, &r) in radii.iter().enumerate() {
        for ai in 0..angles.len() {
            let lm = log_abs[0][ri][ai];
            c1_log = c1_log.min(lm - beta_low * r.ln());
            c2_log = c2_log.max(lm - beta_high * r.ln());
        }
    }
    c1_log = c1_log.min(c2_log);

    let q = |y: f64, j: u32| -> f64 {
        if (y - 1.0).abs() < 1e-12 {
            j as f64
        } else {
            (y.powi(j as i32) - 1.0) / (y - 1.0)
        }
    };

    let mut per_iterate = Vec::new();
    let mut all_pass = true;
    for j in 1..=j_max {
        let mut ok = true;
        for (ri, &r) in radii.iter().enumerate() {
            for ai in 0..angles.len() {
                let lm = log_abs[(j - 1) as usize][ri][ai];
                let lower = q(beta_low, j) * c1_log + beta_low.powi(j as i32) * r.ln();
                let upper = q(beta_high, j) * c2_log + beta_high.powi(j as i32) * r.ln();
                // Tiny slack for accumulated rounding across iterates.
                if lm < lower - 1e-9 * lower.abs().max(1.0)
                    || lm > upper + 1e-9 * upper.abs().max(1.0)
                {
                    ok = false;
                }
            }
        }
        per_iterate.push((j, ok));
        all_pass &= ok;
    }

    // Measured slope at the top decade of radii for the deepest iterate.
    let top: Vec<(f64, f64)> = radii
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= 1e4)
        .map(|(ri, &r)| {
            let max_lm = log_abs[(j_max - 1) as usize][ri]
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            (r.ln(), max_lm)
        })
        .collect();
    let (slope, _) = least_squares_slope(&top);
    let measured_upper_exponent = slope.powf(1.0 / j_max as f64);

    Ok(HolderFit {
        c1: c1_log.exp(),
        c2: c2_log.exp(),
        r0,
        exponent_low: beta_low,
        exponent_high: beta_high,
        measured_upper_exponent,
        per_iterate,
        pass: all_pass,
    })
}

/// One row of the doubling-ratio sandwich check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    pub i: u32,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub log_r: f64,
    pub rows: Vec<RatioRow>,
    pub pass: bool,
}

/// Sandwich check for the ratio log M(2^n r) / log M(r) on the scale-2 view:
/// bounded between products of (d/K + log C1 / log M(2^i r)) and
/// (dK + log C2 / log M(2^i r)) over i < n.
pub fn growth_ratio_check(
    h: &LinearizerHandle,
    log_r: f64,
    n: u32,
    holder: &HolderFit,
) -> Result<RatioReport, GrowthError> {
    let view = Scale2View { handle: h };
    let beta_low = holder.exponent_low;
    let beta_high = holder.exponent_high;
    let c1_log = holder.c1.ln();
    let c2_log = holder.c2.ln();

    let mut log_m = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        let lr = log_r + (i as f64) * std::f64::consts::LN_2;
        let m = view.log_max_modulus(lr)?;
        let v = m.to_f64();
        if !v.is_finite() {
            return Err(GrowthError::TooFewSamples(i as usize));
        }
        log_m.push(v);
    }

    let mut rows = Vec::new();
    let mut lower = 1.0f64;
    let mut upper = 1.0f64;
    let mut all = true;
    for i in 0..=n {
        let ratio = log_m[i as usize] / log_m[0];
        let pass = ratio >= lower * (1.0 - 1e-9) && ratio <= upper * (1.0 + 1e-9);
        rows.push(RatioRow {
            i,
            ratio,
            lower,
            upper,
            pass,
        });
        all &= pass;
        if i < n {
            // A negative lower factor makes the lower bound vacuous.
            lower *= (beta_low + c1_log / log_m[i as usize]).max(0.0);
            upper *= beta_high + c2_log / log_m[i as usize];
        }
    }
    Ok(RatioReport {
        log_r,
        rows,
        pass: all,
    })
}

/// One row of the fast radii sequence r_n = 2^n M^n(R, L).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiiRow {
    pub n: u32,
    pub log_r_n: TowerMagnitude,
    pub log_max_at_r_n: TowerMagnitude,
    pub mu_log_r_next: TowerMagnitude,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiiReport {
    pub big_r: f64,
    pub mu: f64,
    pub first_hold: u32,
    pub rows: Vec<RadiiRow>,
}

/// Builds r_n = 2^n M^n(R, L) in tower arithmetic and checks
/// M(r_n, L) > r_(n+1)^mu, reporting the first n where the inequality holds
/// and every verdict after it.
pub fn radii_sequence(
    h: &LinearizerHandle,
    big_r: f64,
    n_max: u32,
    mu: f64,
) -> Result<RadiiReport, GrowthError> {
    assert!(mu > 1.0, "mu must exceed 1");
    let levels = iterated_max_modulus(h, big_r, n_max + 1)?;
    let radii: Vec<TowerMagnitude> = levels
        .iter()
        .enumerate()
        .map(|(n, m)| m.scale(2f64.powi(n as i32)))
        .collect();

    let mut rows = Vec::new();
    let mut first_hold: Option<u32> = None;
    for n in 0..=n_max {
        let log_r_n = radii[n as usize].ln();
        let log_m = max_modulus_tower(h, &log_r_n)?;
        let mu_log_next = radii[(n + 1) as usize].ln().scale(mu);
        let holds = log_m.cmp(&mu_log_next) == Ordering::Greater;
        if holds && first_hold.is_none() {
            first_hold = Some(n);
        }
        rows.push(RadiiRow {
            n,
            log_r_n,
            log_max_at_r_n: log_m,
            mu_log_r_next: mu_log_next,
            holds,
        });
    }
    match first_hold {
        Some(n0) => Ok(RadiiReport {
            big_r,
            mu,
            first_hold: n0,
            rows,
        }),
        None => Err(GrowthError::InequalityNeverHolds(n_max)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::OracleLinearizer;

    fn exp_handle() -> LinearizerHandle {
        let o = OracleLinearizer::exp_for_power_map(2);
        LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
    }

    fn cosh_handle() -> LinearizerHandle {
        let o = OracleLinearizer::cosh_for_chebyshev();
        LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
    }

    fn figure1_handle() -> LinearizerHandle {
        let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
        LinearizerHandle::at_repelling_point(map, None).unwrap()
    }

    #[test]
    fn max_modulus_of_exp_at_small_radius() {
        // M(2, exp) = e^2, so log M = 2.
        let h = exp_handle();
        let m = max_modulus(&h, 2.0f64.ln()).unwrap();
        assert_eq!(m.height(), 0);
        assert!((m.residual() - 2.0).abs() < 1e-6, "log M = {}", m.residual());
    }

    #[test]
    fn max_modulus_of_exp_at_radius_500() {
        let h = exp_handle();
        let m = max_modulus(&h, 500.0f64.ln()).unwrap();
        assert!((m.to_f64() - 500.0).abs() < 1e-4, "log M = {:?}", m);
    }

    #[test]
    fn max_modulus_monotone() {
        let h = figure1_handle();
        let mut prev: Option<TowerMagnitude> = None;
        for r in [2.0f64, 3.0, 10.0, 100.0, 1e4, 1e8] {
            let m = max_modulus(&h, r.ln()).unwrap();
            if let Some(p) = prev {
                assert!(m > p, "M not increasing at r = {r}");
            }
            prev = Some(m);
        }
    }

    #[test]
    fn exp_log_max_matches_radius_over_window() {
        let h = exp_handle();
        for r in [10.0f64, 50.0, 200.0, 500.0] {
            let m = max_modulus(&h, r.ln()).unwrap().to_f64();
            assert!((m - r).abs() / r <= 0.01, "log M({r}) = {m}");
        }
    }

    #[test]
    fn iterated_max_modulus_exp() {
        let h = exp_handle();
        let levels = iterated_max_modulus(&h, 1.0, 2).unwrap();
        assert!((levels[0].to_f64() - 1.0).abs() < 1e-12);
        assert!((levels[1].to_f64() - std::f64::consts::E).abs() < 1e-4);
        let e_e = std::f64::consts::E.exp();
        assert!((levels[2].to_f64() - e_e).abs() < 1e-3, "{:?}", levels[2]);
    }

    #[test]
    fn iterated_max_modulus_tower_heights_increase() {
        let h = exp_handle();
        let levels = iterated_max_modulus(&h, 1.0, 4).unwrap();
        for w in levels.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(levels[4].height() >= levels[2].height() + 1);
    }

    #[test]
    fn order_of_exp_is_one() {
        let h = exp_handle();
        let est = order_estimate(&h, 2.0, 2000.0, 48).unwrap();
        assert!((est.rho - 1.0).abs() <= 0.05, "rho = {}", est.rho);
        assert!(est.rho >= est.lambda_low - 1e-9);
    }

    #[test]
    fn order_of_cosh_is_half() {
        let h = cosh_handle();
        let est = order_estimate(&h, 2.0, 2000.0, 48).unwrap();
        assert!((est.rho - 0.5).abs() <= 0.05, "rho = {}", est.rho);
    }

    #[test]
    fn order_of_figure1_matches_multiplier_formula() {
        let h = figure1_handle();
        let want = 2.0f64.ln() / h.scale().norm().ln();
        let est = order_estimate(&h, 2.0, 2000.0, 48).unwrap();
        assert!((est.rho - want).abs() <= 0.06, "rho = {} want {}", est.rho, want);
    }

    #[test]
    fn order_window_validation() {
        let h = exp_handle();
        assert!(matches!(
            order_estimate(&h, 2.0, 200.0, 32),
            Err(GrowthError::WindowTooNarrow { .. })
        ));
    }

    #[test]
    fn bracket_for_exp_at_scale_two() {
        let h = exp_handle();
        let rep = growth_bracket_check(&h, 2, 1.0).unwrap();
        assert!((rep.lower - 1.0).abs() < 1e-12);
        assert!((rep.upper - 1.0).abs() < 1e-12);
        assert!(rep.pass, "estimate {}", rep.estimate.rho);
    }

    #[test]
    fn holder_fit_pure_square_is_exact() {
        let fit = holder_bounds_fit(&PlanarMap::QrPower(QRPowerMap::new(1.0, 2)), 3).unwrap();
        assert!(fit.pass);
        assert!((fit.c1 - 1.0).abs() < 1e-9);
        assert!((fit.c2 - 1.0).abs() < 1e-9);
        assert!((fit.exponent_low - 2.0).abs() < 1e-12);
        assert!((fit.exponent_high - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holder_fit_stretched_square() {
        let fit = holder_bounds_fit(&PlanarMap::QrPower(QRPowerMap::new(2.0, 2)), 2).unwrap();
        assert!(fit.pass);
        assert!((fit.exponent_low - 1.0).abs() < 1e-12);
        assert!((fit.exponent_high - 4.0).abs() < 1e-12);
        assert!((fit.measured_upper_exponent - 4.0).abs() < 0.01);
    }

    #[test]
    fn holder_fit_figure1_iterates() {
        let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
        let fit = holder_bounds_fit(&PlanarMap::Polynomial(map), 4).unwrap();
        assert!(fit.pass, "per-iterate: {:?}", fit.per_iterate);
    }

    #[test]
    fn ratio_sandwich_for_exp() {
        let h = exp_handle();
        let holder = holder_bounds_fit(&PlanarMap::Polynomial(h.map().clone()), 1).unwrap();
        let rep = growth_ratio_check(&h, 50.0f64.ln(), 3, &holder).unwrap();
        assert!(rep.pass, "rows: {:?}", rep.rows);
        let last = rep.rows.last().unwrap();
        assert!((last.ratio - 8.0).abs() < 0.05, "ratio = {}", last.ratio);
    }

    #[test]
    fn ratio_check_n_zero_is_trivial() {
        let h = exp_handle();
        let holder = holder_bounds_fit(&PlanarMap::Polynomial(h.map().clone()), 1).unwrap();
        let rep = growth_ratio_check(&h, 50.0f64.ln(), 0, &holder).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!((rep.rows[0].ratio - 1.0).abs() < 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn radii_sequence_exp() {
        let h = exp_handle();
        let rep = radii_sequence(&h, 10.0, 4, 2.0).unwrap();
        // Verdicts are monotone once true.
        let mut seen = false;
        for row in &rep.rows {
            if seen {
                assert!(row.holds, "verdict flipped back at n = {}", row.n);
            }
            seen |= row.holds;
        }
        assert!(rep.first_hold <= 2);
        assert!(rep.rows.iter().skip(2).all(|r| r.holds));
    }

    #[test]
    fn radii_sequence_near_trivial_mu() {
        // mu barely above 1. Exact towers at n = 0: M(r_0) = e^10 against
        // r_1^mu ~ 2 e^10, short by the factor 2^(n+1); from n = 1 the
        // inequality holds decisively.
        let h = exp_handle();
        let rep = radii_sequence(&h, 10.0, 3, 1.0 + 1e-9).unwrap();
        assert_eq!(rep.first_hold, 1);
        assert!(!rep.rows[0].holds);
    }
}
