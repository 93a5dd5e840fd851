//! Construction and evaluation of the linearizer L of a polynomial at a
//! repelling fixed point: L(0) = x0, L'(0) = 1, and p(L(z)) = L(lambda z)
//! with lambda the multiplier.
//!
//! Small arguments go through the Koenigs limit L(z) = lim p^n(x0 + z /
//! lambda^n). Large arguments are reduced by the iterated functional
//! equation L(z) = p^j(L(z / lambda^j)) with the polynomial iteration done
//! in log-polar arithmetic; once iterates are deep in the power-dominated
//! regime the remaining steps collapse to a closed form in tower arithmetic.

use crate::extrange::{normalize_arg, LogPolar, LpValue, TowerMagnitude, TruncationBound};
use crate::maps::{exceptional_values, Classification, FixedPointData, MapError, PolynomialMap};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const KOENIGS_MAX_N: u32 = 200;
const NEWTON_MAX_STEPS: usize = 100;
/// Exact log-polar iteration budget before a reduction is abandoned as
/// bounded-chaotic (the base point never reached the power-dominated regime).
const EXACT_STEP_BUDGET: u64 = 50_000;
/// Beyond this many remaining steps the argument of the result is below
/// floating-point angular resolution; only the magnitude is returned.
const TAIL_ARG_LIMIT: u64 = 48;
/// Log-modulus ceiling for staying in log-polar form.
const LOG_MOD_CAP: f64 = 1e300;

#[derive(Debug, Error)]
pub enum LinearizerError {
    #[error("fixed point is not repelling (|multiplier| = {multiplier_norm})")]
    NotRepelling { multiplier_norm: f64 },
    #[error("fixed point residual {residual} exceeds tolerance for {poly}")]
    BadFixedPoint { poly: String, residual: f64 },
    #[error(
        "Koenigs limit did not converge by n = {max_n} at z = {z} \
         (fixed point too weakly repelling for the tolerance)"
    )]
    KoenigsNoConvergence { z: Complex64, max_n: u32 },
    #[error("no validated convergence radius found for the Koenigs limit")]
    RadiusSearchFailed,
    #[error("Newton inversion left the validated injectivity disk at w = {w}")]
    OutsideInjectivityDisk { w: Complex64 },
    #[error("pointwise evaluation exhausted precision at log-modulus {log_mod:.3e}")]
    PointwiseRangeExhausted { log_mod: f64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// An evaluation result that may have outgrown exact log-polar form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WideValue {
    Zero,
    /// Exact magnitude and argument.
    Polar(LogPolar),
    /// Log-modulus as a tower magnitude; the argument is beyond angular
    /// resolution at this size.
    Magnitude(TowerMagnitude),
}

impl WideValue {
    pub fn from_complex(z: Complex64) -> Self {
        match LpValue::from_complex(z) {
            LpValue::Zero => WideValue::Zero,
            LpValue::Finite(p) => WideValue::Polar(p),
        }
    }

    pub fn from_lp(v: LpValue) -> Self {
        match v {
            LpValue::Zero => WideValue::Zero,
            LpValue::Finite(p) => WideValue::Polar(p),
        }
    }

    /// Log of the modulus, as a tower. `None` for zero.
    pub fn log_mod_tower(&self) -> Option<TowerMagnitude> {
        match self {
            WideValue::Zero => None,
            WideValue::Polar(p) => Some(TowerMagnitude::from_value(p.log_mod)),
            WideValue::Magnitude(t) => Some(*t),
        }
    }

    /// The modulus itself, as a tower. Zero maps to the tower value 0.
    pub fn magnitude_tower(&self) -> TowerMagnitude {
        match self.log_mod_tower() {
            None => TowerMagnitude::from_value(0.0),
            Some(t) => t.exp(),
        }
    }

    pub fn as_polar(&self) -> Option<LogPolar> {
        match self {
            WideValue::Polar(p) => Some(*p),
            _ => None,
        }
    }
}

/// Power-dominated-regime data for a polynomial: once log|z| clears
/// `threshold`, iteration of the log-modulus is affine with ratio d.
#[derive(Clone, Copy, Debug)]
pub struct PolyAsymptotics {
    pub degree: f64,
    /// ln |leading coefficient|.
    pub log_lead: f64,
    /// arg of the leading coefficient.
    pub arg_lead: f64,
    /// A = ln|a_d| / (d - 1), the affine fixed shift: log|p(z)| + A ~ d (log|z| + A).
    pub shift: f64,
    /// Log-modulus above which lower-order terms are below f64 relative
    /// precision.
    pub threshold: f64,
    /// ln of the coefficient mass sum(|a_i|)/|a_d|, for error accounting.
    pub log_coeff_mass: f64,
}

impl PolyAsymptotics {
    pub fn of(p: &PolynomialMap) -> Self {
        let d = p.degree() as f64;
        let lead = p.leading_coefficient();
        let log_lead = lead.norm().ln();
        let mass: f64 = p.coefficients()[..p.degree()]
            .iter()
            .map(|c| c.norm())
            .sum::<f64>()
            / lead.norm();
        let log_coeff_mass = mass.max(1.0).ln();
        PolyAsymptotics {
            degree: d,
            log_lead,
            arg_lead: lead.arg(),
            shift: log_lead / (d - 1.0),
            threshold: 750.0 + log_coeff_mass,
            log_coeff_mass,
        }
    }

    /// Closed form for the log-modulus after `steps` further iterations of p
    /// starting from log-modulus `t >= threshold`:
    /// log|p^s(z)| = d^s (t + A) - A.
    pub fn tail_log_abs(&self, t: f64, steps: &TowerMagnitude) -> TowerMagnitude {
        debug_assert!(t >= self.threshold);
        let u = t + self.shift;
        let steps_f = steps.to_f64();
        if steps_f.is_finite() && steps_f <= 40.0 {
            let pow = self.degree.powf(steps_f);
            let val = pow * u;
            if val < LOG_MOD_CAP {
                return TowerMagnitude::from_value(val - self.shift);
            }
        }
        // ln(result + A) = s ln d + ln u; A is absorbed (result >= e^745).
        steps
            .scale(self.degree.ln())
            .add(&TowerMagnitude::from_value(u.ln()))
            .exp()
    }

    /// ln of the relative error committed by one tail collapse from
    /// log-modulus `t` (geometric sum of the dropped lower-order terms).
    pub fn tail_log_rel_error(&self, t: f64) -> f64 {
        std::f64::consts::LN_2 + self.log_coeff_mass - t
    }

    /// Exact action of the map on log-moduli in the power-dominated regime:
    /// log|p(z)| + A = d (log|z| + A). Valid once the log-modulus clears the
    /// dominance threshold, which any tower-sized magnitude does.
    pub fn push_log_mod(&self, log_mod: &TowerMagnitude) -> TowerMagnitude {
        log_mod
            .add(&TowerMagnitude::from_value(self.shift))
            .scale(self.degree)
            .add(&TowerMagnitude::from_value(-self.shift))
    }
}

/// Serializable description of a constructed handle, for reproducible runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HandleSpec {
    pub coefficients: Vec<Complex64>,
    pub fixed_point: Complex64,
    pub multiplier: Complex64,
    pub scale: Complex64,
    pub linearization_radius: f64,
    pub base_radius: f64,
    pub injectivity_radius: f64,
    pub koenigs_tol: f64,
}

/// A constructed linearizer: the map, its repelling fixed point, the scale
/// (the multiplier), validated radii, and tolerances. Immutable after
/// construction and safe to share across workers.
#[derive(Clone, Debug)]
pub struct LinearizerHandle {
    map: PolynomialMap,
    fp: FixedPointData,
    scale: Complex64,
    /// Taylor coefficients of p(x0 + delta) - x0 with the constant term
    /// forced to zero: the Koenigs orbit runs in deviation coordinates so
    /// that tiny deviations never lose absolute precision against x0.
    shifted: Vec<Complex64>,
    r_lin: f64,
    base_radius: f64,
    delta_inj: f64,
    koenigs_tol: f64,
    asym: PolyAsymptotics,
}

/// Taylor coefficients of p at x0 (constant term first) by repeated
/// synthetic division.
fn taylor_shift(coeffs: &[Complex64], x0: Complex64) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    for k in 0..n {
        for i in (k..n - 1).rev() {
            let next = c[i + 1];
            c[i] += next * x0;
        }
    }
    c
}

impl LinearizerHandle {
    /// Build a handle at a repelling fixed point. Determines the validated
    /// Koenigs radius and the Newton injectivity radius by dyadic search.
    pub fn construct(
        map: PolynomialMap,
        fp: FixedPointData,
        koenigs_tol: f64,
    ) -> Result<Self, LinearizerError> {
        if fp.classification != Classification::Repelling || fp.multiplier.norm() <= 1.0 + 1e-9 {
            return Err(LinearizerError::NotRepelling {
                multiplier_norm: fp.multiplier.norm(),
            });
        }
        let residual = (map.eval(fp.point) - fp.point).norm();
        if residual > 1e-10 * (1.0 + fp.point.norm()) {
            return Err(LinearizerError::BadFixedPoint {
                poly: map.to_string(),
                residual,
            });
        }
        let asym = PolyAsymptotics::of(&map);
        let mut shifted = taylor_shift(map.coefficients(), fp.point);
        // The residual p(x0) - x0 is below working precision; dropping it
        // pins the deviation orbit's fixed point at exactly zero.
        shifted[0] = Complex64::new(0.0, 0.0);
        let mut handle = LinearizerHandle {
            scale: fp.multiplier,
            map,
            fp,
            shifted,
            r_lin: 0.0,
            base_radius: 0.0,
            delta_inj: 0.0,
            koenigs_tol,
            asym,
        };
        handle.base_radius = handle.search_base_radius()?;
        handle.r_lin = handle.base_radius / handle.scale.norm();
        handle.delta_inj = handle.search_injectivity_radius();
        Ok(handle)
    }

    /// Convenience: construct at a repelling fixed point found on the map.
    pub fn at_repelling_point(
        map: PolynomialMap,
        point_hint: Option<Complex64>,
    ) -> Result<Self, LinearizerError> {
        let fps = crate::maps::find_fixed_points(&map)?;
        let chosen = match point_hint {
            Some(hint) => fps
                .into_iter()
                .filter(|f| f.classification == Classification::Repelling)
                .min_by(|a, b| {
                    (a.point - hint)
                        .norm()
                        .partial_cmp(&(b.point - hint).norm())
                        .unwrap()
                }),
            None => fps
                .into_iter()
                .filter(|f| f.classification == Classification::Repelling)
                .max_by(|a, b| {
                    let key = |f: &FixedPointData| (f.multiplier.norm(), f.point.re, f.point.im);
                    key(a).partial_cmp(&key(b)).unwrap()
                }),
        };
        match chosen {
            Some(fp) => Self::construct(map, fp, 1e-12),
            None => Err(LinearizerError::NotRepelling {
                multiplier_norm: 0.0,
            }),
        }
    }

    /// The same linearizer viewed through the iterate p^k, with scale
    /// lambda^k (iterating the conjugated linear map leaves L unchanged).
    pub fn scale_power(&self, k: u32) -> Result<Self, LinearizerError> {
        let iter_map = self.map.iterate_map(k);
        let mut lambda = Complex64::new(1.0, 0.0);
        let mut w = self.fp.point;
        for _ in 0..k {
            lambda *= self.map.eval_derivative(w);
            w = self.map.eval(w);
        }
        let fp = FixedPointData {
            point: self.fp.point,
            multiplier: lambda,
            classification: Classification::from_multiplier(lambda),
        };
        Self::construct(iter_map, fp, self.koenigs_tol)
    }

    pub fn map(&self) -> &PolynomialMap {
        &self.map
    }

    pub fn fixed_point(&self) -> &FixedPointData {
        &self.fp
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn linearization_radius(&self) -> f64 {
        self.r_lin
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.delta_inj
    }

    pub fn koenigs_tol(&self) -> f64 {
        self.koenigs_tol
    }

    pub fn asymptotics(&self) -> &PolyAsymptotics {
        &self.asym
    }

    pub fn to_spec(&self) -> HandleSpec {
        HandleSpec {
            coefficients: self.map.coefficients().to_vec(),
            fixed_point: self.fp.point,
            multiplier: self.fp.multiplier,
            scale: self.scale,
            linearization_radius: self.r_lin,
            base_radius: self.base_radius,
            injectivity_radius: self.delta_inj,
            koenigs_tol: self.koenigs_tol,
        }
    }

    pub fn from_spec(spec: &HandleSpec) -> Result<Self, LinearizerError> {
        let map = PolynomialMap::new(spec.coefficients.clone())?;
        let fp = FixedPointData {
            point: spec.fixed_point,
            multiplier: spec.multiplier,
            classification: Classification::from_multiplier(spec.multiplier),
        };
        let handle = Self::construct(map, fp, spec.koenigs_tol)?;
        Ok(handle)
    }

    /// Largest number of functional-equation steps for which the base-circle
    /// argument survives floating point. Unlimited for real positive scale.
    pub fn pointwise_step_limit(&self) -> f64 {
        if self.scale.im == 0.0 && self.scale.re > 0.0 {
            2f64.powi(50)
        } else {
            4.0e6
        }
    }

    fn eval_shifted(&self, delta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.shifted.iter().rev() {
            acc = acc * delta + c;
        }
        acc
    }

    fn eval_shifted_derivative(&self, delta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in self.shifted.iter().enumerate().skip(1).rev() {
            acc = acc * delta + c * (i as f64);
        }
        acc
    }

    fn koenigs_iterate(&self, z: Complex64, n: u32) -> Complex64 {
        let lambda_inv = 1.0 / self.scale;
        let mut delta = z * lambda_inv.powi(n as i32);
        for _ in 0..n {
            delta = self.eval_shifted(delta);
        }
        self.fp.point + delta
    }

    /// The Koenigs limit L(z) for |z| <= base_radius: pick n with
    /// |z| / |lambda|^n inside the validated radius and iterate until two
    /// successive depths agree to tolerance.
    pub fn koenigs_eval(&self, z: Complex64) -> Result<Complex64, LinearizerError> {
        if z.norm() == 0.0 {
            return Ok(self.fp.point);
        }
        let start = self.start_depth(z.norm());
        let mut prev = self.koenigs_iterate(z, start);
        for n in (start + 1)..=KOENIGS_MAX_N {
            let cur = self.koenigs_iterate(z, n);
            if !cur.re.is_finite() || !cur.im.is_finite() {
                return Err(LinearizerError::KoenigsNoConvergence {
                    z,
                    max_n: KOENIGS_MAX_N,
                });
            }
            if (cur - prev).norm() <= self.koenigs_tol * (1.0 + cur.norm()) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(LinearizerError::KoenigsNoConvergence {
            z,
            max_n: KOENIGS_MAX_N,
        })
    }

    /// L(z) and L'(z) together; the derivative comes from the chain rule
    /// along the Koenigs orbit, (p^n)'(w) / lambda^n.
    pub fn koenigs_eval_with_derivative(
        &self,
        z: Complex64,
    ) -> Result<(Complex64, Complex64), LinearizerError> {
        if z.norm() == 0.0 {
            return Ok((self.fp.point, Complex64::new(1.0, 0.0)));
        }
        let start = self.start_depth(z.norm());
        let eval_pair = |n: u32| -> (Complex64, Complex64) {
            let lambda_inv_n = (1.0 / self.scale).powi(n as i32);
            let mut delta = z * lambda_inv_n;
            let mut deriv = lambda_inv_n;
            for _ in 0..n {
                deriv *= self.eval_shifted_derivative(delta);
                delta = self.eval_shifted(delta);
            }
            (self.fp.point + delta, deriv)
        };
        let (mut pv, mut pd) = eval_pair(start);
        for n in (start + 1)..=KOENIGS_MAX_N {
            let (v, d) = eval_pair(n);
            if (v - pv).norm() <= self.koenigs_tol * (1.0 + v.norm())
                && (d - pd).norm() <= 1e-9 * (1.0 + d.norm())
            {
                return Ok((v, d));
            }
            pv = v;
            pd = d;
        }
        Err(LinearizerError::KoenigsNoConvergence {
            z,
            max_n: KOENIGS_MAX_N,
        })
    }

    fn start_depth(&self, r: f64) -> u32 {
        let floor = if self.r_lin > 0.0 {
            self.r_lin
        } else {
            0.05 * (1.0 + self.fp.point.norm())
        };
        let ratio = r / floor;
        if ratio <= 1.0 {
            1
        } else {
            (ratio.ln() / self.scale.norm().ln()).ceil() as u32 + 1
        }
    }

    /// Functional-equation residual |p(L(z)) - L(lambda z)| / (1 + |L(lambda z)|).
    pub fn residual(&self, z: Complex64) -> Result<f64, LinearizerError> {
        let left = self.map.eval(self.koenigs_eval(z)?);
        let right = self.koenigs_eval(self.scale * z)?;
        Ok((left - right).norm() / (1.0 + right.norm()))
    }

    /// Evaluate L at any nonzero point, arbitrarily large. Chooses the
    /// minimal j with |z| / |lambda|^j inside the base radius, evaluates the
    /// Koenigs limit there, and pushes forward j times through p in
    /// log-polar arithmetic (collapsing to the closed-form tail once the
    /// orbit is power-dominated).
    pub fn eval_large(
        &self,
        z: LpValue,
    ) -> Result<(WideValue, TruncationBound), LinearizerError> {
        let mut bound = TruncationBound::exact();
        let p = match z {
            LpValue::Zero => {
                return Ok((WideValue::from_complex(self.fp.point), bound));
            }
            LpValue::Finite(p) => p,
        };
        let log_base = self.base_radius.ln();
        if p.log_mod <= log_base {
            let v = self.koenigs_eval(p.to_complex())?;
            return Ok((WideValue::from_complex(v), bound));
        }

        let log_lambda = self.scale.norm().ln();
        let mut j = ((p.log_mod - log_base) / log_lambda).ceil();
        if j > self.pointwise_step_limit() {
            return Err(LinearizerError::PointwiseRangeExhausted { log_mod: p.log_mod });
        }
        let mut w_log = p.log_mod - j * log_lambda;
        while w_log > log_base {
            j += 1.0;
            w_log -= log_lambda;
        }
        let steps = j as u64;
        let w_arg = normalize_arg(p.arg - j * self.scale.arg());
        let w = Complex64::from_polar(w_log.exp(), w_arg);
        let base_val = self.koenigs_eval(w)?;
        let mut cur = LpValue::from_complex(base_val);

        let mut done: u64 = 0;
        while done < steps {
            let remaining = steps - done;
            if let LpValue::Finite(q) = cur {
                let tail_ready = q.log_mod >= self.asym.threshold;
                if tail_ready && (remaining > TAIL_ARG_LIMIT || q.log_mod >= LOG_MOD_CAP / self.asym.degree) {
                    let log_abs = self
                        .asym
                        .tail_log_abs(q.log_mod, &TowerMagnitude::from_value(remaining as f64));
                    bound.record(self.asym.tail_log_rel_error(q.log_mod));
                    return Ok((WideValue::Magnitude(log_abs), bound));
                }
            }
            if done >= EXACT_STEP_BUDGET {
                return Err(LinearizerError::PointwiseRangeExhausted { log_mod: p.log_mod });
            }
            cur = self.map.eval_lp(cur, &mut bound);
            done += 1;
        }
        Ok((WideValue::from_lp(cur), bound))
    }

    /// One orbit step under L for wide values. Magnitude-only inputs have no
    /// recoverable argument, so the orbit cannot be continued past them.
    pub fn eval_wide(
        &self,
        z: &WideValue,
    ) -> Result<(WideValue, TruncationBound), LinearizerError> {
        match z {
            WideValue::Zero => Ok((
                WideValue::from_complex(self.fp.point),
                TruncationBound::exact(),
            )),
            WideValue::Polar(p) => self.eval_large(LpValue::Finite(*p)),
            WideValue::Magnitude(t) => Err(LinearizerError::PointwiseRangeExhausted {
                log_mod: t.to_f64(),
            }),
        }
    }

    /// Local inverse of L near 0 by Newton iteration seeded from w - x0
    /// (valid because L'(0) = 1). Requires |w - x0| within the validated
    /// injectivity radius.
    pub fn local_inverse(&self, w: Complex64) -> Result<Complex64, LinearizerError> {
        self.newton_invert(w).ok_or(LinearizerError::OutsideInjectivityDisk { w })
    }

    fn newton_invert(&self, w: Complex64) -> Option<Complex64> {
        let mut z = w - self.fp.point;
        for _ in 0..NEWTON_MAX_STEPS {
            if z.norm() > self.base_radius {
                return None;
            }
            let (val, deriv) = self.koenigs_eval_with_derivative(z).ok()?;
            let err = val - w;
            if err.norm() <= 1e-12 * (1.0 + w.norm()) {
                return Some(z);
            }
            if deriv.norm() < 1e-14 {
                return None;
            }
            z -= err / deriv;
        }
        // Accept if the last iterate already meets the contract tolerance.
        let val = self.koenigs_eval(z).ok()?;
        if (val - w).norm() <= 1e-10 * (1.0 + w.norm()) {
            Some(z)
        } else {
            None
        }
    }

    /// Dyadic search for the largest radius at which the Koenigs limit
    /// converges and doubling the depth moves the value by less than the
    /// tolerance, at 32 test angles.
    fn search_base_radius(&self) -> Result<f64, LinearizerError> {
        let unit = 1.0 + self.fp.point.norm();
        let finite = |v: Complex64| v.re.is_finite() && v.im.is_finite();
        let qualifies = |rho: f64| -> bool {
            for k in 0..32 {
                let theta = std::f64::consts::TAU * (k as f64) / 32.0;
                let z = Complex64::from_polar(rho, theta);
                let start = self.start_depth(rho);
                if start > KOENIGS_MAX_N / 2 {
                    return false;
                }
                let mut prev = self.koenigs_iterate(z, start);
                let mut settled = None;
                for n in (start + 1)..=(KOENIGS_MAX_N / 2) {
                    let cur = self.koenigs_iterate(z, n);
                    if !finite(cur) {
                        return false;
                    }
                    if (cur - prev).norm() <= self.koenigs_tol * (1.0 + cur.norm()) {
                        settled = Some((n, cur));
                        break;
                    }
                    prev = cur;
                }
                let Some((n, v)) = settled else {
                    return false;
                };
                // The settled value still carries ~tol of truncation, so the
                // doubling comparison gets a small constant of slack.
                let doubled = self.koenigs_iterate(z, 2 * n);
                if !finite(doubled)
                    || (doubled - v).norm() > 4.0 * self.koenigs_tol * (1.0 + doubled.norm())
                {
                    return false;
                }
            }
            true
        };

        let mut rho = unit;
        if qualifies(rho) {
            // Grow while valid; cap keeps intermediate moduli finite.
            while rho < unit * 2f64.powi(40) && qualifies(rho * 2.0) {
                rho *= 2.0;
            }
            Ok(rho)
        } else {
            while rho > unit * 2f64.powi(-30) {
                rho /= 2.0;
                if qualifies(rho) {
                    return Ok(rho);
                }
            }
            Err(LinearizerError::RadiusSearchFailed)
        }
    }

    /// Largest dyadic radius around x0 from which Newton inversion converges
    /// at all 64 boundary seeds.
    fn search_injectivity_radius(&self) -> f64 {
        let unit = 1.0 + self.fp.point.norm();
        let qualifies = |delta: f64| -> bool {
            (0..64).all(|k| {
                let theta = std::f64::consts::TAU * (k as f64) / 64.0;
                let w = self.fp.point + Complex64::from_polar(delta, theta);
                self.newton_invert(w).is_some()
            })
        };
        let mut delta = 0.5 * unit;
        if qualifies(delta) {
            while delta < unit * 16.0 && qualifies(delta * 2.0) {
                delta *= 2.0;
            }
        } else {
            while delta > unit * 2f64.powi(-20) && !qualifies(delta) {
                delta /= 2.0;
            }
        }
        delta
    }
}

/// Verdict of the omitted-values consistency report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consistency {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: Complex64,
    pub preimage: Option<Complex64>,
    pub residual: Option<f64>,
}

/// Report produced by [`omitted_values_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OmittedValuesReport {
    /// The claimed omitted set: exceptional values of the base map, minus
    /// the fixed point itself.
    pub claimed_omitted: Vec<Complex64>,
    /// Per candidate: the minimum of |L(z) - v| over the sampling grid.
    pub candidate_grid_min: Vec<(Complex64, f64)>,
    /// Per candidate: whether a bounded-seed Newton search reached it
    /// (it must not, for consistency).
    pub candidate_attained: Vec<(Complex64, bool)>,
    /// Random non-candidate targets and their preimages.
    pub targets: Vec<TargetResult>,
    /// Whether the fixed point itself was attained (it always is: L(0) = x0).
    pub fixed_point_attained: bool,
    pub verdict: Consistency,
}

/// Searches for a preimage of `target` by Newton iteration from several grid
/// seeds. A target counts as attained only if Newton converges to a bounded
/// point with vanishing steps; residual decay alone is not enough (toward an
/// omitted value the Newton orbit marches to infinity while the residual
/// underflows).
fn attain_target(
    h: &LinearizerHandle,
    target: Complex64,
    seeds: &[Complex64],
) -> Option<(Complex64, f64)> {
    for &seed in seeds {
        let mut z = seed;
        for _ in 0..NEWTON_MAX_STEPS {
            if z.norm() > h.base_radius() {
                break;
            }
            let Ok((val, deriv)) = h.koenigs_eval_with_derivative(z) else {
                break;
            };
            let err = val - target;
            if deriv.norm() < 1e-14 {
                break;
            }
            let step = err / deriv;
            // Converged means both a small residual and a vanishing step.
            // Toward an omitted value the residual underflows while the
            // Newton orbit marches off to infinity with unit-sized steps.
            if err.norm() <= 1e-10 * (1.0 + target.norm())
                && step.norm() <= 1e-8 * (1.0 + z.norm())
            {
                return Some((z, err.norm()));
            }
            z -= step;
        }
    }
    None
}

/// Numerical consistency check of "the omitted values of L are the
/// exceptional values of f except x0": candidates must evade a preimage
/// search while random non-candidates and x0 itself are all attained.
pub fn omitted_values_check(
    h: &LinearizerHandle,
    search_radius: f64,
    grid: usize,
    seed: u64,
) -> Result<OmittedValuesReport, LinearizerError> {
    use rand::SeedableRng;
    let radius = search_radius.min(h.base_radius());
    let x0 = h.fixed_point().point;

    let mut claimed: Vec<Complex64> = exceptional_values(h.map())?
        .into_iter()
        .filter(|v| (v - x0).norm() > 1e-8 * (1.0 + x0.norm()))
        .collect();
    claimed.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    // Sample L over the grid once; reuse for minima and Newton seeds.
    let mut samples: Vec<(Complex64, Complex64)> = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for k in 0..grid {
            let re = -radius + 2.0 * radius * (i as f64 + 0.5) / grid as f64;
            let im = -radius + 2.0 * radius * (k as f64 + 0.5) / grid as f64;
            let z = Complex64::new(re, im);
            if z.norm() > radius {
                continue;
            }
            if let Ok(v) = h.koenigs_eval(z) {
                samples.push((z, v));
            }
        }
    }

    let seeds_for = |target: Complex64| -> Vec<Complex64> {
        let mut ranked: Vec<(f64, Complex64)> = samples
            .iter()
            .map(|&(z, v)| ((v - target).norm(), z))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        ranked.iter().take(8).map(|&(_, z)| z).collect()
    };

    let mut candidate_grid_min = Vec::new();
    let mut candidate_attained = Vec::new();
    for &v in &claimed {
        let min_dist = samples
            .iter()
            .map(|&(_, val)| (val - v).norm())
            .fold(f64::MAX, f64::min);
        candidate_grid_min.push((v, min_dist));
        let hit = attain_target(h, v, &seeds_for(v)).is_some();
        candidate_attained.push((v, hit));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::new();
    let mut attained_count = 0;
    while targets.len() < 20 {
        let t = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let near_candidate = claimed.iter().any(|&v| (v - t).norm() < 0.3);
        if near_candidate {
            continue;
        }
        let target = x0 + t;
        match attain_target(h, target, &seeds_for(target)) {
            Some((z, residual)) => {
                attained_count += 1;
                targets.push(TargetResult {
                    target,
                    preimage: Some(z),
                    residual: Some(residual),
                });
            }
            None => targets.push(TargetResult {
                target,
                preimage: None,
                residual: None,
            }),
        }
    }

    let fixed_point_attained = attain_target(h, x0, &[Complex64::new(0.0, 0.0)]).is_some();
    let consistent = candidate_attained.iter().all(|&(_, hit)| !hit)
        && attained_count == targets.len()
        && fixed_point_attained;

    Ok(OmittedValuesReport {
        claimed_omitted: claimed,
        candidate_grid_min,
        candidate_attained,
        targets,
        fixed_point_attained,
        verdict: if consistent {
            Consistency::Consistent
        } else {
            Consistency::Inconsistent
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::OracleLinearizer;

    pub(crate) fn exp_handle() -> LinearizerHandle {
        let o = OracleLinearizer::exp_for_power_map(2);
        LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
    }

    pub(crate) fn cosh_handle() -> LinearizerHandle {
        let o = OracleLinearizer::cosh_for_chebyshev();
        LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
    }

    pub(crate) fn figure1_handle() -> LinearizerHandle {
        let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
        LinearizerHandle::at_repelling_point(map, None).unwrap()
    }

    #[test]
    fn koenigs_at_zero_is_fixed_point() {
        let h = exp_handle();
        assert_eq!(h.koenigs_eval(Complex64::new(0.0, 0.0)).unwrap(), h.fixed_point().point);
    }

    #[test]
    fn koenigs_matches_exp_oracle() {
        let h = exp_handle();
        let got = h.koenigs_eval(Complex64::new(1.0, 0.0)).unwrap();
        assert!((got.re - std::f64::consts::E).abs() < 1e-9, "got {got}");
        assert!(got.im.abs() < 1e-9);
    }

    #[test]
    fn koenigs_matches_cosh_oracle() {
        let h = cosh_handle();
        let got = h.koenigs_eval(Complex64::new(1.0, 0.0)).unwrap();
        let want = 2.0 * 1.0f64.cosh();
        assert!((got.re - want).abs() < 1e-9, "got {got} want {want}");
        assert!(got.im.abs() < 1e-9);
    }

    #[test]
    fn residual_examples() {
        let h = exp_handle();
        assert!(h.residual(Complex64::new(0.0, 0.0)).unwrap() <= 1e-10);
        assert!(h.residual(Complex64::new(0.7, 0.2)).unwrap() <= 1e-8);

        let f1 = figure1_handle();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rho = f1.linearization_radius();
        for _ in 0..100 {
            let r: f64 = rng.random_range(0.0..rho);
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(r, t);
            let res = f1.residual(z).unwrap();
            assert!(res <= 1e-8, "residual {res} at {z}");
        }
    }

    #[test]
    fn eval_large_exp_small_consistency() {
        let h = exp_handle();
        let z = Complex64::new(1.3, -0.4);
        let (wide, _) = h.eval_large(LpValue::from_complex(z)).unwrap();
        let direct = h.koenigs_eval(z).unwrap();
        let p = wide.as_polar().unwrap();
        let got = p.to_complex();
        assert!((got - direct).norm() / direct.norm() < 1e-10);
    }

    #[test]
    fn eval_large_exp_through_three_steps() {
        // L(8) = e^8 needs three functional-equation steps past rho_base/|lambda|^3.
        let h = exp_handle();
        let z = LpValue::from_complex(Complex64::new(8.0, 0.0));
        let (wide, _) = h.eval_large(z).unwrap();
        let lm = wide.log_mod_tower().unwrap();
        assert_eq!(lm.height(), 0);
        assert!((lm.residual() - 8.0).abs() < 1e-8, "log-mod {}", lm.residual());
    }

    #[test]
    fn eval_large_exp_extreme_magnitude() {
        // |z| = e^500 on the positive axis: log |L(z)| = e^500, a height-1 tower.
        let h = exp_handle();
        let z = LpValue::Finite(LogPolar::new(500.0, 0.0));
        let (wide, _) = h.eval_large(z).unwrap();
        let lm = wide.log_mod_tower().unwrap();
        assert!(lm.height() >= 1, "expected tower log-modulus, got {lm:?}");
        let log_log = lm.ln().to_f64();
        assert!((log_log - 500.0).abs() < 1e-6, "log log |L| = {log_log}");
    }

    #[test]
    fn local_inverse_examples() {
        let h = exp_handle();
        assert!(h.local_inverse(h.fixed_point().point).unwrap().norm() < 1e-10);
        let z = h.local_inverse(Complex64::new(0.1f64.exp(), 0.0)).unwrap();
        assert!((z - Complex64::new(0.1, 0.0)).norm() < 1e-9);

        let ch = cosh_handle();
        let w = Complex64::new(2.0 * 0.3f64.cosh(), 0.0);
        let z = ch.local_inverse(w).unwrap();
        assert!((z - Complex64::new(0.09, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn local_inverse_round_trip() {
        let h = figure1_handle();
        let delta = h.injectivity_radius() / 2.0;
        for k in 0..16 {
            let theta = std::f64::consts::TAU * (k as f64) / 16.0;
            let z = Complex64::from_polar(delta, theta);
            let w = h.koenigs_eval(z).unwrap();
            let back = h.local_inverse(w).unwrap();
            assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()), "z {z} back {back}");
        }
    }

    #[test]
    fn scale_power_matches_base_linearizer() {
        // Scale lambda^2 pairs with the iterate p^2; the linearizer is
        // unchanged: for z^2 at 1 it stays e^z.
        let h = exp_handle();
        let h2 = h.scale_power(2).unwrap();
        assert!((h2.scale() - Complex64::new(4.0, 0.0)).norm() < 1e-9);
        for k in 0..200 {
            let t = k as f64;
            let z = Complex64::from_polar(1.5 * ((t * 0.37).fract()), t * 0.61);
            let got = h2.koenigs_eval(z).unwrap();
            let want = z.exp();
            assert!((got - want).norm() / want.norm() < 1e-9, "z {z}");
        }
    }

    #[test]
    fn nonrepelling_point_is_rejected() {
        let map = PolynomialMap::power(2);
        let fp = FixedPointData {
            point: Complex64::new(0.0, 0.0),
            multiplier: Complex64::new(0.0, 0.0),
            classification: Classification::Attracting,
        };
        assert!(matches!(
            LinearizerHandle::construct(map, fp, 1e-12),
            Err(LinearizerError::NotRepelling { .. })
        ));
    }

    #[test]
    fn handle_spec_round_trip() {
        let h = figure1_handle();
        let json = serde_json::to_string(&h.to_spec()).unwrap();
        let spec: HandleSpec = serde_json::from_str(&json).unwrap();
        let h2 = LinearizerHandle::from_spec(&spec).unwrap();
        let z = Complex64::new(0.3, 0.2);
        let a = h.koenigs_eval(z).unwrap();
        let b = h2.koenigs_eval(z).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn omitted_check_exp() {
        let h = exp_handle();
        let report = omitted_values_check(&h, 20.0, 48, 0).unwrap();
        assert_eq!(report.claimed_omitted.len(), 1);
        assert!(report.claimed_omitted[0].norm() < 1e-9);
        assert!(report.fixed_point_attained);
        assert_eq!(report.verdict, Consistency::Consistent);
    }

    #[test]
    fn omitted_check_figure1() {
        let h = figure1_handle();
        let report = omitted_values_check(&h, 20.0, 48, 0).unwrap();
        assert!(report.claimed_omitted.is_empty());
        assert_eq!(report.verdict, Consistency::Consistent);
    }
}
