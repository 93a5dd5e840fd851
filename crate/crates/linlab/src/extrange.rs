//! Extended-range arithmetic.
//!
//! Orbits of linearizers overflow native floating point within a handful of
//! iterations, and iterated maximum-modulus levels overflow *any* fixed
//! exponent scheme. Two representations cover the whole range:
//!
//! * [`LogPolar`] stores a nonzero planar point as (log modulus, argument),
//!   good for moduli up to `exp(1.8e308)`.
//! * [`TowerMagnitude`] stores a real number as `exp` applied `height` times
//!   to a residual, good for comparing quantities like `M^n(R, f)` across
//!   exponential levels.
//!
//! Error bounds here are tracked heuristically (dropped addends are recorded
//! in a [`TruncationBound`]); they are not certified interval bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

/// Log-scale gap beyond which an addend is dropped: `e^-745` underflows f64,
/// so the truncation is exact at working precision.
pub const DOMINANCE_THRESHOLD: f64 = 745.0;

/// `ln` of the tower normalization constant `C_norm = e^30`. Residuals at
/// height >= 1 live in `[30, e^30)`.
pub const TOWER_LN_NORM: f64 = 30.0;

/// The tower normalization constant `C_norm = e^30`.
pub fn tower_norm() -> f64 {
    TOWER_LN_NORM.exp()
}

/// Normalize an angle into `(-pi, pi]`.
pub fn normalize_arg(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A nonzero planar point in log-polar form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPolar {
    /// Natural log of the modulus.
    pub log_mod: f64,
    /// Argument in radians, normalized to `(-pi, pi]`.
    pub arg: f64,
}

impl LogPolar {
    pub fn new(log_mod: f64, arg: f64) -> Self {
        Self {
            log_mod,
            arg: normalize_arg(arg),
        }
    }

    /// Log-polar form of a nonzero complex number.
    pub fn from_complex(z: Complex64) -> Self {
        debug_assert!(z.re != 0.0 || z.im != 0.0, "zero has no log-polar form");
        Self {
            log_mod: z.norm().ln(),
            arg: z.arg(),
        }
    }

    /// Back to a native complex number. Exact to ~1e-15 relative while
    /// `log_mod` stays within +-700; overflows/underflows outside.
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.log_mod.exp(), self.arg)
    }
}

/// A log-polar value with an explicit zero marker. `LogPolar` cannot encode
/// zero; using a marker instead of `log_mod = -inf` keeps arguments NaN-free.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LpValue {
    Zero,
    Finite(LogPolar),
}

impl LpValue {
    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            LpValue::Zero
        } else {
            LpValue::Finite(LogPolar::from_complex(z))
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            LpValue::Zero => Complex64::new(0.0, 0.0),
            LpValue::Finite(p) => p.to_complex(),
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, LpValue::Zero)
    }

    pub fn finite(self) -> Option<LogPolar> {
        match self {
            LpValue::Zero => None,
            LpValue::Finite(p) => Some(p),
        }
    }
}

/// Accumulated relative truncation, stored as `ln` of the bound.
/// `NEG_INFINITY` means no truncation has occurred. Bounds only grow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationBound {
    log_rel: f64,
}

impl TruncationBound {
    pub fn exact() -> Self {
        Self {
            log_rel: f64::NEG_INFINITY,
        }
    }

    /// Record a relative perturbation of size `exp(log_rel)`.
    pub fn record(&mut self, log_rel: f64) {
        self.log_rel = log_add_exp(self.log_rel, log_rel);
    }

    pub fn absorb(&mut self, other: &TruncationBound) {
        self.log_rel = log_add_exp(self.log_rel, other.log_rel);
    }

    /// `ln` of the accumulated relative bound (`-inf` when exact).
    pub fn log_rel(&self) -> f64 {
        self.log_rel
    }

    pub fn is_exact(&self) -> bool {
        self.log_rel == f64::NEG_INFINITY
    }

    /// For JSON reports, where `-inf` is not a number.
    pub fn log_rel_option(&self) -> Option<f64> {
        if self.is_exact() {
            None
        } else {
            Some(self.log_rel)
        }
    }
}

impl Default for TruncationBound {
    fn default() -> Self {
        Self::exact()
    }
}

/// `ln(e^a + e^b)` without overflow.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Product of two log-polar values: log-moduli add, arguments add and
/// renormalize.
pub fn lp_mul(a: LpValue, b: LpValue) -> LpValue {
    match (a, b) {
        (LpValue::Finite(x), LpValue::Finite(y)) => LpValue::Finite(LogPolar::new(
            x.log_mod + y.log_mod,
            x.arg + y.arg,
        )),
        _ => LpValue::Zero,
    }
}

/// Multiply by the `k`-th power of a fixed log-polar base.
///
/// The argument rotation `k * base.arg` is reduced mod 2pi in f64, so this
/// is only angle-accurate for |k| up to ~1e12; callers in that regime only.
pub fn lp_mul_pow(a: LogPolar, base: LogPolar, k: i64) -> LogPolar {
    let kf = k as f64;
    LogPolar::new(a.log_mod + kf * base.log_mod, a.arg + kf * base.arg)
}

/// Sum of two log-polar values, computed by factoring out the dominant term.
///
/// When the log-moduli differ by more than [`DOMINANCE_THRESHOLD`], the
/// smaller addend is below representable relative size; the dominant value is
/// returned unchanged and the truncation is recorded in `bound`. An exact
/// cancellation yields the zero marker.
pub fn lp_add(a: LpValue, b: LpValue, bound: &mut TruncationBound) -> LpValue {
    let (x, y) = match (a, b) {
        (LpValue::Zero, v) => return v,
        (v, LpValue::Zero) => return v,
        (LpValue::Finite(x), LpValue::Finite(y)) => {
            if x.log_mod >= y.log_mod {
                (x, y)
            } else {
                (y, x)
            }
        }
    };
    let gap = x.log_mod - y.log_mod;
    if gap > DOMINANCE_THRESHOLD {
        bound.record(-gap);
        return LpValue::Finite(x);
    }
    // 1 + (y/x) with |y/x| <= 1.
    let ratio = Complex64::from_polar((-gap).exp(), y.arg - x.arg);
    let s = Complex64::new(1.0, 0.0) + ratio;
    // Cancellation below f64 resolution of the dominant term is an exact
    // zero at working precision.
    if s.norm() < 4.0 * f64::EPSILON {
        return LpValue::Zero;
    }
    LpValue::Finite(LogPolar::new(x.log_mod + s.norm().ln(), x.arg + s.arg()))
}

/// Horner evaluation of a polynomial (constant term first) in log-polar
/// arithmetic. Truncations from dominated addends accumulate in `bound`.
pub fn poly_eval_lp(coeffs: &[Complex64], z: LpValue, bound: &mut TruncationBound) -> LpValue {
    let mut acc = LpValue::Zero;
    for &c in coeffs.iter().rev() {
        acc = lp_add(lp_mul(acc, z), LpValue::from_complex(c), bound);
    }
    acc
}

/// A positive real in nested-exponential form:
/// `levels[0] + exp(levels[1] + exp(... + exp(levels[h])))`.
///
/// The plain tower form exp^h(residual) cannot keep sub-leading factors:
/// at height 2 and above, multiplying by a bounded constant moves the top
/// residual by less than one ulp, yet such factors decide the growth-lemma
/// comparisons. Carrying a native additive offset at every exponential
/// level keeps those margins exact: operations only touch the two outermost
/// slots, so deep slots of structurally related quantities stay bit-equal
/// and comparisons resolve at the first level where the chains differ.
///
/// Normal form: the top slot lies in `[30, e^30)` for heights >= 1, whole
/// stacks collapse to native whenever the exponential part fits in f64, and
/// height-0 values stay below `e^30`. Height-0 values may be negative (logs
/// of small quantities). The `(height, residual)` view is
/// `(levels() - 1, top slot)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TowerMagnitude {
    len: u8,
    levels: [f64; TOWER_MAX_LEVELS],
}

/// Maximum nesting depth; exp^7-sized magnitudes exceed every comparison
/// this library performs.
pub const TOWER_MAX_LEVELS: usize = 8;

/// Saturating evaluation of `l[0] + exp(l[1] + exp(...))`.
fn stack_value(levels: &[f64]) -> f64 {
    let mut v = *levels.last().unwrap();
    for &l in levels.iter().rev().skip(1) {
        v = l + v.exp();
    }
    v
}

/// Saturating difference of two stacks of equal length, exact where the
/// exponential parts agree bit-for-bit.
fn stack_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 && b.len() == 1 {
        return a[0] - b[0];
    }
    let (fa, fb) = (stack_value(a), stack_value(b));
    if fa.is_finite() && fb.is_finite() {
        return fa - fb;
    }
    if a.len() != b.len() {
        // Normal form: longer stacks represent strictly larger values.
        return if a.len() > b.len() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    let ds = stack_diff(&a[1..], &b[1..]);
    if ds == 0.0 {
        return a[0] - b[0];
    }
    let vb = stack_value(&b[1..]);
    if vb <= 709.0 {
        // exp parts are native; difference is exactly computable.
        return (a[0] - b[0]) + vb.exp() * ds.exp_m1();
    }
    // exp(vb) >= 8e307 amplifies any resolvable ds past every offset.
    if ds > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

impl TowerMagnitude {
    fn from_stack(levels: &[f64]) -> Self {
        debug_assert!(!levels.is_empty());
        let mut t = TowerMagnitude {
            len: 0,
            levels: [0.0; TOWER_MAX_LEVELS],
        };
        // Over-deep stacks keep their deepest slots; shallow riders are
        // sub-precision at that nesting depth.
        let n = levels.len().min(TOWER_MAX_LEVELS);
        t.levels[..n].copy_from_slice(&levels[levels.len() - n..]);
        t.len = n as u8;
        t.normalized()
    }

    fn stack(&self) -> &[f64] {
        &self.levels[..self.len as usize]
    }

    /// The real number `x` itself (height 0 unless it exceeds `e^30`).
    pub fn from_value(x: f64) -> Self {
        Self::from_stack(&[x])
    }

    /// The value `e^log_x`.
    pub fn from_log(log_x: f64) -> Self {
        Self::from_stack(&[0.0, log_x])
    }

    /// Plain-tower constructor exp^height(residual); normalizes.
    pub fn new(height: u32, residual: f64) -> Self {
        let mut levels = vec![0.0; height as usize + 1];
        levels[height as usize] = residual;
        Self::from_stack(&levels)
    }

    /// Number of exponential levels above the base slot.
    pub fn height(&self) -> u32 {
        self.len as u32 - 1
    }

    /// The top (deepest) slot; equals the plain tower residual when all
    /// offsets vanish.
    pub fn residual(&self) -> f64 {
        self.levels[self.len as usize - 1]
    }

    fn normalized(mut self) -> Self {
        debug_assert!(
            self.stack().iter().all(|l| !l.is_nan()),
            "NaN tower level"
        );
        for _ in 0..64 {
            let len = self.len as usize;
            if len == 1 {
                if self.levels[0] >= tower_norm() {
                    // Lift a large native into exponential form.
                    let x = self.levels[0];
                    self.levels[0] = 0.0;
                    self.levels[1] = x.ln();
                    self.len = 2;
                    continue;
                }
                return self;
            }
            // Collapse a stack to native only when the result stays below
            // the lift threshold; otherwise offsets keep their exact slots.
            let v1 = stack_value(&self.stack()[1..]);
            if v1 <= 709.0 {
                let x = self.levels[0] + v1.exp();
                if x < tower_norm() {
                    self.levels[0] = x;
                    self.len = 1;
                    continue;
                }
            }
            let top = self.levels[len - 1];
            if top >= tower_norm() {
                if len < TOWER_MAX_LEVELS {
                    // Lift the top slot.
                    self.levels[len - 1] = 0.0;
                    self.levels[len] = top.ln();
                    self.len += 1;
                    continue;
                }
                // Depth cap: clamp instead of growing (unreachable in use).
                self.levels[len - 1] = tower_norm().next_down();
                return self;
            }
            if top < TOWER_LN_NORM {
                // Fold the top into the slot below.
                self.levels[len - 2] += top.exp();
                self.len -= 1;
                continue;
            }
            return self;
        }
        self
    }

    /// Native value; saturates to `inf` beyond f64 range.
    pub fn to_f64(&self) -> f64 {
        stack_value(self.stack())
    }

    /// The saturation value at the nesting cap: compares at least as large
    /// as every representable magnitude of full depth.
    pub fn saturated() -> Self {
        let mut levels = [0.0; TOWER_MAX_LEVELS];
        levels[TOWER_MAX_LEVELS - 1] = tower_norm().next_down();
        TowerMagnitude {
            len: TOWER_MAX_LEVELS as u8,
            levels,
        }
    }

    /// `exp` of the represented value; saturates at the nesting cap.
    pub fn exp(&self) -> Self {
        if self.len as usize == TOWER_MAX_LEVELS {
            return Self::saturated();
        }
        let len = self.len as usize + 1;
        let mut levels = [0.0; TOWER_MAX_LEVELS];
        levels[1..len].copy_from_slice(self.stack());
        Self::from_stack(&levels[..len])
    }

    /// Natural log of the represented value. For nonpositive native values
    /// this saturates to `-inf` (the log-line has no tower form there).
    pub fn ln(&self) -> Self {
        if self.len == 1 {
            let x = self.levels[0];
            return Self::from_value(if x > 0.0 { x.ln() } else { f64::NEG_INFINITY });
        }
        // ln(l0 + exp(v1)) = v1 + ln(1 + l0 exp(-v1)); the correction
        // underflows to an exact 0 once the exponential part is huge.
        let v1 = stack_value(&self.stack()[1..]);
        let corr = (self.levels[0] * (-v1).exp()).ln_1p();
        let mut rest = Self::from_stack(&self.stack()[1..]);
        rest.levels[0] += corr;
        rest.normalized()
    }

    /// Multiply by a positive native constant:
    /// (l0 + exp(v1)) c = l0 c + exp(v1 + ln c), exact in both slots.
    pub fn scale(&self, c: f64) -> Self {
        debug_assert!(c > 0.0, "scale factor must be positive");
        if self.len == 1 {
            let p = self.levels[0] * c;
            if p.is_finite() {
                return Self::from_value(p);
            }
            if self.levels[0] > 0.0 {
                return Self::from_log(self.levels[0].ln() + c.ln());
            }
            return *self;
        }
        let mut out = *self;
        out.levels[0] *= c;
        out.levels[1] += c.ln();
        out.normalized()
    }

    /// Raise a positive value to the power `mu > 0`.
    pub fn pow(&self, mu: f64) -> Self {
        debug_assert!(mu > 0.0);
        self.ln().scale(mu).exp()
    }

    /// General real addition. Native addends ride exactly in the base slot;
    /// comparable exponential parts combine through one log-level
    /// correction.
    pub fn add(&self, other: &Self) -> Self {
        if self.len == 1 && other.len == 1 {
            return Self::from_value(self.levels[0] + other.levels[0]);
        }
        let (big, small) = if self.cmp(other) == Ordering::Less {
            (other, self)
        } else {
            (self, other)
        };
        if small.len == 1 {
            let mut out = *big;
            out.levels[0] += small.levels[0];
            return out.normalized();
        }
        // ln(big + small) = ln(big) + ln(1 + e^{ln small - ln big}).
        let delta = Self::sub_to_f64(&small.ln(), &big.ln());
        if delta < -DOMINANCE_THRESHOLD {
            return *big;
        }
        let corr = delta.exp().ln_1p();
        let mut lb = big.ln();
        lb.levels[0] += corr;
        lb.normalized().exp()
    }

    /// `a - b` as a native f64, saturating at the f64 range; exact whenever
    /// the exponential parts of the two stacks agree bit-for-bit.
    pub fn sub_to_f64(a: &Self, b: &Self) -> f64 {
        stack_diff(a.stack(), b.stack())
    }
}

impl PartialEq for TowerMagnitude {
    fn eq(&self, other: &Self) -> bool {
        stack_diff(self.stack(), other.stack()) == 0.0
    }
}

impl Eq for TowerMagnitude {}

impl PartialOrd for TowerMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TowerMagnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = stack_diff(self.stack(), other.stack());
        if d == 0.0 {
            Ordering::Equal
        } else if d > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// Total order on tower magnitudes, consistent with the represented reals.
/// Both inputs are normalized by construction.
pub fn tower_compare(a: &TowerMagnitude, b: &TowerMagnitude) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lp(log_mod: f64, arg: f64) -> LpValue {
        LpValue::Finite(LogPolar::new(log_mod, arg))
    }

    fn rel_err(got: Complex64, want: Complex64) -> f64 {
        (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn mul_identity() {
        let one = lp(0.0, 0.0);
        assert_eq!(lp_mul(one, one), one);
    }

    #[test]
    fn mul_adds_logs_and_args() {
        let a = lp(1000.0, PI / 2.0);
        let got = lp_mul(a, a).finite().unwrap();
        assert_eq!(got.log_mod, 2000.0);
        assert!((got.arg - PI).abs() < 1e-15);
    }

    #[test]
    fn mul_matches_native() {
        let a = LpValue::from_complex(Complex64::new(2.0, 0.0));
        let b = LpValue::from_complex(Complex64::new(3.0, 0.0));
        let got = lp_mul(a, b).finite().unwrap();
        assert!((got.log_mod - 6.0f64.ln()).abs() < 1e-14);
        assert!(got.arg.abs() < 1e-15);
    }

    #[test]
    fn add_exact_cancellation_is_zero() {
        let mut bound = TruncationBound::exact();
        let s = lp_add(lp(0.0, 0.0), lp(0.0, PI), &mut bound);
        assert!(s.is_zero());
        assert!(bound.is_exact());
    }

    #[test]
    fn add_dominated_term_truncates() {
        let mut bound = TruncationBound::exact();
        let s = lp_add(lp(1000.0, 0.0), lp(0.0, 0.0), &mut bound);
        let p = s.finite().unwrap();
        assert_eq!(p.log_mod, 1000.0);
        assert_eq!(p.arg, 0.0);
        assert!((bound.log_rel() - (-1000.0)).abs() < 1e-9);
    }

    #[test]
    fn add_three_four_i() {
        // 3 + 4i has modulus 5 and argument atan2(4, 3).
        let mut bound = TruncationBound::exact();
        let a = LpValue::from_complex(Complex64::new(3.0, 0.0));
        let b = LpValue::from_complex(Complex64::new(0.0, 4.0));
        let s = lp_add(a, b, &mut bound).finite().unwrap();
        assert!((s.log_mod - 5.0f64.ln()).abs() < 1e-14);
        assert!((s.arg - 4.0f64.atan2(3.0)).abs() < 1e-14);
        assert!(bound.is_exact());
    }

    #[test]
    fn poly_square_doubles_log_and_arg() {
        let coeffs = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let mut bound = TruncationBound::exact();
        let got = poly_eval_lp(&coeffs, lp(500.0, 0.3), &mut bound)
            .finite()
            .unwrap();
        assert_eq!(got.log_mod, 1000.0);
        assert!((got.arg - 0.6).abs() < 1e-12);
    }

    #[test]
    fn poly_matches_native_at_moderate_radius() {
        // z^2 - 0.8 + 0.157i at z = 10: native value 99.2 + 0.157i.
        let c = Complex64::new(-0.8, 0.157);
        let coeffs = [c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let z = Complex64::new(10.0, 0.0);
        let native = z * z + c;
        let mut bound = TruncationBound::exact();
        let got = poly_eval_lp(&coeffs, LpValue::from_complex(z), &mut bound).to_complex();
        assert!(rel_err(got, native) < 1e-12);
    }

    #[test]
    fn poly_dominance_records_truncation() {
        // z^2 + c with |z| = e^2000: the constant is e^-3999 below z^2.
        let coeffs = [
            Complex64::new(0.3, 0.1),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let mut bound = TruncationBound::exact();
        let got = poly_eval_lp(&coeffs, lp(2000.0, 0.7), &mut bound)
            .finite()
            .unwrap();
        assert_eq!(got.log_mod, 4000.0);
        assert!((got.arg - 1.4).abs() < 1e-12);
        assert!(bound.log_rel() <= -3990.0);
        assert!(!bound.is_exact());
    }

    #[test]
    fn zero_marker_propagates_through_poly() {
        // p(z) = z^2 - 1 at z = 1 cancels exactly.
        let coeffs = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let mut bound = TruncationBound::exact();
        let got = poly_eval_lp(&coeffs, lp(0.0, 0.0), &mut bound);
        assert!(got.is_zero());
    }

    #[test]
    fn tower_normal_form_examples() {
        // exp^2(1) = e^e ~ 15.15 collapses to height 0.
        let a = TowerMagnitude::new(2, 1.0);
        assert_eq!(a.height(), 0);
        assert!((a.residual() - 1.0f64.exp().exp()).abs() < 1e-12);
        // 10^300 lifts to height 1.
        let b = TowerMagnitude::from_value(1e300);
        assert_eq!(b.height(), 1);
        assert!((b.residual() - 1e300f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tower_compare_equal() {
        let a = TowerMagnitude::new(0, 5.0);
        let b = TowerMagnitude::new(0, 5.0);
        assert_eq!(tower_compare(&a, &b), Ordering::Equal);
    }

    #[test]
    fn tower_compare_across_heights() {
        // Oracle: normalize both to a common level and compare natively.
        // exp^2(1) = 15.15 < 100, so (2, 1.0) < (1, 100) = e^100.
        let a = TowerMagnitude::new(2, 1.0);
        let b = TowerMagnitude::new(1, 100.0);
        assert!((a.to_f64() - 15.154262241479262).abs() < 1e-10);
        assert_eq!(tower_compare(&a, &b), Ordering::Less);

        // exp^3(1) = exp(15.15) ~ 3.8e6, while (1, 1e300) = exp(1e300).
        let c = TowerMagnitude::new(3, 1.0);
        let d = TowerMagnitude::new(1, 1e300);
        assert!((c.to_f64() - 15.154262241479262f64.exp()).abs() < 1.0);
        assert_eq!(tower_compare(&c, &d), Ordering::Less);
        assert_eq!(tower_compare(&d, &c), Ordering::Greater);
    }

    #[test]
    fn tower_log_exp_round_trip() {
        for &(h, x) in &[(0u32, 17.0), (1u32, 300.0), (2u32, 45.0), (3u32, 31.0)] {
            let t = TowerMagnitude::new(h, x);
            let rt = t.ln().exp();
            assert_eq!(rt.height(), t.height());
            assert!((rt.residual() - t.residual()).abs() <= 1e-9 * t.residual().abs().max(1.0));
        }
    }

    #[test]
    fn tower_scale_and_pow() {
        let t = TowerMagnitude::from_log(22026.0); // e^22026
        let doubled = t.scale(2.0);
        assert_eq!(doubled.height(), 1);
        assert!((doubled.residual() - (22026.0 + 2.0f64.ln())).abs() < 1e-9);
        let squared = t.pow(2.0);
        assert!((squared.residual() - 44052.0).abs() < 1e-6);
    }

    #[test]
    fn tower_add_dominance() {
        // A native addend rides exactly in the base slot of a huge value.
        let big = TowerMagnitude::from_log(1000.0);
        let small = TowerMagnitude::from_value(3.0);
        let s = big.add(&small);
        assert!(s > big);
        assert_eq!(TowerMagnitude::sub_to_f64(&s, &big), 3.0);
        // Comparable magnitudes still add properly.
        let a = TowerMagnitude::from_value(4.0e12);
        let b = TowerMagnitude::from_value(8.0e12);
        assert!((a.add(&b).to_f64() - 1.2e13).abs() < 1.0);
    }

    #[test]
    fn arg_boundary_is_half_open() {
        assert_eq!(normalize_arg(PI), PI);
        assert_eq!(normalize_arg(-PI), PI);
        assert!(normalize_arg(3.0 * PI) - PI < 1e-12);
    }

    proptest! {
        #[test]
        fn prop_mul_matches_native(
            re1 in -50.0f64..50.0, im1 in -50.0f64..50.0,
            re2 in -50.0f64..50.0, im2 in -50.0f64..50.0,
        ) {
            let a = Complex64::new(re1, im1);
            let b = Complex64::new(re2, im2);
            prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
            let got = lp_mul(LpValue::from_complex(a), LpValue::from_complex(b)).to_complex();
            prop_assert!(rel_err(got, a * b) < 1e-10);
        }

        #[test]
        fn prop_add_matches_native(
            re1 in -50.0f64..50.0, im1 in -50.0f64..50.0,
            re2 in -50.0f64..50.0, im2 in -50.0f64..50.0,
        ) {
            let a = Complex64::new(re1, im1);
            let b = Complex64::new(re2, im2);
            let sum = a + b;
            prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
            prop_assume!(sum.norm() > 1e-3 * (a.norm() + b.norm()));
            let mut bound = TruncationBound::exact();
            let got = lp_add(
                LpValue::from_complex(a),
                LpValue::from_complex(b),
                &mut bound,
            ).to_complex();
            prop_assert!(rel_err(got, sum) < 1e-10);
        }

        #[test]
        fn prop_arg_always_normalized(
            lm1 in -1e4f64..1e4, a1 in -10.0f64..10.0,
            lm2 in -1e4f64..1e4, a2 in -10.0f64..10.0,
        ) {
            let mut bound = TruncationBound::exact();
            let x = lp(lm1, a1);
            let y = lp(lm2, a2);
            for v in [lp_mul(x, y), lp_add(x, y, &mut bound)] {
                if let Some(p) = v.finite() {
                    prop_assert!(p.arg > -PI && p.arg <= PI);
                }
            }
        }

        #[test]
        fn prop_tower_order_antisymmetric_transitive(
            picks in proptest::collection::vec((0u32..4, 0.5f64..1e6), 3)
        ) {
            let t: Vec<TowerMagnitude> = picks
                .iter()
                .map(|&(h, x)| TowerMagnitude::new(h, x))
                .collect();
            // Antisymmetry.
            for a in &t {
                for b in &t {
                    let ab = tower_compare(a, b);
                    let ba = tower_compare(b, a);
                    prop_assert_eq!(ab, ba.reverse());
                }
            }
            // Transitivity over the sorted triple.
            let mut s = t.clone();
            s.sort();
            prop_assert!(tower_compare(&s[0], &s[2]) != Ordering::Greater);
        }

        #[test]
        fn prop_log_polar_round_trip(lm in -700.0f64..700.0, a in -3.0f64..3.0) {
            let p = LogPolar::new(lm, a);
            let back = LogPolar::from_complex(p.to_complex());
            prop_assert!((back.log_mod - lm).abs() < 1e-12 * lm.abs().max(1.0));
            prop_assert!((back.arg - p.arg).abs() < 1e-12);
        }

        #[test]
        fn prop_truncation_monotone(gaps in proptest::collection::vec(746.0f64..5000.0, 1..8)) {
            let mut bound = TruncationBound::exact();
            let mut prev = f64::NEG_INFINITY;
            let mut acc = lp(10_000.0, 0.0);
            for g in gaps {
                acc = lp_add(acc, lp(10_000.0 - g, 1.0), &mut bound);
                prop_assert!(bound.log_rel() >= prev);
                prev = bound.log_rel();
            }
            prop_assert!(!bound.is_exact());
        }
    }
}
