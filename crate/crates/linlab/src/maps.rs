//! The dynamical raw material: planar polynomials with fixed- and
//! periodic-point analysis, exceptional values, quasiregular power test maps,
//! and closed-form oracle linearizers.

use crate::extrange::{poly_eval_lp, LpValue, TruncationBound};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

const ROOT_MAX_ITER: usize = 10_000;
const ROOT_TOL: f64 = 1e-12;
/// Margin on |multiplier| - 1 before a point counts as repelling/attracting;
/// avoids misclassifying numerically indifferent points.
const CLASSIFY_MARGIN: f64 = 1e-9;
/// Backward-orbit depth for exceptional-value detection. A non-exceptional
/// point's backward orbit exceeds two elements within a couple of levels;
/// depth 6 is safety margin.
const BACKWARD_ORBIT_DEPTH: usize = 6;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("polynomial degree must be at least 2 (got {0})")]
    DegreeTooSmall(usize),
    #[error("leading coefficient must be nonzero")]
    ZeroLeadingCoefficient,
    #[error("root iteration failed to converge within {max_iter} steps for {poly}")]
    RootsDiverged { poly: String, max_iter: usize },
    #[error("periodic point period must lie in 1..=4 (got {0})")]
    BadPeriod(u32),
}

/// Stability type of a fixed or periodic point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Repelling,
    Attracting,
    Indifferent,
}

impl Classification {
    pub fn from_multiplier(lambda: Complex64) -> Self {
        let m = lambda.norm();
        if m > 1.0 + CLASSIFY_MARGIN {
            Classification::Repelling
        } else if m < 1.0 - CLASSIFY_MARGIN {
            Classification::Attracting
        } else {
            Classification::Indifferent
        }
    }
}

/// A degree-d planar polynomial, coefficients stored constant term first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMap {
    coefficients: Vec<Complex64>,
}

impl fmt::Display for PolynomialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| format!("({:.6}{:+.6}i)z^{}", c.re, c.im, i))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl PolynomialMap {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self, MapError> {
        if coefficients.len() < 3 {
            return Err(MapError::DegreeTooSmall(coefficients.len().saturating_sub(1)));
        }
        let lead = coefficients.last().unwrap();
        if lead.re == 0.0 && lead.im == 0.0 {
            return Err(MapError::ZeroLeadingCoefficient);
        }
        Ok(Self { coefficients })
    }

    /// z^2 + c, the family the worked examples live in.
    pub fn quadratic(c: Complex64) -> Self {
        Self {
            coefficients: vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// z^d.
    pub fn power(d: usize) -> Self {
        assert!(d >= 2);
        let mut coefficients = vec![Complex64::new(0.0, 0.0); d + 1];
        coefficients[d] = Complex64::new(1.0, 0.0);
        Self { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn leading_coefficient(&self) -> Complex64 {
        *self.coefficients.last().unwrap()
    }

    /// Native Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Derivative value at z.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in self.coefficients.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * (i as f64);
        }
        acc
    }

    /// Extended-range Horner evaluation; truncations accumulate in `bound`.
    pub fn eval_lp(&self, z: LpValue, bound: &mut TruncationBound) -> LpValue {
        poly_eval_lp(&self.coefficients, z, bound)
    }

    pub fn derivative(&self) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * (i as f64))
            .collect()
    }

    /// Coefficients of the n-fold composition p^n.
    pub fn iterate_coefficients(&self, n: u32) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]; // identity
        for _ in 0..n {
            acc = compose(&self.coefficients, &acc);
        }
        acc
    }

    /// The polynomial p^n as a map.
    pub fn iterate_map(&self, n: u32) -> PolynomialMap {
        PolynomialMap {
            coefficients: self.iterate_coefficients(n),
        }
    }
}

/// Coefficients of p(q(z)) given coefficient lists (constant first).
fn compose(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0)];
    for &c in p.iter().rev() {
        acc = poly_mul(&acc, q);
        if acc.is_empty() {
            acc.push(c);
        } else {
            acc[0] += c;
        }
    }
    acc
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.iter().all(|c| c.norm() == 0.0) || b.is_empty() {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A fixed point with its multiplier and stability type.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPointData {
    pub point: Complex64,
    pub multiplier: Complex64,
    pub classification: Classification,
}

/// A periodic point of exact period `period`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PeriodicPointData {
    pub point: Complex64,
    pub period: u32,
    pub multiplier: Complex64,
    pub classification: Classification,
}

/// All roots of a complex polynomial (constant first) by simultaneous
/// Durand-Kerner iteration from perturbed roots of unity, with a Newton
/// polish pass. Returns roots with multiplicity.
pub fn all_roots(coefficients: &[Complex64]) -> Result<Vec<Complex64>, MapError> {
    let mut coeffs = coefficients.to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = *coeffs.last().unwrap();
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    if degree == 1 {
        return Ok(vec![-monic[0]]);
    }

    // Cauchy bound on root moduli, used as the initial guess radius.
    let radius = 1.0 + monic[..degree]
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64) / (degree as f64) + 0.4;
            Complex64::from_polar(radius * (1.0 + 1e-3 * (k as f64 + 1.0)), angle)
        })
        .collect();

    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    let mut converged = false;
    for _ in 0..ROOT_MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let zi = roots[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    denom *= zi - zj;
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates; nudge apart.
                roots[i] += Complex64::new(1e-8, 1e-8);
                max_step = f64::MAX;
                continue;
            }
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            max_step = max_step.max(step.norm() / (1.0 + zi.norm()));
        }
        if max_step < ROOT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        // Multiple roots converge only linearly; accept if residuals are
        // already below tolerance.
        let ok = roots
            .iter()
            .all(|&z| eval(z).norm() <= ROOT_TOL * (1.0 + z.norm()));
        if !ok {
            return Err(MapError::RootsDiverged {
                poly: format!("{:?}", coefficients),
                max_iter: ROOT_MAX_ITER,
            });
        }
    }

    // Newton polish (skipped near multiple roots where p' vanishes).
    let eval_d = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in monic.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * (i as f64);
        }
        acc
    };
    for r in roots.iter_mut() {
        for _ in 0..20 {
            let f = eval(*r);
            let d = eval_d(*r);
            if d.norm() < 1e-12 || f.norm() < 1e-15 * (1.0 + r.norm()) {
                break;
            }
            let step = f / d;
            if step.norm() > 0.5 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
    }
    Ok(roots)
}

/// All d fixed points of p (roots of p(z) - z, with multiplicity), each with
/// its multiplier p'(z) and classification.
pub fn find_fixed_points(p: &PolynomialMap) -> Result<Vec<FixedPointData>, MapError> {
    let mut coeffs = p.coefficients().to_vec();
    coeffs[1] -= Complex64::new(1.0, 0.0);
    let roots = all_roots(&coeffs)?;
    let out: Vec<FixedPointData> = roots
        .into_iter()
        .map(|z| {
            let lambda = p.eval_derivative(z);
            FixedPointData {
                point: z,
                multiplier: lambda,
                classification: Classification::from_multiplier(lambda),
            }
        })
        .collect();
    for fp in &out {
        let residual = (p.eval(fp.point) - fp.point).norm();
        if residual > 1e-10 * (1.0 + fp.point.norm()) {
            return Err(MapError::RootsDiverged {
                poly: p.to_string(),
                max_iter: ROOT_MAX_ITER,
            });
        }
    }
    Ok(out)
}

/// Points of exact period n: roots of p^n(z) - z with lower periods removed,
/// with the cycle multiplier (p^n)'(z) computed along the orbit.
pub fn periodic_points(p: &PolynomialMap, n: u32) -> Result<Vec<PeriodicPointData>, MapError> {
    if !(1..=4).contains(&n) {
        return Err(MapError::BadPeriod(n));
    }
    let mut coeffs = p.iterate_coefficients(n);
    coeffs[1] -= Complex64::new(1.0, 0.0);
    let roots = all_roots(&coeffs)?;

    let is_lower_period = |z: Complex64| -> bool {
        let mut w = z;
        for _m in 1..n {
            w = p.eval(w);
            if (w - z).norm() <= 1e-6 * (1.0 + z.norm()) {
                return true;
            }
        }
        false
    };

    let mut out = Vec::new();
    for z in roots {
        if n > 1 && is_lower_period(z) {
            continue;
        }
        // Chain rule along the cycle.
        let mut lambda = Complex64::new(1.0, 0.0);
        let mut w = z;
        for _ in 0..n {
            lambda *= p.eval_derivative(w);
            w = p.eval(w);
        }
        out.push(PeriodicPointData {
            point: z,
            period: n,
            multiplier: lambda,
            classification: Classification::from_multiplier(lambda),
        });
    }
    Ok(out)
}

/// The finite exceptional set: points whose backward orbit, explored to depth
/// 6 by root finding, stays within a set of at most two elements. For planar
/// polynomials this is a single point when p is linearly conjugate to z^d,
/// and empty otherwise.
pub fn exceptional_values(p: &PolynomialMap) -> Result<Vec<Complex64>, MapError> {
    // Only critical values can have collapsed preimages.
    let crit = all_roots(&p.derivative())?;
    let mut candidates: Vec<Complex64> = Vec::new();
    for z in crit {
        let v = p.eval(z);
        if !candidates
            .iter()
            .any(|&u| (u - v).norm() <= 1e-8 * (1.0 + v.norm()))
        {
            candidates.push(v);
        }
    }

    let mut exceptional = Vec::new();
    'candidates: for v in candidates {
        let mut seen: Vec<Complex64> = vec![v];
        let mut frontier: Vec<Complex64> = vec![v];
        for _ in 0..BACKWARD_ORBIT_DEPTH {
            let mut next = Vec::new();
            for &s in &frontier {
                let mut coeffs = p.coefficients().to_vec();
                coeffs[0] -= s;
                for root in all_roots(&coeffs)? {
                    let known = seen
                        .iter()
                        .any(|&u| (u - root).norm() <= 1e-7 * (1.0 + root.norm()));
                    if !known {
                        seen.push(root);
                        next.push(root);
                    }
                }
                if seen.len() > 2 {
                    continue 'candidates;
                }
            }
            frontier = next;
        }
        exceptional.push(v);
    }
    Ok(exceptional)
}

/// The planar quasiregular test map r e^{i theta} -> r^{alpha d} e^{i d theta}:
/// a radial stretch of exponent `alpha` composed with z^d. Its dilatation is
/// `alpha` and its degree is `d`.
///
/// Quasiregular but not *uniformly* quasiregular for alpha > 1: used only for
/// growth-bound checks, never for linearization.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QRPowerMap {
    pub stretch: f64,
    pub power: u32,
}

impl QRPowerMap {
    pub fn new(stretch: f64, power: u32) -> Self {
        assert!(stretch >= 1.0 && power >= 2);
        Self { stretch, power }
    }

    pub fn dilatation(&self) -> f64 {
        self.stretch
    }

    pub fn degree(&self) -> u32 {
        self.power
    }

    /// Native evaluation; zero maps to zero (the well-defined limit).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(
            r.powf(self.stretch * self.power as f64),
            z.arg() * self.power as f64,
        )
    }

    /// Extended-range evaluation: the log-modulus scales by alpha*d exactly.
    pub fn eval_lp(&self, z: LpValue) -> LpValue {
        match z {
            LpValue::Zero => LpValue::Zero,
            LpValue::Finite(p) => LpValue::Finite(crate::extrange::LogPolar::new(
                p.log_mod * self.stretch * self.power as f64,
                p.arg * self.power as f64,
            )),
        }
    }
}

/// Closed-form solutions of the linearizing equation, used as oracles:
/// `e^z` linearizes z^d at the fixed point 1 (scale d), and `2 cosh sqrt(z)`
/// linearizes z^2 - 2 at the fixed point 2 (scale 4). Both satisfy L'(0) = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    ExpForPowerMap,
    CoshForChebyshev,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleLinearizer {
    pub kind: OracleKind,
    pub base_map: PolynomialMap,
    pub fixed_point: FixedPointData,
}

impl OracleLinearizer {
    pub fn exp_for_power_map(d: usize) -> Self {
        let base_map = PolynomialMap::power(d);
        let point = Complex64::new(1.0, 0.0);
        let multiplier = Complex64::new(d as f64, 0.0);
        OracleLinearizer {
            kind: OracleKind::ExpForPowerMap,
            base_map,
            fixed_point: FixedPointData {
                point,
                multiplier,
                classification: Classification::Repelling,
            },
        }
    }

    pub fn cosh_for_chebyshev() -> Self {
        let base_map = PolynomialMap::quadratic(Complex64::new(-2.0, 0.0));
        OracleLinearizer {
            kind: OracleKind::CoshForChebyshev,
            base_map,
            fixed_point: FixedPointData {
                point: Complex64::new(2.0, 0.0),
                multiplier: Complex64::new(4.0, 0.0),
                classification: Classification::Repelling,
            },
        }
    }
}

/// Evaluate the closed form at |z| within native range. For the Chebyshev
/// oracle the branch of sqrt(z) is immaterial because cosh is even.
pub fn oracle_eval(o: &OracleLinearizer, z: Complex64) -> Complex64 {
    match o.kind {
        OracleKind::ExpForPowerMap => z.exp(),
        OracleKind::CoshForChebyshev => 2.0 * z.sqrt().cosh(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn figure1_map() -> PolynomialMap {
        PolynomialMap::quadratic(c(-0.8, 0.157))
    }

    #[test]
    fn fixed_points_of_square() {
        let p = PolynomialMap::power(2);
        let mut fps = find_fixed_points(&p).unwrap();
        fps.sort_by(|a, b| a.point.norm().partial_cmp(&b.point.norm()).unwrap());
        assert_eq!(fps.len(), 2);
        assert!(fps[0].point.norm() < 1e-9);
        assert_eq!(fps[0].classification, Classification::Attracting);
        assert!((fps[1].point - c(1.0, 0.0)).norm() < 1e-10);
        assert!((fps[1].multiplier - c(2.0, 0.0)).norm() < 1e-9);
        assert_eq!(fps[1].classification, Classification::Repelling);
    }

    #[test]
    fn figure1_repelling_point_matches_quadratic_formula() {
        // Independent oracle: z0 = (1 + sqrt(1 - 4c)) / 2 for z^2 + c.
        let cc = c(-0.8, 0.157);
        let z0 = (1.0 + (c(1.0, 0.0) - 4.0 * cc).sqrt()) / 2.0;
        let fps = find_fixed_points(&figure1_map()).unwrap();
        let rep: Vec<_> = fps
            .iter()
            .filter(|f| f.classification == Classification::Repelling)
            .collect();
        let near = rep
            .iter()
            .find(|f| (f.point - z0).norm() < 1e-9)
            .expect("repelling point from the quadratic formula");
        // 3 d.p. check: 1.528 - 0.076i.
        assert!((near.point.re - 1.528).abs() < 5e-4);
        assert!((near.point.im + 0.076).abs() < 5e-4);
        // Multiplier 2 z0.
        assert!((near.multiplier - 2.0 * z0).norm() < 1e-9);
        assert!((near.multiplier.norm() - 3.059).abs() < 1e-3);
    }

    #[test]
    fn fixed_point_residuals_and_count() {
        for p in [PolynomialMap::power(3), figure1_map()] {
            let fps = find_fixed_points(&p).unwrap();
            assert_eq!(fps.len(), p.degree());
            for fp in fps {
                assert!((p.eval(fp.point) - fp.point).norm() <= 1e-10 * (1.0 + fp.point.norm()));
            }
        }
    }

    #[test]
    fn period_two_of_square_is_cube_roots_of_unity() {
        let p = PolynomialMap::power(2);
        let pts = periodic_points(&p, 2).unwrap();
        assert_eq!(pts.len(), 2);
        for pt in &pts {
            assert!((pt.point.norm() - 1.0).abs() < 1e-9);
            assert!((pt.point.powi(3) - c(1.0, 0.0)).norm() < 1e-8);
            assert!((pt.multiplier - c(4.0, 0.0)).norm() < 1e-8);
            assert_eq!(pt.classification, Classification::Repelling);
        }
    }

    #[test]
    fn period_two_of_figure1_matches_quadratic_oracle() {
        // Period-2 points of z^2 + c solve z^2 + z + c + 1 = 0; the cycle
        // multiplier is 4c + 4.
        let cc = c(-0.8, 0.157);
        let disc = (c(1.0, 0.0) - 4.0 * (cc + 1.0)).sqrt();
        let expect_a = (-1.0 + disc) / 2.0;
        let expect_b = (-1.0 - disc) / 2.0;
        let pts = periodic_points(&figure1_map(), 2).unwrap();
        assert_eq!(pts.len(), 2);
        for pt in &pts {
            let hit = (pt.point - expect_a).norm() < 1e-8 || (pt.point - expect_b).norm() < 1e-8;
            assert!(hit, "unexpected period-2 point {:?}", pt.point);
            assert!((pt.multiplier - (4.0 * cc + 4.0)).norm() < 1e-8);
            assert_eq!(pt.classification, Classification::Repelling);
        }
    }

    #[test]
    fn period_three_of_square() {
        let p = PolynomialMap::power(2);
        let pts = periodic_points(&p, 3).unwrap();
        assert_eq!(pts.len(), 6);
        for pt in &pts {
            assert!((pt.point.norm() - 1.0).abs() < 1e-9);
            assert!((pt.point.powi(7) - c(1.0, 0.0)).norm() < 1e-7);
            assert!((pt.multiplier - c(8.0, 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn exceptional_values_examples() {
        let zero_set = exceptional_values(&PolynomialMap::power(2)).unwrap();
        assert_eq!(zero_set.len(), 1);
        assert!(zero_set[0].norm() < 1e-10);

        let empty = exceptional_values(&figure1_map()).unwrap();
        assert!(empty.is_empty());

        // (z-1)^2 + 1 is z^2 conjugated by z -> z + 1, fixing 1.
        let shifted = PolynomialMap::new(vec![c(2.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let one_set = exceptional_values(&shifted).unwrap();
        assert_eq!(one_set.len(), 1);
        assert!((one_set[0] - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn qr_power_eval_examples() {
        let q = QRPowerMap::new(2.0, 2);
        assert!((q.eval(c(2.0, 0.0)) - c(16.0, 0.0)).norm() < 1e-12);

        let cube = QRPowerMap::new(1.0, 3);
        assert!((cube.eval(c(0.0, 2.0)) - c(0.0, -8.0)).norm() < 1e-12);

        let q15 = QRPowerMap::new(1.5, 2);
        let z = Complex64::from_polar(4.0, std::f64::consts::FRAC_PI_4);
        let w = q15.eval(z);
        assert!((w.norm() - 64.0).abs() < 1e-10);
        assert!((w.arg() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        assert_eq!(q.eval(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn qr_power_log_slope_is_exact() {
        let q = QRPowerMap::new(2.0, 2);
        for r in [2.0f64, 10.0, 1e6] {
            let z = Complex64::from_polar(r, 0.7);
            let w = q.eval_lp(LpValue::from_complex(z)).finite().unwrap();
            let slope = w.log_mod / r.ln();
            assert!((slope - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_identities() {
        let e = OracleLinearizer::exp_for_power_map(2);
        assert!((oracle_eval(&e, c(0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        let l1 = oracle_eval(&e, c(1.0, 0.0));
        assert!((l1.re - std::f64::consts::E).abs() < 1e-12);
        // p(L(1)) = e^2 = L(2).
        assert!((e.base_map.eval(l1) - oracle_eval(&e, c(2.0, 0.0))).norm() < 1e-12);

        let ch = OracleLinearizer::cosh_for_chebyshev();
        let v = oracle_eval(&ch, c(1.0, 0.0));
        assert!((v.re - 2.0 * 1.0f64.cosh()).abs() < 1e-12);
        // L(4) = 2cosh(2) = (2cosh 1)^2 - 2.
        let l4 = oracle_eval(&ch, c(4.0, 0.0));
        assert!((l4 - (v * v - 2.0)).norm() < 1e-10);
    }

    #[test]
    fn oracle_functional_equation_on_random_disk() {
        let mut ok = 0;
        for o in [
            OracleLinearizer::exp_for_power_map(2),
            OracleLinearizer::cosh_for_chebyshev(),
        ] {
            let lambda = o.fixed_point.multiplier;
            for k in 0..1000 {
                let t = k as f64;
                let z = Complex64::from_polar(5.0 * ((t * 0.618).fract()), t * 2.399963);
                let lhs = o.base_map.eval(oracle_eval(&o, z));
                let rhs = oracle_eval(&o, lambda * z);
                let err = (lhs - rhs).norm() / (1.0 + rhs.norm());
                assert!(err <= 1e-10, "residual {err} at z = {z}");
                ok += 1;
            }
        }
        assert_eq!(ok, 2000);
    }

    #[test]
    fn degree_validation() {
        assert!(PolynomialMap::new(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(PolynomialMap::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn periodic_period_bounds() {
        let p = PolynomialMap::power(2);
        assert!(periodic_points(&p, 0).is_err());
        assert!(periodic_points(&p, 5).is_err());
    }

    proptest! {
        // Vieta: for z^2 + c the fixed points sum to 1 and multiply to c.
        #[test]
        fn prop_vieta_for_quadratics(re in -1.5f64..1.5, im in -1.5f64..1.5) {
            let cc = c(re, im);
            let fps = find_fixed_points(&PolynomialMap::quadratic(cc)).unwrap();
            prop_assert_eq!(fps.len(), 2);
            let sum = fps[0].point + fps[1].point;
            let prod = fps[0].point * fps[1].point;
            prop_assert!((sum - c(1.0, 0.0)).norm() < 1e-9);
            prop_assert!((prod - cc).norm() < 1e-9);
        }

        #[test]
        fn prop_roots_reconstruct_polynomial(
            roots in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..6)
        ) {
            // Build the monic polynomial with these roots, then re-solve.
            let mut coeffs = vec![c(1.0, 0.0)];
            for &(re, im) in &roots {
                let r = c(re, im);
                let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
                for (i, &a) in coeffs.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= a * r;
                }
                coeffs = next;
            }
            let found = all_roots(&coeffs).unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for &(re, im) in &roots {
                let r = c(re, im);
                let nearest = found
                    .iter()
                    .map(|&z| (z - r).norm())
                    .fold(f64::MAX, f64::min);
                // Clustered (near-multiple) roots limit attainable accuracy.
                prop_assert!(nearest < 1e-4, "missing root {r}, nearest {nearest}");
            }
        }
    }
}
