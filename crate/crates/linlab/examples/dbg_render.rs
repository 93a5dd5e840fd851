use linlab::extrange::{LogPolar, LpValue};
use linlab::linearizer::{LinearizerHandle, WideValue};
use linlab::maps::PolynomialMap;
use linlab::websets::render::*;
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let depth: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(6);
    let half: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(40.0);
    let fig1 = LinearizerHandle::at_repelling_point(
        PolynomialMap::quadratic(Complex64::new(-0.8, 0.157)), None).unwrap();

    // functional equation at extreme range
    let lambda = fig1.scale();
    let mut worst = 0.0f64;
    let mut magnitude_checks = 0;
    for k in 0..100 {
        let lm = 10.0 + 4990.0 * (k as f64) / 99.0;
        let ang = (k as f64) * 2.399963;
        let z = LogPolar::new(lm, ang);
        let (lz, _) = fig1.eval_large(LpValue::Finite(z)).unwrap();               // L(z)
        let lhs = match lz {
            WideValue::Polar(p) => {
                let mut b = Default::default();
                match fig1.map().eval_lp(LpValue::Finite(p), &mut b) {
                    LpValue::Finite(q) => WideValue::Polar(q),
                    LpValue::Zero => WideValue::Zero,
                }
            }
            other => other, // can't push magnitude-only through p pointwise
        };
        let zl = LogPolar::new(lm + lambda.norm().ln(), ang + lambda.arg());
        let (rhs, _) = fig1.eval_large(LpValue::Finite(zl)).unwrap();             // L(lambda z)
        match (lhs, rhs) {
            (WideValue::Polar(a), WideValue::Polar(b)) => {
                let dl = (a.log_mod - b.log_mod).abs() / (1.0 + b.log_mod.abs());
                let da = (a.arg - b.arg).abs().min(std::f64::consts::TAU - (a.arg - b.arg).abs());
                worst = worst.max(dl).max(da);
            }
            (a, b) => {
                magnitude_checks += 1;
                let (Some(ta), Some(tb)) = (a.log_mod_tower(), b.log_mod_tower()) else { panic!("zero") };
                let d = linlab::extrange::TowerMagnitude::sub_to_f64(&ta.ln(), &tb.ln());
                worst = worst.max(d.abs());
                if d.abs() > 1e-6 { eprintln!("  tower mismatch at lm={lm}: {d}"); }
            }
        }
    }
    eprintln!("functional-eq extreme: worst rel dev = {worst:.3e} ({magnitude_checks} tower-compared)");

    let t = std::time::Instant::now();
    let vp = Viewport::square(Complex64::new(0.0, 0.0), half);
    let g = render_fast_escaping(&fig1, vp, n, n, 20.0, depth, 8).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for &c in &g.codes { *counts.entry(c).or_insert(0usize) += 1; }
    eprintln!("render {n}x{n} depth={depth} half={half}: codes {counts:?} ({:?})", t.elapsed());
    eprintln!("nested fast loops around center: {}", nested_fast_loops_around_center(&g));
    let lam = fig1.scale().norm();
    for k in 1..=4 {
        let outer = half / lam.powi(k - 1);
        let inner = half / lam.powi(k);
        eprintln!("  annulus k={k} [{inner:.3e}, {outer:.3e}]: loop = {}", fast_loop_in_annulus(&g, inner, outer));
    }
}
