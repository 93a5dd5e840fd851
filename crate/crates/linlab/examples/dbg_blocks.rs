use linlab::extrange::{normalize_arg, TowerMagnitude};
use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::PolynomialMap;
use num_complex::Complex64;

fn main() {
    let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
    let h = LinearizerHandle::at_repelling_point(map, None).unwrap();
    let log_r = 1.1e10f64;
    let threshold = max_modulus_tower(&h, &TowerMagnitude::from_value(log_r)).unwrap();
    eprintln!("threshold = {:?}", threshold);

    let log_base = h.base_radius().ln();
    let log_lambda = h.scale().norm().ln();
    let arg_lambda = h.scale().arg();
    let j0 = TowerMagnitude::from_value(log_r)
        .add(&TowerMagnitude::from_value(-log_base))
        .scale(1.0 / log_lambda)
        .add(&TowerMagnitude::from_value(2.0));
    eprintln!("j0 = {:?}", j0);

    // one row per block, 96 angles, print mask
    for b in 0..24 {
        let s_log = log_base - log_lambda * 0.5;
        let mut line = String::new();
        for c in 0..96 {
            let z_angle = std::f64::consts::TAU * (c as f64 + 0.5) / 96.0;
            let w_angle = normalize_arg(z_angle - b as f64 * arg_lambda);
            let w = Complex64::from_polar(s_log.exp(), w_angle);
            let ch = match h.koenigs_eval(w) {
                Err(_) => '!',
                Ok(v) => {
                    let steps = j0.add(&TowerMagnitude::from_value(b as f64));
                    match push_log_abs_dbg(&h, v, &steps) {
                        None => '.',
                        Some(t) => if t > threshold { '#' } else { '-' },
                    }
                }
            };
            line.push(ch);
        }
        eprintln!("b={b:2} {line}");
    }
}

fn push_log_abs_dbg(h: &LinearizerHandle, v: Complex64, steps: &TowerMagnitude) -> Option<TowerMagnitude> {
    // mirror growth::push_log_abs via public API
    linlab::growth::push_log_abs_public(h, v, steps, 2000)
}
