use linlab::extrange::{LogPolar, LpValue, TowerMagnitude};
use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::PolynomialMap;
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let r: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let mu: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
    let h = LinearizerHandle::at_repelling_point(map, None).unwrap();
    let thr = max_modulus(&h, r.ln()).unwrap();
    eprintln!("log M({r}) = {}", thr.to_f64());
    let rows = 48; let cols = 96;
    for i in (0..rows).rev() {
        let lr = r.ln() + (mu - 1.0) * r.ln() * (i as f64 + 0.5) / rows as f64;
        let mut line = String::new();
        for c in 0..cols {
            let ang = std::f64::consts::TAU * (c as f64 + 0.5) / cols as f64;
            let z = LpValue::Finite(LogPolar::new(lr, ang));
            let ch = match h.eval_large(z) {
                Ok((w, _)) => match w.log_mod_tower() {
                    None => '.',
                    Some(t) => {
                        if t > thr { '#' } else {
                            let v = t.to_f64();
                            if v > 0.5 * thr.to_f64() { '+' } else if v > 0.0 { '-' } else { '.' }
                        }
                    }
                },
                Err(_) => '?',
            };
            line.push(ch);
        }
        eprintln!("{:8.2} {}", lr.exp(), line);
    }
}
