use linlab::extrange::TowerMagnitude;
use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::PolynomialMap;
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let log_r: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(300.0);
    let rows: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(256);
    let cols: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(512);
    let mu: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
    let h = LinearizerHandle::at_repelling_point(map, None).unwrap();
    let t0 = std::time::Instant::now();
    let rep = min_modulus_continuum(&h, &TowerMagnitude::from_value(log_r), mu, rows, cols).unwrap();
    eprintln!(
        "log_r={log_r} mu={mu} rows={rows} cols={cols}: found={} strict={} ({:?})",
        rep.separating_found, rep.strict, t0.elapsed()
    );
    if let (Some(m), Some(i), Some(o)) = (rep.min_log_abs, rep.inner_log_radius, rep.outer_log_radius) {
        eprintln!("  m(log)={:?} inner={:?} outer={:?} thr={:?}", m, i, o, rep.threshold_log_max);
    }
}
