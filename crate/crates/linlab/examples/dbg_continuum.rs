use linlab::extrange::TowerMagnitude;
use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::{OracleLinearizer, PolynomialMap};
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("fig1");
    let r: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let rows: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(256);
    let cols: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(512);

    let h = match which {
        "exp" => {
            let o = OracleLinearizer::exp_for_power_map(2);
            LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap()
        }
        _ => {
            let map = PolynomialMap::quadratic(Complex64::new(-0.8, 0.157));
            LinearizerHandle::at_repelling_point(map, None).unwrap()
        }
    };
    eprintln!("handle: rho_base={} r_lin={} |lambda|={}", h.base_radius(), h.linearization_radius(), h.scale().norm());
    let t0 = std::time::Instant::now();
    let rep = min_modulus_continuum(&h, &TowerMagnitude::from_value(r.ln()), 2.0, rows, cols).unwrap();
    eprintln!("r={r} rows={rows} cols={cols}: found={} strict={} verdict={:?} ({:?})",
        rep.separating_found, rep.strict, rep.verdict, t0.elapsed());
    eprintln!("threshold logM = {:?}", rep.threshold_log_max);
    if let Some(m) = rep.min_log_abs {
        eprintln!("min log|L| on continuum = {:?}", m);
        eprintln!("inner/outer log radius = {:?} / {:?}", rep.inner_log_radius, rep.outer_log_radius);
    }
}
