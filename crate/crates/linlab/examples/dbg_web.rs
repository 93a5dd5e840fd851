use linlab::linearizer::LinearizerHandle;
use linlab::maps::PolynomialMap;
use linlab::websets::*;
use num_complex::Complex64;

fn main() {
    let fig1 = LinearizerHandle::at_repelling_point(
        PolynomialMap::quadratic(Complex64::new(-0.8, 0.157)), None).unwrap();
    let t = std::time::Instant::now();
    let rep = spiders_web_verify(&fig1, 20.0, 2.0, 3, 256, 512).unwrap();
    eprintln!("web fig1 R=20 mu=2 N=3: verdict={:?} anchor_log={} ({:?})", rep.verdict, rep.anchor_radius_log, t.elapsed());
    for d in &rep.domains {
        eprintln!("  n={} found={} ball={} surround={} log_r={:?}",
            d.n, d.continuum.separating_found, d.contains_ball, d.image_surrounds_next, d.log_r_n);
    }
}
