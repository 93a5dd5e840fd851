use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::{OracleLinearizer, PolynomialMap};
use linlab::websets::*;
use num_complex::Complex64;

fn main() {
    let t0 = std::time::Instant::now();
    let exp_o = OracleLinearizer::exp_for_power_map(2);
    let exp_h = LinearizerHandle::construct(exp_o.base_map.clone(), exp_o.fixed_point, 1e-12).unwrap();
    let cosh_o = OracleLinearizer::cosh_for_chebyshev();
    let cosh_h = LinearizerHandle::construct(cosh_o.base_map.clone(), cosh_o.fixed_point, 1e-12).unwrap();
    let fig1 = LinearizerHandle::at_repelling_point(
        PolynomialMap::quadratic(Complex64::new(-0.8, 0.157)), None).unwrap();
    let cube = LinearizerHandle::at_repelling_point(PolynomialMap::power(3), Some(Complex64::new(1.0, 0.0))).unwrap();
    eprintln!("handles built {:?}", t0.elapsed());

    for (name, h) in [("exp", &exp_h), ("cosh", &cosh_h), ("fig1", &fig1)] {
        let est = order_estimate(*&h, 2.0, 2000.0, 48).unwrap();
        eprintln!("{name}: rho={:.5} lambda_low={:.5} residual={:.2e}", est.rho, est.lambda_low, est.residual);
    }
    for (name, h, d) in [("exp", &exp_h, 2u32), ("cube", &cube, 3u32), ("fig1", &fig1, 2u32)] {
        let b = growth_bracket_check(h, d, 1.0).unwrap();
        eprintln!("bracket {name}: est={:.4} in [{:.4},{:.4}] pass={}", b.estimate.rho, b.lower, b.upper, b.pass);
    }
    eprintln!("orders done {:?}", t0.elapsed());

    for (name, h) in [("exp", &exp_h), ("cosh", &cosh_h), ("fig1", &fig1)] {
        let t = std::time::Instant::now();
        let rep = pits_effect_witness(h, 4.0, 8, 0).unwrap();
        eprintln!("pits {name}: verdict={:?} C={:.4} witnesses={} ({:?})", rep.verdict, rep.c_bound, rep.witnesses.len(), t.elapsed());
    }
    for (name, h) in [("exp", &exp_h), ("fig1", &fig1)] {
        let t = std::time::Instant::now();
        let rep = radii_sequence(h, if name.starts_with("exp") { 10.0 } else { 20.0 }, 4, 2.0).unwrap();
        eprintln!("radii {name}: first_hold={} verdicts={:?} ({:?})", rep.first_hold,
            rep.rows.iter().map(|r| r.holds).collect::<Vec<_>>(), t.elapsed());
    }
}
