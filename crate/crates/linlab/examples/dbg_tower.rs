use linlab::extrange::TowerMagnitude;
use linlab::growth::*;
use linlab::linearizer::LinearizerHandle;
use linlab::maps::OracleLinearizer;
fn main() {
    let o = OracleLinearizer::exp_for_power_map(2);
    let h = LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap();
    let m1 = max_modulus(&h, 5.0f64.ln()).unwrap();
    eprintln!("log M(5) = {:?} -> {}", m1, m1.to_f64());
    let five = TowerMagnitude::from_value(5.0);
    let next = max_modulus_tower(&h, &five.ln()).unwrap().exp();
    eprintln!("next = {:?} -> {}", next, next.to_f64());
    eprintln!("cmp next vs five: {:?}", next.cmp(&five));
    let lvl = iterated_max_modulus(&h, 5.0, 3);
    eprintln!("levels: {:?}", lvl.map(|v| v.iter().map(|t| t.to_f64()).collect::<Vec<_>>()));
}
