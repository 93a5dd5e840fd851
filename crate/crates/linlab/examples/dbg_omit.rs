// scratch debug
use linlab::linearizer::*;
use linlab::maps::OracleLinearizer;
fn main() {
    let o = OracleLinearizer::exp_for_power_map(2);
    let h = LinearizerHandle::construct(o.base_map.clone(), o.fixed_point, 1e-12).unwrap();
    eprintln!("rho_base = {}, r_lin = {}, delta_inj = {}", h.base_radius(), h.linearization_radius(), h.injectivity_radius());
    let rep = omitted_values_check(&h, 20.0, 48, 0).unwrap();
    eprintln!("claimed: {:?}", rep.claimed_omitted);
    eprintln!("grid_min: {:?}", rep.candidate_grid_min);
    eprintln!("cand attained: {:?}", rep.candidate_attained);
    eprintln!("fp attained: {}", rep.fixed_point_attained);
    let misses: Vec<_> = rep.targets.iter().filter(|t| t.preimage.is_none()).collect();
    eprintln!("missed targets: {:?}", misses);
    eprintln!("verdict: {:?}", rep.verdict);
}
