// Schlesinger systems built from the canonical frame: the explicit
// two-point system of the `R` family and the numeric three-point system of
// the Landau–Ginzburg model.
//
// ```bash
// cargo run --example schlesinger_system
// ```

use wdvv::jet::Scalar;
use wdvv::lg::LgModel;
use wdvv::linalg::c;
use wdvv::schlesinger::{iso_tau_residual, n2_system, schlesinger_residual, ChartFamily};
use wdvv::suites::format_matrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let u = [c(2.0), c(1.0)];
    let sys = n2_system(1.0, 0.0, u)?;
    println!("S_1 for R = 1 at u = (2, 1):\n{}", format_matrix(&sys.s[0]));
    let mut fam = |p: &[Scalar]| n2_system(1.0, 0.0, [p[0], p[1]]);
    let res = schlesinger_residual(&mut fam, &u, 1e-3)?;
    let tau = iso_tau_residual(&sys)?;
    println!("Schlesinger residual {res:.2e}; iso-tau residual {:.2e}", tau.residual);

    let chart = LgModel::n3().chart(&[c(0.4), c(1.3), c(0.8)])?;
    let family = ChartFamily::new(chart, 0.0)?;
    let mu: Vec<f64> = family.mu.iter().map(|m| m.re).collect();
    println!("mu = {mu:.6?}");
    let mut f = |p: &[Scalar]| family.system_at_u(p);
    let res3 = schlesinger_residual(&mut f, &family.base.u, 1e-3)?;
    println!("three-point Schlesinger residual {res3:.2e}");
    assert!(res < 1e-7 && res3 < 1e-5);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("schlesinger example failed");
}
