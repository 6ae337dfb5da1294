// The Landau–Ginzburg potential `W = z²/2 + v₁/(z − v₀)` behind the
// rational prepotential: residue tensor, canonical coordinates and the
// Darboux–Egoroff equations for the rotation coefficients.
//
// ```bash
// cargo run --example landau_ginzburg_chart
// ```

use wdvv::frobenius::FlatMetric;
use wdvv::lg::{idempotent_check, model_darboux_egoroff, LgModel};
use wdvv::linalg::c;
use wdvv::n3::omega_sums;
use wdvv::suites::residue_vs_jet;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (vs_jet, vs_listed) = residue_vs_jet(&[1.0, 2.0, 3.0], 1.0)?;
    println!("residue tensor vs third derivatives: {vs_jet:.2e}, vs listed values: {vs_listed:.2e}");

    let model = LgModel::n3();
    let chart = model.chart(&[c(0.4), c(1.3), c(0.8)])?;
    for (i, (u, h)) in chart.u.iter().zip(&chart.h).enumerate() {
        println!("u_{} = {:>10.6}{:+.6}i   h = {:>9.6}{:+.6}i", i + 1, u.re, u.im, h.re, h.im);
    }
    let de = model_darboux_egoroff(&model, &chart, 1e-4)?;
    println!(
        "Darboux-Egoroff: compatibility {:.2e}, translation {:.2e}, scaling {:.2e}",
        de.compatibility, de.translation, de.conformal
    );
    let idem = idempotent_check(&chart, &FlatMetric::rational_n3())?;
    println!("idempotents {:.2e}, partition of unity {:.2e}", idem.idempotent, idem.partition);
    let (sum, sum_sq) = omega_sums(&chart);
    println!("sum of omega_k^2 = {:.12} (expected -1/4); plain sum = {:.4}{:+.4}i", sum_sq.re, sum.re, sum.im);
    assert!(de.max() < 1e-5 && (sum_sq + 0.25).norm() < 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("landau-ginzburg example failed");
}
