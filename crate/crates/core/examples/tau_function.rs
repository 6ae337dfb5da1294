// The isomonodromic tau function of the three-dimensional model:
// scaling, the `x₃` derivative, agreement with the rotation coefficients
// and the form it takes along the Hitchin branch.
//
// ```bash
// cargo run --example tau_function
// ```

use wdvv::linalg::c;
use wdvv::n3::{ltresom_check, tau_cross_check, tau_jet_check, tau_n3};
use wdvv::jet::Scalar;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (x2, x3) = (c(1.4), c(0.7));
    println!("log tau(1.4, 0.7) = {:.12}", tau_n3(x2, x3)?.re);
    let jets = tau_jet_check(x2, x3)?;
    println!("scaling identity {:.2e}, x3 derivative {:.2e}", jets.euler, jets.x3_derivative);

    let cross = tau_cross_check(0.4, 1.3, 0.8)?;
    println!("d log tau vs rotation coefficients: {:.2e}", cross.derivative);
    for (j, d) in cross.dlog_tau.iter().enumerate() {
        println!("  d/du_{} log tau = {:>10.6}{:+.6}i", j + 1, d.re, d.im);
    }

    let ws: Vec<Scalar> = [0.4, 1.1, 2.5, 3.9].iter().map(|&t| Scalar::new(0.0, t)).collect();
    let branch = ltresom_check(&ws, 0.8)?;
    println!(
        "along the branch log tau = closed form + {:.9}{:+.9}i, spread {:.2e}",
        branch.constant.re, branch.constant.im, branch.spread
    );
    assert!(jets.euler < 1e-10 && cross.derivative < 1e-5 && branch.spread < 1e-8);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("tau example failed");
}
