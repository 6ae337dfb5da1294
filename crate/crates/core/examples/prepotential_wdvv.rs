// The WDVV triple for the three-dimensional rational prepotential
// `F = ½x₁²x₂ + ½x₁x₃² − 1/16 x₃⁴ + ½x₂²(log x₂ − 3/2)`.
//
// ```bash
// cargo run --example prepotential_wdvv
// ```

use wdvv::expr::library;
use wdvv::frobenius::{associativity, normalization_residual, quasi_homogeneity_residual, third_tensor, FlatMetric};
use wdvv::linalg::c;
use wdvv::sampling::{halton_points, SampleBox};
use wdvv::suites::{euler_n3, perturbed_n3, wdvv_triple};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let f = library::rational_n3();
    let eta = FlatMetric::rational_n3();
    let t = third_tensor(&f, &[c(1.0), c(2.0), c(3.0)])?;
    println!("c_222 at (1,2,3) = {:.6} (1/x2 = 0.5)", t.get(1, 1, 1).re);
    println!("associativity    = {:.3e}", associativity(&t, &eta)?.abs);
    println!("normalization    = {:.3e}", normalization_residual(&t, &eta)?);
    println!(
        "quasi-homogeneity= {:.3e}",
        quasi_homogeneity_residual(&f, &euler_n3(), &[c(1.0), c(2.0), c(3.0)])?
    );

    let points = halton_points(&SampleBox::cube(3, 0.5, 2.0), 20, 7);
    let good = wdvv_triple(&f, &points)?;
    let bad = wdvv_triple(&perturbed_n3(1e-3), &points)?;
    println!("20 points, worst residual, exact F:     {:.3e}", good.iter().copied().fold(0.0, f64::max));
    println!("20 points, worst residual, perturbed F: {:.3e}", bad.iter().copied().fold(0.0, f64::max));
    assert!(good.iter().all(|r| *r < 1e-10));
    assert!(bad.iter().any(|r| *r > 1e-10));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("prepotential example failed");
}
