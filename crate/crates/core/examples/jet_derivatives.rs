// Truncated Taylor jets: exact partial derivatives of composite functions.
//
// ```bash
// cargo run --example jet_derivatives
// ```

use wdvv::jet::{JetSpace, MultiIndex};
use wdvv::linalg::c;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // f(x, y) = x² log y at (1.5, 2), carried to third order
    let (x, y) = (1.5, 2.0);
    let space = JetSpace::new(2, 3);
    let v = space.vars(&[c(x), c(y)])?;
    let f = v[0].powi(2)?.try_mul(&v[1].ln()?)?;

    let fxxy = f.partial(&MultiIndex::new(&[2, 1]))?;
    let fyyy = f.partial(&MultiIndex::new(&[0, 3]))?;
    println!("f       = {:.12}", f.value().re);
    let (exact_xxy, exact_yyy) = (2.0 / y, 2.0 * x * x / (y * y * y));
    println!("f_xxy   = {:.12}  (exact 2/y = {exact_xxy:.12})", fxxy.re);
    println!("f_yyy   = {:.12}  (exact 2x²/y³ = {exact_yyy:.12})", fyyy.re);
    assert!((fxxy.re - exact_xxy).abs() < 1e-14);
    assert!((fyyy.re - exact_yyy).abs() < 1e-14);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("jet example failed");
}
