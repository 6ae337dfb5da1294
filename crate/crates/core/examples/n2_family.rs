// The two-dimensional family of prepotentials labelled by `R`, built from
// the recursion for `Ξ^(n)` and compared with the closed forms, including
// the logarithmic cases `R = ½, −½, −3/2`.
//
// ```bash
// cargo run --example n2_family
// ```

use wdvv::linalg::c;
use wdvv::n2::{self, XiSeries};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6}  {:>9}  {:>12}  {:>12}", "R", "route", "vs closed", "Euler recur.");
    for r in [0.0, 0.3, 1.0, -0.7, 0.5, -0.5, -1.5] {
        let (x1, x2) = n2::domain_point(r, 1.1, 1.3);
        let route = n2::default_route(r);
        let diff = n2::recursion_vs_closed(r, x1, x2, route)?;
        let xi = XiSeries::at_flat(r, c(x1), c(x2), 3, route, n2::needs_complex_tau(r))?;
        let euler = xi.euler_residual()?;
        println!("{r:>6}  {:>9}  {diff:>12.3e}  {euler:>12.3e}", format!("{route:?}"));
        assert!(diff < 1e-9 && euler < 1e-10);
    }
    if let Some((n, row, col)) = n2::first_resonance(-1.5, 4) {
        println!("R = -3/2 first meets a resonance at n = {n}, entry ({}, {})", row + 1, col + 1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("n2 example failed");
}
