// The complexified Euler top `dω₁/ds = ω₂ω₃/s` (and cyclic) integrated
// along real `s`, checked against the algebraic Hitchin branch.
//
// ```bash
// cargo run --example euler_top
// ```

use wdvv::linalg::c;
use wdvv::n3::{branch_deviation, branch_omegas, integrate_top, track_branch, EulerTopState, HitchinParam};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // the branch parameter with s(ω) = 2, continued from a real guess
    let w0 = track_branch(&[c(2.0)], c(-15.0))?[0];
    let (omega, signs) = branch_omegas(&HitchinParam::new(w0)?)?;
    println!("omega(s=2) = {:.12}, square-root signs {signs:?}", w0.re);

    let top = integrate_top(&EulerTopState { s: c(2.0), omega }, c(5.0), 1e-10)?;
    let end = top.omega(top.len() - 1);
    println!("{} nodes; omega at s = 5:", top.len());
    for (k, w) in end.iter().enumerate() {
        println!("  omega_{} = {:>12.8}{:+.8}i", k + 1, w.re, w.im);
    }
    println!("Casimir drift     {:.3e}", top.casimir_drift);
    let dev = branch_deviation(&top, w0)?;
    println!("distance to branch {dev:.3e}");
    assert!(top.casimir_drift < 1e-9 && dev < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("euler-top example failed");
}
