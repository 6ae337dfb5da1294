// Integrate the Euler top along an arc of imaginary `ω` and write the
// trajectory as CSV, as `wdvv dump-trajectory` does.
//
// ```bash
// cargo run --example trajectory_csv
// ```

use wdvv::n3::imaginary_arc;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let top = imaginary_arc(0.5, 1.0, 1e-10)?;
    let path = std::env::temp_dir().join(format!("wdvv-trajectory-{}.csv", std::process::id()));
    top.write_csv(std::fs::File::create(&path)?)?;
    let text = std::fs::read_to_string(&path)?;
    std::fs::remove_file(&path)?;
    let mut lines = text.lines();
    println!("{}", lines.next().unwrap_or_default());
    println!("{}", lines.next().unwrap_or_default());
    println!("... {} rows, Casimir drift {:.2e}", top.len(), top.casimir_drift);
    assert_eq!(text.lines().count(), top.len() + 1);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("trajectory example failed");
}
