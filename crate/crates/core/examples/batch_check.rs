// Run selected verification suites from a JSON configuration and render
// the report, as the `wdvv check` command does.
//
// ```bash
// cargo run --example batch_check
// ```

use wdvv::config::RunConfig;
use wdvv::report::{emit, Format};
use wdvv::suites;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::from_json(
        r#"{
            "suites": ["prepotential", "n2"],
            "n2": { "r_values": [0.3, -1.5] },
            "tolerances": { "n2_third_derivatives": 1e-9 }
        }"#,
    )?;
    let report = suites::run(&cfg);
    print!("{}", String::from_utf8(emit(&report, Format::Text))?);
    assert!(report.pass);

    // unknown keys are rejected so a misspelt tolerance cannot go unnoticed
    let typo = RunConfig::from_json(r#"{"tolerances": {"wdv": 1e-3}}"#);
    println!("misspelt key: {}", typo.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("batch example failed");
}
