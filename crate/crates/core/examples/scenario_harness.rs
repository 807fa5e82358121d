// Runs a built-in scenario from an inline configuration, then checks the
// report against expected metrics.

use photon_echo::harness::{compare_to_reference, run_scenario, validate_config, Reference};
use photon_echo::Result;

const CONFIG: &str = r#"
scenario = "afc-echo"
seed = 5

[comb]
delta = "2.78 MHz"
finesse = 2.6
depth = 0.5
background = 1.5
"#;

const REFERENCE: &str = r#"{
  "scenario": "afc-echo",
  "metrics": {
    "eta_1": { "value": 0.0040, "abs_tol": 1e-4 },
    "echo_1_delay_s": { "value": 3.597e-7, "abs_tol": 3e-9 }
  }
}"#;

pub fn run() -> Result<()> {
    let cfg = validate_config(CONFIG)?;
    let out = std::env::temp_dir().join(format!("photon-echo-example-{}", std::process::id()));
    let report = run_scenario(&cfg, &out)?;
    for (name, value) in &report.metrics {
        println!("{name:<28} {value:.6e}");
    }
    let reference: Reference = serde_json::from_str(REFERENCE)?;
    print!("{}", compare_to_reference(&report, &reference).render());
    println!("outputs in {}", out.display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
