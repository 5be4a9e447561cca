//! Runs a Monte Carlo experiment from a JSON spec and prints both reports.

use radio_wakeup::harness::{simulate_experiment, ExperimentSpec};

const SPEC: &str = r#"{
  "protocol": {"kind": "screening", "k": 32, "epsilon": 0.05},
  "net": {"n": 128, "b": 2, "jam_prob": 0.1},
  "pattern": {"kind": "staggered", "window": 10, "k": 32},
  "trials": 20,
  "base_seed": 5,
  "overlays": [{"kind": "screening-round", "k": 32, "epsilon": 0.05}]
}"#;

fn main() -> radio_wakeup::Result<()> {
    let spec = ExperimentSpec::from_json(SPEC)?;
    let report = simulate_experiment(&spec)?;
    print!("{}", report.to_csv());
    print!("{}", report.to_json());
    Ok(())
}
