//! Paired-seed sweep over jamming probabilities.

use radio_wakeup::harness::{
    jamming_sweep, ExperimentSpec, OutputPaths, Overlay, PatternSpec, ProtocolSpec,
};
use radio_wakeup::model::NetworkConfig;
use radio_wakeup::schedules::ScaleConstant;

fn main() -> radio_wakeup::Result<()> {
    let spec = ExperimentSpec {
        protocol: ProtocolSpec::ArrayGeneral {
            c: ScaleConstant::DEFAULT,
            array_seed: 3,
            length: None,
        },
        net: NetworkConfig::new(64, 2, 0.0)?,
        pattern: PatternSpec::Staggered { window: 16, k: 8 },
        trials: 500,
        base_seed: 1,
        t_max: None,
        overlays: vec![Overlay::GeneralShape { k: 8 }],
        output: OutputPaths::default(),
    };
    println!(
        "{:>5} {:>9} {:>5} {:>5} {:>7}",
        "p", "completed", "p50", "p95", "ratio"
    );
    for row in jamming_sweep(&spec, &[0.0, 0.25, 0.5, 0.75, 0.9])? {
        let s = &row.report.summary;
        let q = s.quantiles.expect("some trials complete");
        println!(
            "{:>5} {:>9} {:>5} {:>5} {:>7.2}",
            row.p,
            s.completed,
            q.p50,
            q.p95,
            row.p95_ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
