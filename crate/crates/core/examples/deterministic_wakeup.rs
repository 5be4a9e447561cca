//! Drives the oblivious array protocol with a staggered activation pattern
//! and shows the stage census at the moment of wake-up.

use radio_wakeup::analysis::{first_isolated, psi, stage_census};
use radio_wakeup::model::{ActivationPattern, NetworkConfig, StationId};
use radio_wakeup::protocols::run_wakeup_array;
use radio_wakeup::schedules::{ScaleConstant, SectionSchedule, TransmissionArray};

fn main() -> radio_wakeup::Result<()> {
    let (n, b) = (128, 2);
    let schedule = SectionSchedule::general(n, b, ScaleConstant::DEFAULT)?;
    let array = TransmissionArray::sample(schedule.clone(), 2026);
    let net = NetworkConfig::new(n, b, 0.0)?;
    let pattern = ActivationPattern::anchored(
        (1..=40).map(|u| (StationId(3 * u), if u % 8 == 0 { u as u64 } else { 0 })),
    )?;

    let run = run_wakeup_array(&net, &pattern, &array, 0)?;
    let Some(t) = run.wakeup_time else {
        println!("no wake-up within the array");
        return Ok(());
    };
    let (beta, u) = run.heard.unwrap();
    println!("woke up at t={t}: station {u} alone on channel {beta}");

    let iso = first_isolated(&array, &pattern, t)?.expect("the run found one");
    println!(
        "first isolated position: t={} channel {} station {}",
        iso.time, iso.channel, iso.station
    );

    let census = stage_census(&pattern, &schedule, t);
    for (stage, count) in &census.counts {
        println!("  stage {}: {count} station(s)", stage.0);
    }
    println!("psi = {:.4}", psi(&census, pattern.len() as u64));
    Ok(())
}
