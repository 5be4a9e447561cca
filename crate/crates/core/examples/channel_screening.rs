//! Runs the randomized Channel-Screening protocol a few times and compares
//! the observed wake-up times with the round bound λ.

use radio_wakeup::model::{ActivationPattern, NetworkConfig, StationId};
use radio_wakeup::protocols::{
    run_channel_screening, screening_probabilities, screening_round_bound, ScreeningConfig,
};

fn main() -> radio_wakeup::Result<()> {
    let (n, b, k, eps) = (256, 3, 64, 0.05);
    let net = NetworkConfig::new(n, b, 0.0)?;
    let probs: Vec<String> = screening_probabilities(k, b)
        .iter()
        .map(|p| format!("{p:.4}"))
        .collect();
    println!("per-channel transmit probabilities: {}", probs.join(" "));
    println!("lambda = {}", screening_round_bound(k, b, eps)?);

    let pattern = ActivationPattern::anchored((1..=k).map(|u| (StationId(u * 3), (u % 5) as u64)))?;
    let cfg = ScreeningConfig::new(k, eps);
    for seed in 0..8 {
        let r = run_channel_screening(&net, &pattern, &cfg, seed)?;
        match (r.wakeup_time, r.heard) {
            (Some(t), Some((beta, u))) => {
                println!("seed {seed}: t={t}, station {u} on channel {beta}")
            }
            _ => println!(
                "seed {seed}: no wake-up within {} rounds",
                r.rounds_executed
            ),
        }
    }
    Ok(())
}
