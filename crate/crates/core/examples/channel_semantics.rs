//! One round on a three-channel network: a lone sender is heard, a
//! collision and a jammed channel both look like silence.

use radio_wakeup::model::{
    draw_jammed_channels, evaluate_round, ChannelFeedback, ChannelId, NetworkConfig,
    TransmissionDecision,
};

fn main() -> radio_wakeup::Result<()> {
    let net = NetworkConfig::new(6, 3, 0.0)?;
    let decisions = [
        TransmissionDecision::new(1, 1),
        TransmissionDecision::new(2, 2),
        TransmissionDecision::new(3, 2),
        TransmissionDecision::new(4, 3),
    ];
    let outcome = evaluate_round(&net, 0, &decisions, &[ChannelId(3)])?;
    for beta in net.channels() {
        let what = match outcome.feedback(beta) {
            ChannelFeedback::Heard(u) => format!("heard station {u}"),
            ChannelFeedback::Nothing => "nothing".to_string(),
        };
        println!("channel {beta}: {what}");
    }
    println!("wake-up: {:?}", outcome.heard());

    // Random jamming is a deterministic function of (seed, time, channel).
    let jammy = NetworkConfig::new(6, 8, 0.5)?;
    for t in 0..4 {
        let jammed: Vec<String> = draw_jammed_channels(&jammy, t, 42)
            .iter()
            .map(|c| c.to_string())
            .collect();
        println!("t={t} jammed channels: [{}]", jammed.join(" "));
    }
    Ok(())
}
