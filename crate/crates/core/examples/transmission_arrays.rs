//! Section schedules, bit probabilities and the array file format.

use radio_wakeup::model::{ChannelId, StationId};
use radio_wakeup::schedules::{
    parse_array, ScaleConstant, SectionSchedule, StageIndex, TransmissionArray,
};

fn main() -> radio_wakeup::Result<()> {
    let general = SectionSchedule::general(1024, 2, ScaleConstant::DEFAULT)?;
    println!(
        "general schedule, n=1024 b=2: {} stages, span {}",
        general.max_stage(),
        general.span()
    );
    for i in 1..=4 {
        let r = general.stage_range(StageIndex(i))?;
        let p1 = general.bit_probability(StageIndex(i), ChannelId(1))?.value;
        let p2 = general.bit_probability(StageIndex(i), ChannelId(2))?.value;
        println!(
            "  stage {i}: positions {}..{}  P[bit]=({p1:.5}, {p2:.5})",
            r.start, r.end
        );
    }

    let modified = SectionSchedule::modified(1 << 10, 32, ScaleConstant::DEFAULT)?;
    println!(
        "modified schedule, n=1024 b=32: channel modulus {}, span {}",
        modified.channel_modulus(),
        modified.span()
    );

    let array = TransmissionArray::sample(general.clone(), 7);
    let row: String = (0..48)
        .map(|j| {
            if array.bit(StationId(1), ChannelId(1), j).unwrap() {
                '1'
            } else {
                '.'
            }
        })
        .collect();
    println!("station 1, channel 1, first 48 positions: {row}");

    let lazy = array.to_bytes();
    let explicit = TransmissionArray::sample_with_length(general, 7, 256)?.materialize()?;
    let bytes = explicit.to_bytes();
    println!(
        "seeded file: {} bytes; explicit 256-position file: {} bytes",
        lazy.len(),
        bytes.len()
    );
    assert_eq!(parse_array(&bytes)?, explicit);
    Ok(())
}
