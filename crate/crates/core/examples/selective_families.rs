//! Exhaustive selectivity checks and blocking-set searches.

use radio_wakeup::analysis::{
    check_selective, find_blocking_activation, QuerySequence, SelectivityVerdict, SetFamily,
    SubsetSizes, DEFAULT_BUDGET,
};

fn main() -> radio_wakeup::Result<()> {
    let singletons = SetFamily::singletons(8)?;
    let pairs = SetFamily::new(8, [[1, 2], [3, 4], [5, 6], [7, 8]])?;
    // Halving family: members split [8] by each bit of (u - 1), plus complements.
    let halves = SetFamily::new(
        8,
        (0..3).flat_map(|bit| {
            let ones: Vec<u32> = (1..=8).filter(|u| (u - 1) >> bit & 1 == 1).collect();
            let zeros: Vec<u32> = (1..=8).filter(|u| (u - 1) >> bit & 1 == 0).collect();
            [ones, zeros]
        }),
    )?;

    for (name, family) in [
        ("singletons", &singletons),
        ("pairs", &pairs),
        ("halves", &halves),
    ] {
        for k in [2, 3] {
            let verdict = check_selective(family, k, SubsetSizes::Exactly, DEFAULT_BUDGET)?;
            match verdict {
                SelectivityVerdict::Selective => println!("{name}: (8,{k})-selective"),
                SelectivityVerdict::NotSelective { witness } => {
                    let w: Vec<String> = witness.iter().map(ToString::to_string).collect();
                    println!("{name}: not (8,{k})-selective, missed {{{}}}", w.join(","))
                }
            }
        }
    }

    let everyone = QuerySequence::all_transmit(6, 6);
    println!(
        "all-transmit, k=2: {:?}",
        find_blocking_activation(&everyone, 2, 6, DEFAULT_BUDGET)?
    );
    let rr = QuerySequence::round_robin(6);
    println!(
        "round robin, k=2: {:?}",
        find_blocking_activation(&rr, 2, 6, DEFAULT_BUDGET)?
    );
    Ok(())
}
