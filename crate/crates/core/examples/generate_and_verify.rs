//! Samples randomized arrays until one provably wakes every small
//! activation pattern, then saves it.

use radio_wakeup::analysis::{PatternFamily, SubsetSizes, DEFAULT_BUDGET};
use radio_wakeup::harness::{default_horizon, generate_and_verify, ArrayParams, GenerateOutcome};
use radio_wakeup::schedules::{save_array_to_path, ScaleConstant, ScheduleKind};

fn main() -> radio_wakeup::Result<()> {
    let params = ArrayParams {
        kind: ScheduleKind::General,
        n: 16,
        b: 2,
        c: ScaleConstant::DEFAULT,
        length: None,
    };
    let k = 4;
    let horizon = default_horizon(&params.schedule()?, k);
    println!("checking all simultaneous sets of at most {k} stations up to t={horizon}");
    let family = PatternFamily::Simultaneous {
        sizes: SubsetSizes::UpTo,
    };
    match generate_and_verify(&params, k, Some(horizon), family, 50, 2024, DEFAULT_BUDGET)? {
        GenerateOutcome::Found {
            array,
            array_seed,
            attempt,
            stats,
        } => {
            println!(
                "attempt {attempt} passed (seed {array_seed}); pass fraction {:.2}",
                stats.pass_fraction
            );
            let path = std::env::temp_dir().join("verified-array.bin");
            save_array_to_path(&array, &path)?;
            println!("saved to {}", path.display());
        }
        GenerateOutcome::Exhausted {
            last_counterexample,
            stats,
        } => {
            println!(
                "none of {} attempts passed; last counterexample {last_counterexample:?}",
                stats.attempts
            )
        }
    }

    // Staggered activations are a much larger family; keep it tiny.
    let tiny = ArrayParams {
        n: 6,
        b: 1,
        ..params
    };
    let family = PatternFamily::Staggered {
        window: 2,
        sizes: SubsetSizes::UpTo,
    };
    let outcome = generate_and_verify(&tiny, 2, None, family, 20, 1, DEFAULT_BUDGET)?;
    println!(
        "n=6 staggered (window 2): pass fraction {:.2}",
        outcome.stats().pass_fraction
    );
    Ok(())
}
