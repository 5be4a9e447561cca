//! Closed-form bounds over a small grid of parameters.

use radio_wakeup::analysis::{deterministic_lower_bound, deterministic_upper_bounds};
use radio_wakeup::protocols::screening_round_bound;

fn main() -> radio_wakeup::Result<()> {
    println!(
        "{:>8} {:>5} {:>3} {:>9} {:>7} {:>10} {:>10}",
        "n", "k", "b", "lower", "lambda", "general", "many-chan"
    );
    for &(n, k, b) in &[
        (1u64 << 20, 16u64, 1u32),
        (1 << 20, 16, 4),
        (1 << 20, 1024, 8),
        (1 << 16, 256, 32),
        (16, 4, 16),
    ] {
        let up = deterministic_upper_bounds(n, k, b, 0.0);
        println!(
            "{:>8} {:>5} {:>3} {:>9.2} {:>7} {:>10.1} {:>10}",
            n,
            k,
            b,
            deterministic_lower_bound(n, k, b),
            screening_round_bound(k as u32, b, 0.05)?,
            up.general,
            up.modified.map_or("-".to_string(), |m| format!("{m:.1}")),
        );
    }
    let jammed = deterministic_upper_bounds(1 << 20, 16, 4, 0.75);
    println!(
        "with p = 0.75 the general shape grows to {:.1}",
        jammed.general_jammed.unwrap()
    );
    Ok(())
}
