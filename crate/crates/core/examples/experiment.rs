//! A small Monte Carlo run with the desk configuration.
use covcut::sim::{monte_carlo_summary, ExperimentConfig, RunOptions};

fn main() -> covcut::Result<()> {
    let cfg = ExperimentConfig {
        trials: 10,
        rounds: 10,
        ..Default::default()
    };
    let summary = monte_carlo_summary(&cfg, RunOptions::default())?;
    println!("round  precision  stderr  type1  type2");
    for r in &summary.rows {
        println!(
            "{:>5}  {:>9.4}  {:>6.4}  {:.4} {:.4}",
            r.round, r.mean_precision, r.stderr, r.type1_ref, r.type2_ref
        );
    }
    for f in &summary.failures {
        eprintln!("trial {} failed: {}", f.trial, f.message);
    }
    Ok(())
}
