//! Synthesize a covariance, write it to CSV and read it back.
use covcut::channelgen::{load_covariance, save_covariance, synth_covariance, SyntheticChannelConfig};
use covcut::matcore::{frobenius_distance, hermitian_eig, rank_estimate};

fn main() -> covcut::Result<()> {
    let cfg = SyntheticChannelConfig {
        paths: 3,
        angle_spread_deg: 10.0,
        ..Default::default()
    }
    .with_seed(7);
    let c = synth_covariance(&cfg)?;

    let eig = hermitian_eig(&c);
    println!("trace {:.4}, rank(1e-8) = {}", c.trace(), rank_estimate(&c, 1e-8));
    let spectrum: Vec<String> = eig.eigenvalues.iter().map(|l| format!("{l:.2e}")).collect();
    println!("eigenvalues {}", spectrum.join(" "));

    let path = std::env::temp_dir().join("covcut-channel.csv");
    save_covariance(&path, &c, true)?;
    let back = load_covariance(&path, Some(cfg.antennas))?;
    println!(
        "round trip through {}: Frobenius error {:.1e}",
        path.display(),
        frobenius_distance(back.as_matrix(), c.as_matrix())
    );
    Ok(())
}
