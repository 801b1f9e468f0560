//! What the UE reports when probed with the DFT weighting: a PMI and a CQI.
use covcut::feedback::{effective_covariance, ue_feedback};
use covcut::sim::{initial_weighting, ExperimentConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> covcut::Result<()> {
    let cfg = ExperimentConfig::default();
    let book = cfg.build_codebook()?;
    let c = covcut::channelgen::synth_covariance(&cfg.synthetic_channel(3)?)?;
    let q0 = initial_weighting(&cfg, &mut ChaCha8Rng::seed_from_u64(0));

    let r = effective_covariance(&c, &q0)?;
    for (m, v) in book.iter().enumerate() {
        println!("v_{m:<2} gain {:.4}", r.quadratic_form(v));
    }

    let rec = ue_feedback(&c, &q0, &book, 1)?;
    println!("reported PMI {} with CQI {:.4}", rec.pmi, rec.cqi);
    Ok(())
}
