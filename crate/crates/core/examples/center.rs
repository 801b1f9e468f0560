//! A hand-rolled version of the reconstruction loop: feed back, recenter,
//! design the next cut, and watch the beam precision.
use covcut::center::{solve_center, CenterProblem};
use covcut::cutplane::{design_cut, CutDesignParams, NullComponent};
use covcut::feedback::ue_feedback;
use covcut::sim::{beam_precision, initial_weighting, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> covcut::Result<()> {
    let cfg = ExperimentConfig::default();
    let book = cfg.build_codebook()?;
    let c = covcut::channelgen::synth_covariance(&cfg.synthetic_channel(21)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut q = initial_weighting(&cfg, &mut rng);
    let mut problem = CenterProblem::new(cfg.antennas, &book, cfg.center.trace_upper);

    for round in 1..=8 {
        let rec = ue_feedback(&c, &q, &book, round)?;
        println!("round {round}: PMI {:>2}, CQI {:.4}", rec.pmi, rec.cqi);
        problem.push(rec);

        let sol = solve_center(&problem, &Default::default())?;
        println!(
            "  center after {} Newton steps (KKT {:.1e}), precision {:.4}",
            sol.iterations,
            sol.kkt_residual,
            beam_precision(&c, &sol.estimate)?
        );

        let params = CutDesignParams {
            m_prime: rng.random_range(0..book.len()),
            sigmas: cfg.cut.sigma.sigmas(cfg.ports),
            complement_seed: rng.random(),
            unitary_seed: rng.random(),
        };
        q = design_cut(&sol.estimate, &params, &book, cfg.cut.rank_rel_tol, NullComponent::Zero)?.q;
    }
    Ok(())
}
