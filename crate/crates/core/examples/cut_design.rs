//! Design the next weighting so that a chosen codeword wins under the current
//! estimate, once for a full-rank estimate and once for a rank-deficient one.
use covcut::cutplane::{design_cut, CutDesignParams, NullComponent, SigmaSchedule};
use covcut::matcore::{complex_gaussian, HermitianMatrix};
use covcut::sim::ExperimentConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> covcut::Result<()> {
    let cfg = ExperimentConfig::default();
    let book = cfg.build_codebook()?;
    let params = CutDesignParams {
        m_prime: 5,
        sigmas: SigmaSchedule::strict().sigmas(cfg.ports),
        complement_seed: 11,
        unitary_seed: 12,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for cols in [cfg.antennas, 2] {
        let g = complex_gaussian(cfg.antennas, cols, &mut rng);
        let c_hat = HermitianMatrix::from_symmetrized(&g * g.adjoint());
        let cut = design_cut(&c_hat, &params, &book, 1e-8, NullComponent::Zero)?;
        let r = &cut.report;
        println!(
            "rank {} -> {:?}: predicted PMI {} (wanted {}), margin {:.3e}, proper {}",
            cut.rank, cut.branch, r.predicted_pmi, r.m_prime, r.margin, r.cut_is_proper
        );
    }
    Ok(())
}
