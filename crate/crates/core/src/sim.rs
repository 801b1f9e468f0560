//! End-to-end reconstruction loop, beam-precision metric, benchmarks and
//! Monte-Carlo aggregation.
//!
//! Each round the UE reports PMI/CQI measured through the current weighting
//! matrix, the base station appends the record, recomputes the analytic center
//! `Ĉ(t)`, and designs the next weighting matrix from it.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::center::{solve_center_from, CenterProblem, EqualityMode, RegSign, SolverOptions, SolverTraceRow};
use crate::channelgen::{load_covariance, synth_covariance, SyntheticChannelConfig};
use crate::codebook::{gen_type1_codebook, type2_benchmark_quantize, Codebook, Type1Config};
use crate::cutplane::{design_cut, CutBranch, CutDesignParams, NullComponent, SigmaSchedule};
use crate::error::{Error, Result};
use crate::feedback::ue_feedback;
use crate::matcore::{hermitian_eig, random_unitary, ComplexMatrix, HermitianMatrix, DEFAULT_RANK_TOL};

/// Where ground-truth covariances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSource {
    /// Fresh geometric-model draw per trial.
    Synthetic {
        paths: usize,
        angle_spread_deg: f64,
        #[serde(default)]
        rank_target: Option<usize>,
        #[serde(default = "default_mean_range")]
        mean_angle_range_deg: f64,
    },
    /// One covariance file shared by every trial.
    File { path: PathBuf },
}

fn default_mean_range() -> f64 {
    60.0
}

impl Default for ChannelSource {
    fn default() -> Self {
        ChannelSource::Synthetic {
            paths: 8,
            angle_spread_deg: 15.0,
            rank_target: None,
            mean_angle_range_deg: default_mean_range(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CenterConfig {
    pub lambda: f64,
    pub trace_upper: f64,
    /// `None` means `a = -∞`.
    pub trace_lower: Option<f64>,
    pub reg_sign: RegSign,
    pub equality_mode: EqualityMode,
    pub tol: f64,
    pub max_iters: usize,
    /// Start each round's phase I from the previous center instead of `(b/2N)·I`.
    pub warm_start: bool,
}

impl Default for CenterConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            trace_upper: 2.0,
            trace_lower: None,
            reg_sign: RegSign::default(),
            equality_mode: EqualityMode::default(),
            tol: 1e-7,
            max_iters: 200,
            warm_start: false,
        }
    }
}

/// How `m'` is chosen for each new cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MPrimePolicy {
    /// Uniform over the codebook, drawn from the trial stream.
    #[default]
    Random,
    Fixed { index: usize },
    /// `(t - 1) mod M` in round `t`.
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullPolicy {
    #[default]
    Zero,
    Random { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutConfig {
    pub sigma: SigmaSchedule,
    pub m_prime: MPrimePolicy,
    /// Relative eigenvalue threshold deciding the rank branch.
    pub rank_rel_tol: f64,
    pub null_component: NullPolicy,
}

impl Default for CutConfig {
    fn default() -> Self {
        Self {
            sigma: SigmaSchedule::default(),
            m_prime: MPrimePolicy::default(),
            rank_rel_tol: DEFAULT_RANK_TOL,
            null_component: NullPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialWeighting {
    /// First `N_P` columns of the unitary `N_A`-point DFT matrix.
    #[default]
    Dft,
    /// First `N_P` columns of a seeded Haar unitary.
    RandomSemiUnitary,
}

/// Type II benchmark quantizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub beams: usize,
    pub oversampling: usize,
    pub phase_bits: u32,
    pub amp_bits: u32,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            beams: 4,
            oversampling: 4,
            phase_bits: 3,
            amp_bits: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub antennas: usize,
    pub ports: usize,
    pub rounds: usize,
    pub trials: usize,
    pub codebook: Type1Config,
    pub channel: ChannelSource,
    pub center: CenterConfig,
    pub cut: CutConfig,
    pub initial_weighting: InitialWeighting,
    pub benchmark: BenchmarkConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// The desk-scale setup: 8 antennas, 4 ports, 16 codewords, 20 rounds.
    fn default() -> Self {
        Self {
            antennas: 8,
            ports: 4,
            rounds: 20,
            trials: 50,
            codebook: Type1Config {
                n1: 2,
                n2: 1,
                o1: 4,
                o2: 1,
                cophase_count: 2,
                cross_polarized: true,
            },
            channel: ChannelSource::default(),
            center: CenterConfig::default(),
            cut: CutConfig::default(),
            initial_weighting: InitialWeighting::default(),
            benchmark: BenchmarkConfig::default(),
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.ports == 0 {
            return Err(Error::Config("antennas and ports must be positive".into()));
        }
        if self.ports > self.antennas {
            return Err(Error::Config(format!(
                "ports must satisfy N_P ≤ N_A (got N_P = {}, N_A = {})",
                self.ports, self.antennas
            )));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.codebook.validate()?;
        if self.codebook.port_count() != self.ports {
            return Err(Error::Config(format!(
                "codebook layout has {} ports, config has {}",
                self.codebook.port_count(),
                self.ports
            )));
        }
        let c = &self.center;
        if !(c.lambda >= 0.0) || !c.lambda.is_finite() {
            return Err(Error::Config("center.lambda must be finite and >= 0".into()));
        }
        if !(c.trace_upper > 0.0) || !c.trace_upper.is_finite() {
            return Err(Error::Config("center.trace_upper must be positive and finite".into()));
        }
        if let Some(a) = c.trace_lower {
            if !(a < c.trace_upper) {
                return Err(Error::Config("center.trace_lower must be below center.trace_upper".into()));
            }
        }
        if !(c.tol > 0.0) || c.max_iters == 0 {
            return Err(Error::Config("center.tol and center.max_iters must be positive".into()));
        }
        if !(self.cut.rank_rel_tol > 0.0 && self.cut.rank_rel_tol < 1.0) {
            return Err(Error::Config("cut.rank_rel_tol must lie in (0, 1)".into()));
        }
        if let SigmaSchedule::Geometric { delta } = self.cut.sigma {
            if !(0.0..1.0).contains(&delta) {
                return Err(Error::Config("cut.sigma.delta must lie in [0, 1)".into()));
            }
        }
        if let MPrimePolicy::Fixed { index } = self.cut.m_prime {
            if index >= self.codebook.codeword_count() {
                return Err(Error::Config(format!("cut.m_prime.index {index} out of range")));
            }
        }
        if let NullPolicy::Random { scale } = self.cut.null_component {
            if !(scale >= 0.0) || !scale.is_finite() {
                return Err(Error::Config("cut.null_component.scale must be finite and >= 0".into()));
            }
        }
        if let ChannelSource::Synthetic { .. } = self.channel {
            self.synthetic_channel(0)?.validate()?;
        }
        let b = &self.benchmark;
        if b.beams == 0 || b.oversampling == 0 {
            return Err(Error::Config("benchmark.beams and benchmark.oversampling must be positive".into()));
        }
        Ok(())
    }

    /// Synthetic channel settings for one trial, or an error for file sources.
    pub fn synthetic_channel(&self, seed: u64) -> Result<SyntheticChannelConfig> {
        match &self.channel {
            ChannelSource::Synthetic {
                paths,
                angle_spread_deg,
                rank_target,
                mean_angle_range_deg,
            } => Ok(SyntheticChannelConfig {
                antennas: self.antennas,
                paths: *paths,
                angle_spread_deg: *angle_spread_deg,
                rank_target: *rank_target,
                mean_angle_range_deg: *mean_angle_range_deg,
                seed,
            }),
            ChannelSource::File { .. } => Err(Error::Config("channel source is a file".into())),
        }
    }

    pub fn build_codebook(&self) -> Result<Codebook> {
        gen_type1_codebook(&self.codebook)
    }

    fn solver_options(&self, record_trace: bool) -> SolverOptions {
        SolverOptions {
            tol: self.center.tol,
            max_iters: self.center.max_iters,
            record_trace,
            ..SolverOptions::default()
        }
    }

    /// Single-polarized uniform array layout used by the Type II benchmark.
    pub fn benchmark_layout(&self) -> Type1Config {
        Type1Config {
            n1: self.antennas,
            n2: 1,
            o1: self.benchmark.oversampling,
            o2: 1,
            cophase_count: 2,
            cross_polarized: false,
        }
    }
}

/// Per-round record of the reconstruction loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub trial: usize,
    pub round: usize,
    pub pmi: usize,
    pub cqi: f64,
    pub beam_precision: f64,
    pub solver_iterations: usize,
    pub phase_one_iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
    pub equality_residual: f64,
    pub min_slack: f64,
    /// Rank of `Ĉ(t)` used to pick the next design.
    pub estimate_rank: usize,
    pub branch: CutBranch,
    pub m_prime: usize,
    /// Whether the next weighting matrix yields a strict cut at `Ĉ(t)`.
    pub cut_is_proper: bool,
    pub elapsed_ms: f64,
}

/// `ŵᴴ C_true ŵ / λ_max(C_true)` with `ŵ` the principal eigenvector of `c_est`.
pub fn beam_precision(c_true: &HermitianMatrix, c_est: &HermitianMatrix) -> Result<f64> {
    if c_true.dim() != c_est.dim() {
        return Err(Error::DimensionMismatch(format!(
            "true covariance is {}x{}, estimate {}x{}",
            c_true.dim(),
            c_true.dim(),
            c_est.dim(),
            c_est.dim()
        )));
    }
    let d = hermitian_eig(c_true).eigenvalues[0];
    if !(d > 0.0) {
        return Err(Error::UndefinedMetric("true covariance has no positive eigenvalue".into()));
    }
    let w = hermitian_eig(c_est).principal_vector();
    Ok(precision_of_beam(c_true, &w, d))
}

fn precision_of_beam(c_true: &HermitianMatrix, w: &DVector<Complex64>, d: f64) -> f64 {
    let w = w.normalize();
    // a Rayleigh quotient over the top eigenvalue; clamp rounding only
    (c_true.quadratic_form(&w) / d).clamp(0.0, 1.0)
}

/// `Q(0)` for the configured policy.
pub fn initial_weighting(cfg: &ExperimentConfig, rng: &mut impl Rng) -> ComplexMatrix {
    let (na, np) = (cfg.antennas, cfg.ports);
    match cfg.initial_weighting {
        InitialWeighting::Dft => {
            let scale = 1.0 / (na as f64).sqrt();
            ComplexMatrix::from_fn(na, np, |k, n| {
                let phase = -2.0 * std::f64::consts::PI * (k * n) as f64 / na as f64;
                Complex64::from_polar(scale, phase)
            })
        }
        InitialWeighting::RandomSemiUnitary => random_unitary(na, rng).columns(0, np).into_owned(),
    }
}

/// Benchmark beam precisions of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// `Q(0) v_{m0(1)}`: the Type I beam seen through the initial weighting.
    pub type1: f64,
    /// Genie-quantized principal eigenvector of the true covariance.
    pub type2: f64,
}

pub fn run_benchmarks(
    cfg: &ExperimentConfig,
    c_true: &HermitianMatrix,
    q0: &ComplexMatrix,
    book: &Codebook,
) -> Result<BenchmarkReport> {
    let eig = hermitian_eig(c_true);
    let d = eig.eigenvalues[0];
    if !(d > 0.0) {
        return Err(Error::UndefinedMetric("true covariance has no positive eigenvalue".into()));
    }
    let first = ue_feedback(c_true, q0, book, 1)?;
    let beam = q0 * book.codeword(first.pmi);
    let type1 = if beam.norm() > 0.0 { precision_of_beam(c_true, &beam, d) } else { 0.0 };
    let b = &cfg.benchmark;
    let quantized = type2_benchmark_quantize(
        &eig.principal_vector(),
        &cfg.benchmark_layout(),
        b.beams,
        b.phase_bits,
        b.amp_bits,
    )?;
    Ok(BenchmarkReport {
        type1,
        type2: precision_of_beam(c_true, &quantized, d),
    })
}

/// Everything produced by one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: usize,
    pub logs: Vec<RoundLog>,
    pub benchmarks: BenchmarkReport,
    pub solver_trace: Vec<(usize, SolverTraceRow)>,
}

/// Random stream for trial `trial` of a run seeded with `master`.
pub fn trial_rng(master: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64);
    rng
}

/// Algorithm loop for one channel, with the benchmark reference values.
///
/// `rng` drives `m'`, the completion and unitary seeds and any random null
/// component. `Q(0)` is drawn from it too when the random policy is used.
pub fn run_reconstruction(
    cfg: &ExperimentConfig,
    c_true: &HermitianMatrix,
    trial: usize,
    rng: &mut ChaCha8Rng,
    record_trace: bool,
) -> Result<TrialResult> {
    cfg.validate()?;
    if c_true.dim() != cfg.antennas {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, config has {} antennas",
            c_true.dim(),
            c_true.dim(),
            cfg.antennas
        )));
    }
    if !(c_true.trace() < cfg.center.trace_upper) {
        return Err(Error::Config(format!(
            "true covariance trace {} is not below the bound b = {}",
            c_true.trace(),
            cfg.center.trace_upper
        )));
    }
    let book = cfg.build_codebook()?;
    let mut q = initial_weighting(cfg, rng);
    let benchmarks = run_benchmarks(cfg, c_true, &q, &book)?;

    let mut problem = CenterProblem::new(cfg.antennas, &book, cfg.center.trace_upper).with_lambda(cfg.center.lambda);
    problem.trace_lower = cfg.center.trace_lower.unwrap_or(f64::NEG_INFINITY);
    problem.reg_sign = cfg.center.reg_sign;
    problem.equality_mode = cfg.center.equality_mode;
    let opts = cfg.solver_options(record_trace);
    let sigmas = cfg.cut.sigma.sigmas(cfg.ports);

    let mut logs = Vec::with_capacity(cfg.rounds);
    let mut solver_trace = Vec::new();
    let mut previous: Option<HermitianMatrix> = None;
    for t in 1..=cfg.rounds {
        let start = Instant::now();
        let record = ue_feedback(c_true, &q, &book, t)?;
        let (pmi, cqi) = (record.pmi, record.cqi);
        problem.push(record);
        let init = if cfg.center.warm_start { previous.as_ref() } else { None };
        let sol = solve_center_from(&problem, &opts, init)?;
        if sol.min_slack <= 0.0 {
            return Err(Error::InfeasibleProblem(format!("round {t}: center left the localization set")));
        }
        let precision = beam_precision(c_true, &sol.estimate)?;

        let m_prime = match cfg.cut.m_prime {
            MPrimePolicy::Random => rng.random_range(0..book.len()),
            MPrimePolicy::Fixed { index } => index,
            MPrimePolicy::Cycle => (t - 1) % book.len(),
        };
        let params = CutDesignParams {
            m_prime,
            sigmas: sigmas.clone(),
            complement_seed: rng.next_u64(),
            unitary_seed: rng.next_u64(),
        };
        let null = match cfg.cut.null_component {
            NullPolicy::Zero => NullComponent::Zero,
            NullPolicy::Random { scale } => NullComponent::Random {
                seed: rng.next_u64(),
                scale,
            },
        };
        let design = design_cut(&sol.estimate, &params, &book, cfg.cut.rank_rel_tol, null)?;
        q = design.q;

        solver_trace.extend(sol.trace.iter().map(|r| (t, *r)));
        logs.push(RoundLog {
            trial,
            round: t,
            pmi,
            cqi,
            beam_precision: precision,
            solver_iterations: sol.iterations,
            phase_one_iterations: sol.phase_one_iterations,
            kkt_residual: sol.kkt_residual,
            converged: sol.converged,
            equality_residual: sol.equality_residual,
            min_slack: sol.min_slack,
            estimate_rank: design.rank,
            branch: design.branch,
            m_prime,
            cut_is_proper: design.report.cut_is_proper,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        previous = Some(sol.estimate);
    }
    Ok(TrialResult {
        trial,
        logs,
        benchmarks,
        solver_trace,
    })
}

/// Ground truth for one trial: a synthetic draw from the trial stream, or the
/// configured file.
pub fn trial_channel(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<HermitianMatrix> {
    match &cfg.channel {
        ChannelSource::Synthetic { .. } => synth_covariance(&cfg.synthetic_channel(rng.next_u64())?),
        ChannelSource::File { path } => load_covariance(path, Some(cfg.antennas)),
    }
}

/// Run trial `trial` of `cfg` from its own random stream.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize, record_trace: bool) -> Result<TrialResult> {
    let mut rng = trial_rng(cfg.seed, trial);
    let c_true = trial_channel(cfg, &mut rng)?;
    run_reconstruction(cfg, &c_true, trial, &mut rng, record_trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub round: usize,
    pub mean_precision: f64,
    pub stderr: f64,
    pub type1_ref: f64,
    pub type2_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub rows: Vec<SummaryRow>,
    /// Successful trials in trial order.
    pub trials: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
}

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses the rayon default (available processors).
    pub jobs: usize,
    pub solver_trace: bool,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run every trial (in parallel) and aggregate per-round statistics. Failed
/// trials are reported rather than aborting the batch; the result depends only
/// on the configuration, never on scheduling.
pub fn monte_carlo_summary(cfg: &ExperimentConfig, run: RunOptions) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let work = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|k| (k, run_trial(cfg, k, run.solver_trace)))
            .collect::<Vec<_>>()
    };
    let outcomes = if run.jobs == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(run.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", run.jobs)))?
            .install(work)
    };

    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (k, outcome) in outcomes {
        match outcome {
            Ok(t) => trials.push(t),
            Err(e) => {
                log::warn!("trial {k} failed: {e}");
                failures.push(TrialFailure {
                    trial: k,
                    code: e.code().to_string(),
                    message: e.to_string(),
                })
            }
        }
    }

    let mut rows = Vec::new();
    if !trials.is_empty() {
        let type1: Vec<f64> = trials.iter().map(|t| t.benchmarks.type1).collect();
        let type2: Vec<f64> = trials.iter().map(|t| t.benchmarks.type2).collect();
        let (type1_ref, _) = mean_and_stderr(&type1);
        let (type2_ref, _) = mean_and_stderr(&type2);
        for r in 0..cfg.rounds {
            let values: Vec<f64> = trials.iter().map(|t| t.logs[r].beam_precision).collect();
            let (mean_precision, stderr) = mean_and_stderr(&values);
            rows.push(SummaryRow {
                round: r + 1,
                mean_precision,
                stderr,
                type1_ref,
                type2_ref,
            });
        }
    }
    Ok(MonteCarloSummary { rows, trials, failures })
}

/// `round,mean_precision,stderr,type1_ref,type2_ref` with 17 significant digits.
pub fn write_summary_csv<W: Write>(summary: &MonteCarloSummary, mut out: W) -> std::io::Result<()> {
    writeln!(out, "round,mean_precision,stderr,type1_ref,type2_ref")?;
    for r in &summary.rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.round, r.mean_precision, r.stderr, r.type1_ref, r.type2_ref
        )?;
    }
    Ok(())
}

/// One JSON object per round, trials in order.
pub fn write_rounds_jsonl<W: Write>(summary: &MonteCarloSummary, mut out: W) -> Result<()> {
    for t in &summary.trials {
        for log in &t.logs {
            serde_json::to_writer(&mut out, log)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// `trial,round,phase,iteration,objective,grad_norm,step`.
pub fn write_solver_trace_csv<W: Write>(summary: &MonteCarloSummary, mut out: W) -> std::io::Result<()> {
    writeln!(out, "trial,round,phase,iteration,objective,grad_norm,step")?;
    for t in &summary.trials {
        for (round, r) in &t.solver_trace {
            let phase = match r.phase {
                crate::center::SolverPhase::PhaseOne => "phase_one",
                crate::center::SolverPhase::Center => "center",
            };
            writeln!(
                out,
                "{},{round},{phase},{},{:.16e},{:.16e},{:.16e}",
                t.trial, r.iteration, r.objective, r.grad_norm, r.step
            )?;
        }
    }
    Ok(())
}
