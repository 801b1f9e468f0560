//! Type I rank-1 codebooks and a Type II-style benchmark quantizer.
//!
//! Type I codewords are oversampled 2-D DFT beams over an `n1 x n2` panel,
//! optionally duplicated across two polarizations with a co-phasing factor.
//! Ordering is beam-major (horizontal index, vertical index, co-phase) so PMI
//! values are stable. All indices in this crate are zero-based.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::ComplexVector;

const UNIT_NORM_TOL: f64 = 1e-12;

/// Ordered list of unit-norm codewords shared by base station and UE.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    port_count: usize,
    codewords: Vec<ComplexVector>,
}

impl Codebook {
    /// Validates dimensions, unit norms, `M >= 2` and pairwise distinctness.
    pub fn new(codewords: Vec<ComplexVector>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if codewords.len() < 2 {
            return Err(Error::Config("codebook needs at least two codewords".into()));
        }
        let port_count = codewords[0].len();
        for (m, v) in codewords.iter().enumerate() {
            if v.len() != port_count {
                return Err(Error::DimensionMismatch(format!(
                    "codeword {m} has length {}, expected {port_count}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Config(format!("codeword {m} is not unit norm ({})", v.norm())));
            }
        }
        for i in 0..codewords.len() {
            for j in 0..i {
                if (&codewords[i] - &codewords[j]).norm() < 1e-12 {
                    return Err(Error::Config(format!("codewords {j} and {i} are identical")));
                }
            }
        }
        Ok(Self {
            port_count,
            codewords,
        })
    }

    pub fn port_count(&self) -> usize {
        self.port_count
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, m: usize) -> &ComplexVector {
        &self.codewords[m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComplexVector> {
        self.codewords.iter()
    }

    /// Codewords `m`, `k` are parallel when `|v_mᴴ v_k| = 1` (they differ only
    /// by a global phase and produce identical quadratic forms).
    pub fn is_parallel(&self, m: usize, k: usize) -> bool {
        (self.codewords[m].dotc(&self.codewords[k]).norm() - 1.0).abs() < 1e-12
    }

    /// One codeword per row, interleaved `re,im` pairs.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.codewords {
            let row: Vec<String> = v
                .iter()
                .flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)])
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Antenna-panel layout and oversampling of a Type I codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Type1Config {
    pub n1: usize,
    pub n2: usize,
    pub o1: usize,
    pub o2: usize,
    /// Number of co-phasing values between polarizations (2 = BPSK, 4 = QPSK).
    pub cophase_count: usize,
    pub cross_polarized: bool,
}

impl Type1Config {
    /// Port count `N_P` implied by the layout.
    pub fn port_count(&self) -> usize {
        self.n1 * self.n2 * if self.cross_polarized { 2 } else { 1 }
    }

    pub fn codeword_count(&self) -> usize {
        let beams = self.n1 * self.o1 * self.n2 * self.o2;
        if self.cross_polarized {
            beams * self.cophase_count
        } else {
            beams
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Config("n1 and n2 must be at least 1".into()));
        }
        if self.o1 == 0 || self.o2 == 0 {
            return Err(Error::Config("o1 and o2 must be at least 1".into()));
        }
        if !matches!(self.cophase_count, 2 | 4) {
            return Err(Error::Config(format!(
                "cophase_count must be 2 or 4, got {}",
                self.cophase_count
            )));
        }
        // a single-element dimension cannot be oversampled without repeating beams
        if (self.n1 == 1 && self.o1 > 1) || (self.n2 == 1 && self.o2 > 1) {
            return Err(Error::Config("oversampling a single-element dimension repeats beams".into()));
        }
        if self.codeword_count() < 2 {
            return Err(Error::Config("layout yields fewer than two codewords".into()));
        }
        Ok(())
    }

    /// Unit-norm single-polarization 2-D DFT beam with oversampled indices
    /// `l ∈ 0..n1·o1`, `m ∈ 0..n2·o2`.
    pub fn dft_beam(&self, l: usize, m: usize) -> ComplexVector {
        let (n1, n2) = (self.n1, self.n2);
        let scale = 1.0 / ((n1 * n2) as f64).sqrt();
        ComplexVector::from_fn(n1 * n2, |idx, _| {
            let (i1, i2) = (idx / n2, idx % n2);
            let phase = 2.0
                * PI
                * (l as f64 * i1 as f64 / (n1 * self.o1) as f64
                    + m as f64 * i2 as f64 / (n2 * self.o2) as f64);
            Complex64::from_polar(scale, phase)
        })
    }

    fn cophase(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.cophase_count as f64)
    }
}

fn cross_pol(beam: &ComplexVector, phi: Complex64) -> ComplexVector {
    let n = beam.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::from_fn(2 * n, |i, _| if i < n { beam[i] * s } else { beam[i - n] * phi * s })
}

pub fn gen_type1_codebook(cfg: &Type1Config) -> Result<Codebook> {
    cfg.validate()?;
    let mut words = Vec::with_capacity(cfg.codeword_count());
    for l in 0..cfg.n1 * cfg.o1 {
        for m in 0..cfg.n2 * cfg.o2 {
            let b = cfg.dft_beam(l, m);
            if cfg.cross_polarized {
                for k in 0..cfg.cophase_count {
                    words.push(cross_pol(&b, cfg.cophase(k)));
                }
            } else {
                words.push(b);
            }
        }
    }
    Codebook::new(words)
}

/// `|aᴴ b| / (||a|| ||b||)`.
pub fn correlation(a: &ComplexVector, b: &ComplexVector) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        0.0
    } else {
        a.dotc(b).norm() / denom
    }
}

/// Relative amplitude levels `{1, 2^{-1/2}, 2^{-1}, …, 0}` for `bits` bits.
pub fn amplitude_levels(bits: u32) -> Vec<f64> {
    if bits == 0 {
        return vec![1.0];
    }
    let n = 1usize << bits;
    let mut levels: Vec<f64> = (0..n - 1).map(|k| 2f64.powf(-(k as f64) / 2.0)).collect();
    levels.push(0.0);
    levels
}

fn quantize_amplitude(rel: f64, levels: &[f64]) -> f64 {
    levels
        .iter()
        .copied()
        .min_by(|a, b| (a - rel).abs().total_cmp(&(b - rel).abs()))
        .unwrap_or(1.0)
}

fn quantize_phase(z: Complex64, bits: u32) -> Complex64 {
    if bits == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let n = (1u64 << bits) as f64;
    let step = 2.0 * PI / n;
    let k = (z.arg() / step).round();
    Complex64::from_polar(1.0, k * step)
}

/// Orthogonal basis used by the Type II benchmark: the non-oversampled DFT
/// beams, placed on each polarization separately for cross-polarized layouts.
/// Returned as `(spatial beams, polarization count)`.
fn orthogonal_beams(cfg: &Type1Config) -> (Vec<ComplexVector>, usize) {
    let mut beams = Vec::with_capacity(cfg.n1 * cfg.n2);
    for k1 in 0..cfg.n1 {
        for k2 in 0..cfg.n2 {
            beams.push(cfg.dft_beam(k1 * cfg.o1, k2 * cfg.o2));
        }
    }
    (beams, if cfg.cross_polarized { 2 } else { 1 })
}

fn embed(beam: &ComplexVector, pol: usize, pols: usize) -> ComplexVector {
    let n = beam.len();
    let mut out = ComplexVector::zeros(n * pols);
    out.rows_mut(pol * n, n).copy_from(beam);
    out
}

/// Genie-aided Type II-style quantization of `target`.
///
/// Picks the `beams` strongest orthogonal DFT beams (by power summed over
/// polarizations), quantizes each coefficient's amplitude relative to the
/// strongest one to `amp_bits` and its relative phase to `phase_bits`, and
/// returns the unit-norm combination. Every prefix of the greedy beam set and
/// the best single Type I codeword are also evaluated, and the candidate with
/// the highest correlation to the target is returned.
pub fn type2_benchmark_quantize(
    target: &ComplexVector,
    cfg: &Type1Config,
    beams: usize,
    phase_bits: u32,
    amp_bits: u32,
) -> Result<ComplexVector> {
    cfg.validate()?;
    if target.len() != cfg.port_count() {
        return Err(Error::DimensionMismatch(format!(
            "target length {} does not match layout dimension {}",
            target.len(),
            cfg.port_count()
        )));
    }
    let (basis, pols) = orthogonal_beams(cfg);
    if beams == 0 || beams > basis.len() {
        return Err(Error::Config(format!(
            "beams must be in 1..={}, got {beams}",
            basis.len()
        )));
    }
    if target.norm() == 0.0 {
        return Err(Error::Config("target vector is zero".into()));
    }

    let n = basis[0].len();
    let coeff = |b: &ComplexVector, pol: usize| b.dotc(&target.rows(pol * n, n).into_owned());
    let mut ranked: Vec<(usize, f64)> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| (i, (0..pols).map(|p| coeff(b, p).norm_sqr()).sum()))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let levels = amplitude_levels(amp_bits);
    let mut best: Option<(f64, ComplexVector)> = None;
    let mut consider = |v: ComplexVector| {
        let c = correlation(&v, target);
        if best.as_ref().is_none_or(|(bc, _)| c > *bc) {
            best = Some((c, v));
        }
    };

    for l in 1..=beams {
        let terms: Vec<(ComplexVector, Complex64)> = ranked[..l]
            .iter()
            .flat_map(|&(i, _)| (0..pols).map(move |p| (i, p)))
            .map(|(i, p)| (embed(&basis[i], p, pols), coeff(&basis[i], p)))
            .collect();
        let strongest = terms
            .iter()
            .map(|(_, c)| *c)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        if strongest.norm() == 0.0 {
            continue;
        }
        let mut v = ComplexVector::zeros(target.len());
        for (b, c) in &terms {
            let rel = c / strongest;
            let q = quantize_amplitude(rel.norm(), &levels) * quantize_phase(rel, phase_bits);
            v += b * q;
        }
        if v.norm() > 0.0 {
            consider(v.unscale(v.norm()));
        }
    }

    let type1 = gen_type1_codebook(cfg)?;
    if let Some(v) = type1
        .iter()
        .max_by(|a, b| correlation(a, target).total_cmp(&correlation(b, target)))
    {
        consider(v.clone());
    }

    Ok(best.map(|(_, v)| v).expect("at least one candidate"))
}
