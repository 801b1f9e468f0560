//! Ground-truth channel covariances: a synthetic geometric model and a CSV
//! interchange format for externally generated matrices.
//!
//! The synthetic model sums path contributions `α_p a(θ_p) a(θ_p)ᴴ` for a
//! half-wavelength uniform linear array, `a(θ)_k = e^{jπ k sin θ}`, with
//! Dirichlet path powers and angles spread uniformly around a random mean.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, ComplexMatrix, ComplexVector, HermitianMatrix};

/// Largest entrywise `|a_ij - conj(a_ji)|` accepted on load.
pub const LOAD_SYMMETRY_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted on load.
pub const LOAD_EIG_TOL: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticChannelConfig {
    pub antennas: usize,
    pub paths: usize,
    pub angle_spread_deg: f64,
    /// Keep only the strongest `r` eigen-directions before normalizing.
    #[serde(default)]
    pub rank_target: Option<usize>,
    /// Half-width of the range the mean angle is drawn from.
    #[serde(default = "default_mean_range")]
    pub mean_angle_range_deg: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_mean_range() -> f64 {
    60.0
}

impl Default for SyntheticChannelConfig {
    fn default() -> Self {
        Self {
            antennas: 8,
            paths: 8,
            angle_spread_deg: 15.0,
            rank_target: None,
            mean_angle_range_deg: default_mean_range(),
            seed: 0,
        }
    }
}

impl SyntheticChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::Config("channel needs at least one antenna".into()));
        }
        if self.paths == 0 {
            return Err(Error::Config("channel needs at least one path".into()));
        }
        if !(self.angle_spread_deg > 0.0 && self.angle_spread_deg <= 180.0) {
            return Err(Error::Config(format!(
                "angle spread must lie in (0, 180] degrees, got {}",
                self.angle_spread_deg
            )));
        }
        if !(0.0..=90.0).contains(&self.mean_angle_range_deg) {
            return Err(Error::Config("mean angle range must lie in [0, 90] degrees".into()));
        }
        if let Some(r) = self.rank_target {
            if r == 0 || r > self.antennas {
                return Err(Error::Config(format!("rank target {r} outside 1..={}", self.antennas)));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// ULA steering vector for angle `theta` (radians from broadside).
pub fn steering_vector(antennas: usize, theta: f64) -> ComplexVector {
    let phase = std::f64::consts::PI * theta.sin();
    DVector::from_fn(antennas, |k, _| Complex64::from_polar(1.0, phase * k as f64))
}

/// Draw a Frobenius-normalized covariance from the geometric model.
pub fn synth_covariance(cfg: &SyntheticChannelConfig) -> Result<HermitianMatrix> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.antennas;
    let mean = rng.random_range(-cfg.mean_angle_range_deg..=cfg.mean_angle_range_deg);
    let half = 0.5 * cfg.angle_spread_deg;

    // Dirichlet(1, ..., 1) via normalized unit-shape gamma draws
    let gamma = Gamma::new(1.0, 1.0).expect("valid gamma parameters");
    let mut powers: Vec<f64> = (0..cfg.paths).map(|_| gamma.sample(&mut rng)).collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);

    let mut c = ComplexMatrix::zeros(n, n);
    for &alpha in &powers {
        let theta = (mean + rng.random_range(-half..=half)).to_radians();
        let a = steering_vector(n, theta);
        c += &a * a.adjoint() * Complex64::new(alpha, 0.0);
    }
    let mut c = HermitianMatrix::from_symmetrized(c);
    if let Some(r) = cfg.rank_target {
        let eig = hermitian_eig(&c);
        c = HermitianMatrix::from_symmetrized(eig.reconstruct_with(r, |l| l.max(0.0)));
    }
    Ok(c.frobenius_normalized().assume_psd())
}

/// Write `c` in the covariance CSV format with 17 significant digits.
pub fn write_covariance<W: Write>(c: &HermitianMatrix, normalized: bool, mut out: W) -> std::io::Result<()> {
    let n = c.dim();
    writeln!(out, "dim,{n},normalized,{}", u8::from(normalized))?;
    let m = c.as_matrix();
    for i in 0..n {
        for j in 0..n {
            writeln!(out, "{i},{j},{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im)?;
        }
    }
    Ok(())
}

pub fn save_covariance(path: &Path, c: &HermitianMatrix, normalized: bool) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_covariance(c, normalized, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Read a covariance file, checking its dimension against `expect_dim` when
/// given. A header flag of 1 asks for Frobenius normalization on load.
pub fn load_covariance(path: &Path, expect_dim: Option<usize>) -> Result<HermitianMatrix> {
    let reader = BufReader::new(File::open(path)?);
    read_covariance(reader, path, expect_dim)
}

pub fn read_covariance<R: BufRead>(reader: R, path: &Path, expect_dim: Option<usize>) -> Result<HermitianMatrix> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate().filter_map(|(k, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((k + 1, other)),
    });

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let (n, normalize) = match fields.as_slice() {
        ["dim", n, "normalized", flag] => {
            let n: usize = n.parse().map_err(|_| parse_err(hline, format!("bad dimension {n:?}")))?;
            let flag = match *flag {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(hline, format!("normalized flag must be 0 or 1, got {other:?}"))),
            };
            (n, flag)
        }
        _ => return Err(parse_err(hline, "expected header `dim,<N>,normalized,<0|1>`".into())),
    };
    if n == 0 {
        return Err(parse_err(hline, "dimension must be positive".into()));
    }
    if let Some(d) = expect_dim {
        if d != n {
            return Err(Error::DimensionMismatch(format!("file holds {n}x{n}, expected {d}x{d}")));
        }
    }

    let mut m = ComplexMatrix::zeros(n, n);
    let mut count = 0;
    for (lno, line) in lines {
        let line = line?;
        let f: Vec<&str> = line.trim().split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(parse_err(lno, format!("expected `i,j,re,im`, got {} fields", f.len())));
        }
        let i: usize = f[0].parse().map_err(|_| parse_err(lno, format!("bad row index {:?}", f[0])))?;
        let j: usize = f[1].parse().map_err(|_| parse_err(lno, format!("bad column index {:?}", f[1])))?;
        let (ei, ej) = (count / n, count % n);
        if count >= n * n || (i, j) != (ei, ej) {
            return Err(parse_err(lno, format!("entry ({i}, {j}) out of row-major order")));
        }
        let re: f64 = f[2].parse().map_err(|_| parse_err(lno, format!("bad real part {:?}", f[2])))?;
        let im: f64 = f[3].parse().map_err(|_| parse_err(lno, format!("bad imaginary part {:?}", f[3])))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(parse_err(lno, "non-finite entry".into()));
        }
        m[(i, j)] = Complex64::new(re, im);
        count += 1;
    }
    if count != n * n {
        return Err(parse_err(hline, format!("expected {} entries, found {count}", n * n)));
    }

    for i in 0..n {
        for j in i..n {
            let asym = (m[(i, j)] - m[(j, i)].conj()).norm();
            if asym > LOAD_SYMMETRY_TOL {
                return Err(Error::SymmetryViolation {
                    row: i,
                    col: j,
                    asymmetry: asym,
                });
            }
        }
    }
    let c = HermitianMatrix::from_symmetrized(m);
    let min_eig = hermitian_eig(&c).eigenvalues.last().copied().unwrap_or(0.0);
    if min_eig < LOAD_EIG_TOL {
        return Err(Error::NegativeEigenvalue(min_eig));
    }
    let c = if normalize { c.frobenius_normalized() } else { c };
    Ok(c.assume_psd())
}
