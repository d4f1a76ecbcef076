//! Noise kernels acting on the classical particle and exact Gaussian samplers.
//!
//! The quantum-induced force of a squeezed-coherent state is represented as
//! `ζ(t) = a cos(ω t) + b sin(ω t)` with independent `a ~ N(0, v_c)` and
//! `b ~ N(0, v_s)`. Its covariance `v_c cos ωt cos ωt' + v_s sin ωt sin ωt'`
//! equals the stationary `cosh(2r) κ² cos ω(t−t')` plus the non-stationary
//! `sinh(2r) κ² cos ω(t+t')` parts when `v_c = e^{2r} κ²`, `v_s = e^{−2r} κ²`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{QuantumStateSpec, ScenarioFlags, System};

/// Longest grid the dense factorization sampler accepts.
pub const ORACLE_MAX_POINTS: usize = 2048;

/// Eigenvalues below `-PSD_TOLERANCE * trace` are treated as a kernel bug.
pub const PSD_TOLERANCE: f64 = 1e-12;

/// Random stream for one path. Streams are keyed by `(seed, path)` so a path
/// is reproducible regardless of how many others are drawn or in what order.
pub type PathRng = ChaCha8Rng;

pub fn path_rng(seed: u64, path: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Two-quadrature colored noise with carrier `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNoise {
    /// Variance of the cosine amplitude `v_c` [N²].
    pub cos_variance: f64,
    /// Variance of the sine amplitude `v_s` [N²].
    pub sin_variance: f64,
    /// Carrier angular frequency [rad/s].
    pub carrier: f64,
}

impl QuadratureNoise {
    pub fn value(&self, t: f64, t2: f64) -> f64 {
        let (s1, c1) = (self.carrier * t).sin_cos();
        let (s2, c2) = (self.carrier * t2).sin_cos();
        self.cos_variance * (c1 * c2) + self.sin_variance * (s1 * s2)
    }

    /// `((v_c + v_s)/2) cos ω(t − t')`, i.e. `cosh(2r) κ² cos ω(t−t')`.
    pub fn stationary(&self, t: f64, t2: f64) -> f64 {
        0.5 * (self.cos_variance + self.sin_variance) * (self.carrier * (t - t2)).cos()
    }

    /// `((v_c − v_s)/2) cos ω(t + t')`, i.e. `sinh(2r) κ² cos ω(t+t')`.
    pub fn nonstationary(&self, t: f64, t2: f64) -> f64 {
        0.5 * (self.cos_variance - self.sin_variance) * (self.carrier * (t + t2)).cos()
    }

    /// Draws the amplitudes `(a, b)` of one realization.
    pub fn draw_amplitudes<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let za: f64 = rng.sample(StandardNormal);
        let zb: f64 = rng.sample(StandardNormal);
        (za * self.cos_variance.sqrt(), zb * self.sin_variance.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseComponent {
    /// Delta-correlated force, `⟨η(t)η(t')⟩ = strength · δ(t − t')`.
    White { strength: f64 },
    Quadrature(QuadratureNoise),
}

/// Independent noise components; the total kernel is their sum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseModel {
    components: Vec<NoiseComponent>,
}

/// Kernel at `(t, t')`: the smooth part exactly, the white part as its strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub smooth: f64,
    pub white_strength: f64,
}

impl NoiseModel {
    pub fn new(components: Vec<NoiseComponent>) -> Result<Self> {
        for c in &components {
            let ok = match c {
                NoiseComponent::White { strength } => strength.is_finite() && *strength >= 0.0,
                NoiseComponent::Quadrature(q) => {
                    q.cos_variance.is_finite()
                        && q.sin_variance.is_finite()
                        && q.cos_variance >= 0.0
                        && q.sin_variance >= 0.0
                        && q.carrier.is_finite()
                }
            };
            if !ok {
                return Err(Error::domain(format!("invalid noise component {c:?}")));
            }
        }
        Ok(Self { components })
    }

    pub fn silent() -> Self {
        Self::default()
    }

    pub fn components(&self) -> &[NoiseComponent] {
        &self.components
    }

    pub fn quadratures(&self) -> impl Iterator<Item = &QuadratureNoise> + '_ {
        self.components.iter().filter_map(|c| match c {
            NoiseComponent::Quadrature(q) => Some(q),
            NoiseComponent::White { .. } => None,
        })
    }

    pub fn white_strength(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match c {
                NoiseComponent::White { strength } => *strength,
                NoiseComponent::Quadrature(_) => 0.0,
            })
            .sum()
    }

    pub fn kernel_value(&self, t: f64, t2: f64) -> Result<KernelValue> {
        if t.is_nan() || t2.is_nan() || t < 0.0 || t2 < 0.0 {
            return Err(Error::domain(format!(
                "kernel times must be >= 0, got ({t:e}, {t2:e})"
            )));
        }
        Ok(KernelValue {
            smooth: self.smooth_kernel(t, t2),
            white_strength: self.white_strength(),
        })
    }

    fn smooth_kernel(&self, t: f64, t2: f64) -> f64 {
        self.quadratures().map(|q| q.value(t, t2)).sum()
    }

    /// One exact realization of the smooth (quadrature) noise on `grid`.
    pub fn sample_quadrature_path<R: Rng + ?Sized>(
        &self,
        grid: &[f64],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        check_grid(grid)?;
        let mut path = vec![0.0; grid.len()];
        for q in self.quadratures() {
            let (a, b) = q.draw_amplitudes(rng);
            for (value, &t) in path.iter_mut().zip(grid) {
                let (s, c) = (q.carrier * t).sin_cos();
                *value += a * c + b * s;
            }
        }
        Ok(path)
    }
}

/// Builds the noise acting on the classical particle for a scenario.
pub fn build_noise_model(
    system: &System,
    state: &QuantumStateSpec,
    flags: &ScenarioFlags,
) -> NoiseModel {
    let mut components = Vec::new();
    if flags.thermal_noise {
        components.push(NoiseComponent::White {
            strength: system.white_noise_strength(),
        });
    }
    if flags.quantum_noise {
        let kappa2 = system.noise_scale().powi(2);
        components.push(NoiseComponent::Quadrature(QuadratureNoise {
            cos_variance: (2.0 * state.r).exp() * kappa2,
            sin_variance: (-2.0 * state.r).exp() * kappa2,
            carrier: system.omega_y(),
        }));
    }
    NoiseModel { components }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::domain("grid times must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Correlated Gaussian sampler built from the dense grid covariance.
///
/// Independent of the quadrature construction: it only sees kernel values.
#[derive(Debug, Clone)]
pub struct OracleSampler {
    factor: DMatrix<f64>,
    min_eigenvalue: f64,
    trace: f64,
}

impl OracleSampler {
    pub fn new(model: &NoiseModel, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        if grid.len() > ORACLE_MAX_POINTS {
            return Err(Error::domain(format!(
                "oracle sampler grid has {} points (limit {ORACLE_MAX_POINTS})",
                grid.len()
            )));
        }
        let n = grid.len();
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = model.kernel_value(grid[i], grid[j])?.smooth;
                cov[(i, j)] = k;
                cov[(j, i)] = k;
            }
        }
        let trace = cov.trace();
        let eigen = SymmetricEigen::new(cov);
        let min_eigenvalue = eigen.eigenvalues.min();
        let tolerance = PSD_TOLERANCE * trace.abs();
        if min_eigenvalue < -tolerance {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue,
                tolerance,
            });
        }
        let roots = eigen.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = eigen.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(Self {
            factor,
            min_eigenvalue,
            trace,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.ncols();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (&self.factor * z).iter().copied().collect()
    }
}

pub fn sample_oracle_path<R: Rng + ?Sized>(
    model: &NoiseModel,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(OracleSampler::new(model, grid)?.sample(rng))
}
