//! Brute-force propagator: fixed-step RK4 integration of the coupled-mode
//! Heisenberg equations
//!
//! ```text
//! d a_0 / dz = αλ e^{iΔz} Σ_k a_k†,     d a_k / dz = αλ e^{iΔz} a_0†
//! ```
//!
//! written for the blocks of `a(z) = A(z) a(0) + B(z) a†(0)`. Shares no code
//! with the closed-form propagator in [`crate::pdc`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entanglement::threshold_coupling;
use crate::error::{invalid, Result};
use crate::pdc::{build_propagator, BogoliubovPropagator, PdcConfig};
use crate::symplectic::{ModeLayout, SymplecticMatrix};

/// Largest Bogoliubov-condition defect accepted by [`to_quadrature_propagator`].
pub const BOGOLIUBOV_TOL: f64 = 1e-6;
/// Elementwise agreement required between integrated and analytic propagators.
pub const EQUIVALENCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OdeSettings {
    step_count: usize,
}

impl OdeSettings {
    pub const DEFAULT_STEPS: usize = 10_000;

    pub fn new(step_count: usize) -> Result<Self> {
        if step_count == 0 {
            return Err(invalid("step_count must be positive"));
        }
        Ok(Self { step_count })
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// At least 100 steps.
    pub fn is_acceptance_grade(&self) -> bool {
        self.step_count >= 100
    }
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            step_count: Self::DEFAULT_STEPS,
        }
    }
}

/// `a(ℓ) = A a(0) + B a†(0)` in complex mode-operator form.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexModeMap {
    pub a_block: DMatrix<Complex64>,
    pub b_block: DMatrix<Complex64>,
}

impl ComplexModeMap {
    pub fn identity(n_modes: usize) -> Self {
        Self {
            a_block: DMatrix::identity(n_modes, n_modes),
            b_block: DMatrix::zeros(n_modes, n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a_block.nrows()
    }

    /// `(max|AA† - BB† - I|, max|ABᵀ - BAᵀ|)`.
    pub fn bogoliubov_defects(&self) -> (f64, f64) {
        let (a, b) = (&self.a_block, &self.b_block);
        let n = self.n_modes();
        let norm = a * a.adjoint() - b * b.adjoint() - DMatrix::identity(n, n);
        let sym = a * b.transpose() - b * a.transpose();
        let amax = |m: DMatrix<Complex64>| m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        (amax(norm), amax(sym))
    }
}

fn coupling_matrix(config: &PdcConfig) -> DMatrix<Complex64> {
    let n = 2 * config.n_pairs() + 1;
    let k = Complex64::new(config.coupling(), 0.0);
    DMatrix::from_fn(n, n, |i, j| {
        if (i == 0) != (j == 0) {
            k
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Integrates the `(A, B)` blocks from identity at `z = 0` to `z = ℓ`.
pub fn integrate(config: &PdcConfig, settings: &OdeSettings) -> ComplexModeMap {
    let n = 2 * config.n_pairs() + 1;
    let coupling = coupling_matrix(config);
    let delta = config.delta();
    let h = config.length() / settings.step_count as f64;

    let rhs = |z: f64, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>| {
        let phase = Complex64::from_polar(1.0, delta * z);
        let da = (&coupling * b.map(|c| c.conj())) * phase;
        let db = (&coupling * a.map(|c| c.conj())) * phase;
        (da, db)
    };

    let mut a: DMatrix<Complex64> = DMatrix::identity(n, n);
    let mut b: DMatrix<Complex64> = DMatrix::zeros(n, n);
    let half = Complex64::from(0.5 * h);
    let full = Complex64::from(h);
    let sixth = Complex64::from(h / 6.0);
    let two = Complex64::from(2.0);
    for step in 0..settings.step_count {
        let z = step as f64 * h;
        let (k1a, k1b) = rhs(z, &a, &b);
        let (k2a, k2b) = rhs(z + 0.5 * h, &(&a + &k1a * half), &(&b + &k1b * half));
        let (k3a, k3b) = rhs(z + 0.5 * h, &(&a + &k2a * half), &(&b + &k2b * half));
        let (k4a, k4b) = rhs(z + h, &(&a + &k3a * full), &(&b + &k3b * full));
        a += (k1a + k2a * two + k3a * two + k4a) * sixth;
        b += (k1b + k2b * two + k3b * two + k4b) * sixth;
    }
    ComplexModeMap {
        a_block: a,
        b_block: b,
    }
}

/// Real quadrature form of a complex mode map.
///
/// With `x = a + a†` and `p = -i(a - a†)`:
/// `x' = Re(A+B) x - Im(A-B) p`, `p' = Im(A+B) x + Re(A-B) p`.
pub fn to_quadrature_propagator(map: &ComplexModeMap) -> Result<BogoliubovPropagator> {
    let n = map.n_modes();
    if map.b_block.nrows() != n || map.a_block.ncols() != n || map.b_block.ncols() != n {
        return Err(invalid("A and B blocks must be square and of equal size"));
    }
    let (norm_defect, sym_defect) = map.bogoliubov_defects();
    if norm_defect.max(sym_defect) > BOGOLIUBOV_TOL {
        return Err(invalid(format!(
            "mode map violates the Bogoliubov conditions ({norm_defect:e}, {sym_defect:e})"
        )));
    }
    let sum = &map.a_block + &map.b_block;
    let diff = &map.a_block - &map.b_block;
    let m = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r / 2, c / 2);
        match (r % 2, c % 2) {
            (0, 0) => sum[(i, j)].re,
            (0, _) => -diff[(i, j)].im,
            (_, 0) => sum[(i, j)].im,
            _ => diff[(i, j)].re,
        }
    });
    Ok(BogoliubovPropagator::new(
        SymplecticMatrix::from_trusted(m),
        ModeLayout::new(n)?,
    ))
}

/// Standard comparison grid: `N ∈ {1, 2, 3}`, `αλℓ ∈ {0.3, threshold, 1.5}`
/// at `λ = ℓ = 1`, and `Δ ∈ {0, 0.5, 2gαλ, 4}`. The third mismatch sits on
/// `Γ = 0`, so all three gain regimes appear.
pub fn equivalence_grid() -> Vec<PdcConfig> {
    let mut grid = Vec::with_capacity(36);
    for n_pairs in 1..=3 {
        for alpha in [0.3, threshold_coupling(), 1.5] {
            let gain = ((2 * n_pairs) as f64).sqrt();
            for delta in [0.0, 0.5, 2.0 * gain * alpha, 4.0] {
                grid.push(
                    PdcConfig::new(alpha, 1.0, 1.0, delta, n_pairs)
                        .expect("grid parameters are valid"),
                );
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub steps: usize,
    pub max_error: f64,
}

/// Max-norm distance between the integrated and analytic quadrature
/// propagators at `steps` RK4 steps.
pub fn integration_error(config: &PdcConfig, steps: usize) -> Result<f64> {
    let settings = OdeSettings::new(steps)?;
    let numeric = to_quadrature_propagator(&integrate(config, &settings))?;
    Ok(numeric.max_abs_diff(&build_propagator(config)))
}

pub fn convergence_probe_with(
    config: &PdcConfig,
    steps: &[usize],
) -> Result<Vec<ConvergencePoint>> {
    steps
        .iter()
        .map(|&s| {
            Ok(ConvergencePoint {
                steps: s,
                max_error: integration_error(config, s)?,
            })
        })
        .collect()
}

/// Errors at 10², 10³ and 10⁴ steps.
pub fn convergence_probe(config: &PdcConfig) -> Result<Vec<ConvergencePoint>> {
    convergence_probe_with(config, &[100, 1_000, 10_000])
}
