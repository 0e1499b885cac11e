//! Analytic propagator of parametric down-conversion driven by `2N`
//! symmetrically tilted pump waves.
//!
//! The central mode `a_0` couples with strength `αλ` to each of the `2N`
//! side modes. Only the uniform side-mode combination
//! `a_s = (2N)^{-1/2} Σ_k a_k` takes part in the interaction, and it forms a
//! two-mode squeezer with `a_0` whose effective gain is `g·αλ`, `g = √(2N)`:
//!
//! ```text
//! a_0(z) = U a_0 + V a_s†,    a_s(z) = U a_s + V a_0†
//! U(z) = e^{iΔz/2} (cosh Γz - i Δ/(2Γ) sinh Γz)
//! V(z) = e^{iΔz/2} (g αλ / Γ) sinh Γz,     Γ² = g²α²λ² - Δ²/4
//! ```
//!
//! The `2N - 1` side combinations orthogonal to `a_s` are untouched.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::symplectic::{CovarianceMatrix, ModeLayout, SymplecticMatrix};

/// Physical parameters of one crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcConfig {
    alpha: f64,
    lambda: f64,
    length: f64,
    delta: f64,
    n_pairs: usize,
}

impl PdcConfig {
    /// `alpha >= 0`, `lambda > 0`, `length >= 0`, `n_pairs >= 1`, all finite.
    pub fn new(alpha: f64, lambda: f64, length: f64, delta: f64, n_pairs: usize) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("lambda", lambda),
            ("length", length),
            ("delta", delta),
        ] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if alpha < 0.0 {
            return Err(invalid(format!("alpha must be >= 0, got {alpha}")));
        }
        if lambda <= 0.0 {
            return Err(invalid(format!("lambda must be > 0, got {lambda}")));
        }
        if length < 0.0 {
            return Err(invalid(format!("length must be >= 0, got {length}")));
        }
        if n_pairs == 0 {
            return Err(invalid("n_pairs must be at least 1"));
        }
        Ok(Self {
            alpha,
            lambda,
            length,
            delta,
            n_pairs,
        })
    }

    /// Phase-matched crystal with squeezing parameter `r` (`λ = ℓ = 1`).
    pub fn phase_matched(r: f64, n_pairs: usize) -> Result<Self> {
        Self::new(r / SQRT_2, 1.0, 1.0, 0.0, n_pairs)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    /// `αλ`, the per-mode coupling rate.
    pub fn coupling(&self) -> f64 {
        self.alpha * self.lambda
    }

    /// `g = √(2N)`.
    pub fn gain_factor(&self) -> f64 {
        ((2 * self.n_pairs) as f64).sqrt()
    }

    pub fn layout(&self) -> ModeLayout {
        ModeLayout::pdc(self.n_pairs).expect("n_pairs validated at construction")
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.alpha, self.lambda, length, self.delta, self.n_pairs)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.alpha, self.lambda, self.length, delta, self.n_pairs)
    }
}

/// Sign of `Γ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainRegime {
    Hyperbolic,
    Degenerate,
    Oscillatory,
}

/// `U(z)`, `V(z)` and `Γ²` of the effective two-mode squeezer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorFunctions {
    pub u: Complex64,
    pub v: Complex64,
    pub gamma_squared: f64,
    pub regime: GainRegime,
}

impl PropagatorFunctions {
    /// `|U|² - |V|²`, which is 1 for a valid Bogoliubov pair.
    pub fn normalization(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr()
    }
}

pub fn propagator_functions(config: &PdcConfig, z: f64) -> PropagatorFunctions {
    let kappa = config.gain_factor() * config.coupling();
    let half_delta = 0.5 * config.delta;
    let gamma_squared = kappa * kappa - half_delta * half_delta;
    let degenerate_band = 1e-12 * (kappa * kappa + half_delta * half_delta + 1.0);

    // (cosh Γz, sinh(Γz)/Γ), continued analytically through Γ² = 0.
    let (regime, even, odd) = if gamma_squared.abs() < degenerate_band {
        (GainRegime::Degenerate, 1.0, z)
    } else if gamma_squared > 0.0 {
        let gamma = gamma_squared.sqrt();
        (
            GainRegime::Hyperbolic,
            (gamma * z).cosh(),
            (gamma * z).sinh() / gamma,
        )
    } else {
        let omega = (-gamma_squared).sqrt();
        (
            GainRegime::Oscillatory,
            (omega * z).cos(),
            (omega * z).sin() / omega,
        )
    };

    let phase = Complex64::from_polar(1.0, half_delta * z);
    PropagatorFunctions {
        u: phase * Complex64::new(even, -half_delta * odd),
        v: phase * (kappa * odd),
        gamma_squared,
        regime,
    }
}

/// `r = √2 αλℓ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezingParameter(f64);

impl SqueezingParameter {
    pub fn value(&self) -> f64 {
        self.0
    }
}

pub fn squeezing_parameter(config: &PdcConfig) -> SqueezingParameter {
    SqueezingParameter(SQRT_2 * config.alpha * config.lambda * config.length)
}

/// Linear input-to-output map on the quadrature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovPropagator {
    matrix: SymplecticMatrix,
    layout: ModeLayout,
}

impl BogoliubovPropagator {
    pub(crate) fn new(matrix: SymplecticMatrix, layout: ModeLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn symplectic(&self) -> &SymplecticMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.matrix()
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    /// Output covariance for vacuum input, `M Mᵀ`.
    pub fn apply_to_vacuum(&self) -> CovarianceMatrix {
        let m = self.matrix.matrix();
        CovarianceMatrix::from_trusted(m * m.transpose())
    }

    pub fn max_abs_diff(&self, other: &BogoliubovPropagator) -> f64 {
        (self.matrix() - other.matrix()).amax()
    }
}

/// Quadrature action of `a -> c a`: `[[Re c, -Im c], [Im c, Re c]]`.
fn annihilation_block(c: Complex64) -> [[f64; 2]; 2] {
    [[c.re, -c.im], [c.im, c.re]]
}

/// Quadrature action of `a -> c b†`: `[[Re c, Im c], [Im c, -Re c]]`.
fn creation_block(c: Complex64) -> [[f64; 2]; 2] {
    [[c.re, c.im], [c.im, -c.re]]
}

/// Propagator from the crystal entrance to depth `z`.
pub fn build_propagator_at(config: &PdcConfig, z: f64) -> BogoliubovPropagator {
    let layout = config.layout();
    let dim = layout.dim();
    let sides = 2 * config.n_pairs;
    let g = config.gain_factor();
    let f = propagator_functions(config, z);

    let diag = annihilation_block(f.u);
    let cross = creation_block(f.v / g);
    let spill = annihilation_block((f.u - 1.0) / sides as f64);

    let mut m = DMatrix::zeros(dim, dim);
    let mut put = |mode_out: usize, mode_in: usize, block: &[[f64; 2]; 2]| {
        for (a, row) in block.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                m[(2 * mode_out + a, 2 * mode_in + b)] += v;
            }
        }
    };
    put(0, 0, &diag);
    for k in 1..=sides {
        put(0, k, &cross);
        put(k, 0, &cross);
        put(k, k, &[[1.0, 0.0], [0.0, 1.0]]);
        for j in 1..=sides {
            put(k, j, &spill);
        }
    }
    BogoliubovPropagator::new(SymplecticMatrix::from_trusted(m), layout)
}

/// Propagator across the whole crystal, `z = ℓ`.
pub fn build_propagator(config: &PdcConfig) -> BogoliubovPropagator {
    build_propagator_at(config, config.length)
}

/// Output covariance matrix for vacuum input.
pub fn output_covariance(config: &PdcConfig) -> CovarianceMatrix {
    build_propagator(config).apply_to_vacuum()
}

/// Whether `σ` is invariant under every `+k <-> -k` side-mode swap.
pub fn bisymmetry_check(sigma: &CovarianceMatrix) -> Result<bool> {
    bisymmetry_check_matrix(sigma.matrix())
}

/// [`bisymmetry_check`] on a raw square matrix, which need not be symmetric.
pub fn bisymmetry_check_matrix(m: &DMatrix<f64>) -> Result<bool> {
    if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) {
        return Err(invalid("bisymmetry needs a square even-dimensional matrix"));
    }
    let n = m.nrows() / 2;
    if n < 3 || n.is_multiple_of(2) {
        return Err(invalid(format!(
            "bisymmetry needs a central mode plus side-mode pairs, got {n} modes"
        )));
    }
    let partner = |slot: usize| {
        let mode = slot / 2;
        let swapped = match mode {
            0 => 0,
            m if m % 2 == 1 => m + 1,
            m => m - 1,
        };
        2 * swapped + slot % 2
    };
    let tol = 1e-12 * m.amax().max(1.0);
    let dim = m.nrows();
    for i in 0..dim {
        for j in 0..dim {
            if (m[(partner(i), partner(j))] - m[(i, j)]).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
