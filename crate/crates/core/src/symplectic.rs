//! Real-quadrature linear algebra for Gaussian states.
//!
//! Quadratures are stored interleaved (`x_0, p_0, x_1, p_1, ...`) with the
//! vacuum normalised to unit variance, so the vacuum covariance matrix is the
//! identity. Every value here is immutable once built.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Allowed `|σ_ij - σ_ji|`, scaled by `max(1, max|σ|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Elementwise bound on `SᵀΩS - Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Slack below 1 tolerated on symplectic eigenvalues of a physical state.
pub const PHYSICAL_TOL: f64 = 1e-10;
/// Maximum mismatch between the `+ν` and `-ν` members of an eigenvalue pair.
pub const PAIRING_TOL: f64 = 1e-8;

/// Mapping from mode index to its pair of quadrature slots.
///
/// Mode `m` occupies slots `(2m, 2m + 1)`. For the down-conversion geometry,
/// mode 0 is the central mode and modes `1..=2N` are the side modes in the
/// order `+1, -1, +2, -2, ..., +N, -N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    n_modes: usize,
}

impl ModeLayout {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(invalid("a mode layout needs at least one mode"));
        }
        Ok(Self { n_modes })
    }

    /// Layout of the central mode plus `2 * n_pairs` side modes.
    pub fn pdc(n_pairs: usize) -> Result<Self> {
        if n_pairs == 0 {
            return Err(invalid("n_pairs must be at least 1"));
        }
        Self::new(2 * n_pairs + 1)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Length of the quadrature vector.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn x_slot(&self, mode: usize) -> usize {
        2 * mode
    }

    pub fn p_slot(&self, mode: usize) -> usize {
        2 * mode + 1
    }

    /// Physical label of a mode: `0`, `+1`, `-1`, `+2`, ...
    pub fn label(&self, mode: usize) -> String {
        if mode == 0 {
            "0".to_string()
        } else {
            let k = mode.div_ceil(2);
            if mode % 2 == 1 {
                format!("+{k}")
            } else {
                format!("-{k}")
            }
        }
    }

    /// Label of every quadrature slot in order, e.g. `x0, p0, x+1, p+1, ...`.
    pub fn quadrature_labels(&self) -> Vec<String> {
        (0..self.n_modes)
            .flat_map(|m| {
                let l = self.label(m);
                [format!("x{l}"), format!("p{l}")]
            })
            .collect()
    }

    pub fn concat(&self, other: &ModeLayout) -> ModeLayout {
        ModeLayout {
            n_modes: self.n_modes + other.n_modes,
        }
    }
}

/// The canonical form Ω: one `[[0, 1], [-1, 0]]` block per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        let mut omega = DMatrix::zeros(dim, dim);
        for m in 0..n_modes {
            omega[(2 * m, 2 * m + 1)] = 1.0;
            omega[(2 * m + 1, 2 * m)] = -1.0;
        }
        Self { omega }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.omega
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_square_even(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(invalid(format!(
            "quadrature matrices need a positive even dimension, got {}",
            m.nrows()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix contains non-finite entries"));
    }
    Ok(m.nrows() / 2)
}

/// Symmetrised second moments of the quadratures of a zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
    layout: ModeLayout,
}

impl CovarianceMatrix {
    /// Wraps a symmetric, even-dimensional matrix. Physicality is not
    /// required here (partial transposes are not physical); use [`validate`].
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        let n_modes = check_square_even(&sigma)?;
        let defect = symmetry_defect(&sigma);
        if defect > SYMMETRY_TOL * max_abs(&sigma).max(1.0) {
            return Err(invalid(format!(
                "covariance matrix is not symmetric (defect {defect:e})"
            )));
        }
        Ok(Self {
            sigma: symmetrized(sigma),
            layout: ModeLayout { n_modes },
        })
    }

    /// Builds from a product that is symmetric up to rounding.
    pub(crate) fn from_trusted(sigma: DMatrix<f64>) -> Self {
        let n_modes = sigma.nrows() / 2;
        Self {
            sigma: symmetrized(sigma),
            layout: ModeLayout { n_modes },
        }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            sigma: DMatrix::identity(2 * n_modes, 2 * n_modes),
            layout: ModeLayout { n_modes },
        }
    }

    /// Two-mode squeezed vacuum with squeezing `r`:
    /// `[[cosh 2r · I, sinh 2r · Z], [sinh 2r · Z, cosh 2r · I]]`, `Z = diag(1, -1)`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        #[rustfmt::skip]
        let sigma = DMatrix::from_row_slice(4, 4, &[
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        ]);
        Self {
            sigma,
            layout: ModeLayout { n_modes: 2 },
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.sigma
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma[(i, j)]
    }

    /// Variance of the linear combination `w · ξ` (zero means assumed).
    pub fn quadratic_form(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: weights.len(),
            });
        }
        let mut acc = 0.0;
        for (i, wi) in weights.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            for (j, wj) in weights.iter().enumerate() {
                acc += wi * self.sigma[(i, j)] * wj;
            }
        }
        Ok(acc)
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(max_abs(&(&self.sigma - &other.sigma)))
    }
}

impl fmt::Display for CovarianceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sigma)
    }
}

/// A real matrix preserving the symplectic form, `SᵀΩS = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    s: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(s, SYMPLECTIC_TOL)
    }

    /// Accepts `s` if `max|SᵀΩS - Ω| <= tol`.
    pub fn with_tolerance(s: DMatrix<f64>, tol: f64) -> Result<Self> {
        check_square_even(&s)?;
        let residual = symplectic_residual(&s);
        if residual > tol {
            return Err(invalid(format!(
                "matrix is not symplectic: max |SᵀΩS - Ω| = {residual:e} > {tol:e}"
            )));
        }
        Ok(Self { s })
    }

    pub(crate) fn from_trusted(s: DMatrix<f64>) -> Self {
        Self { s }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            s: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Phase-space rotation of one mode by `theta`.
    pub fn phase_rotation(n_modes: usize, mode: usize, theta: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (sin, cos) = theta.sin_cos();
        let (x, p) = (2 * mode, 2 * mode + 1);
        s[(x, x)] = cos;
        s[(x, p)] = -sin;
        s[(p, x)] = sin;
        s[(p, p)] = cos;
        Ok(Self { s })
    }

    /// Single-mode squeezer: `x -> e^{-r} x`, `p -> e^{r} p`.
    pub fn single_mode_squeezer(n_modes: usize, mode: usize, r: f64) -> Result<Self> {
        check_mode(n_modes, mode)?;
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        s[(2 * mode, 2 * mode)] = (-r).exp();
        s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
        Ok(Self { s })
    }

    /// Beamsplitter of angle `theta` between modes `i` and `j`.
    pub fn beamsplitter(n_modes: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        check_mode_pair(n_modes, i, j)?;
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (sin, cos) = theta.sin_cos();
        for q in 0..2 {
            let (a, b) = (2 * i + q, 2 * j + q);
            s[(a, a)] = cos;
            s[(a, b)] = sin;
            s[(b, a)] = -sin;
            s[(b, b)] = cos;
        }
        Ok(Self { s })
    }

    /// Two-mode squeezer acting on vacuum to give [`CovarianceMatrix::two_mode_squeezed`].
    pub fn two_mode_squeezer(n_modes: usize, i: usize, j: usize, r: f64) -> Result<Self> {
        check_mode_pair(n_modes, i, j)?;
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (c, sh) = (r.cosh(), r.sinh());
        for (a, b) in [(i, j), (j, i)] {
            s[(2 * a, 2 * a)] = c;
            s[(2 * a + 1, 2 * a + 1)] = c;
            s[(2 * a, 2 * b)] = sh;
            s[(2 * a + 1, 2 * b + 1)] = -sh;
        }
        Ok(Self { s })
    }

    /// Passive mixing `O ⊗ I₂` for a real orthogonal mode matrix `O`.
    pub fn passive(mode_mix: &DMatrix<f64>) -> Result<Self> {
        let n = mode_mix.nrows();
        if n == 0 || mode_mix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mode_mix.ncols(),
            });
        }
        let defect = max_abs(&(mode_mix.transpose() * mode_mix - DMatrix::identity(n, n)));
        if defect > SYMPLECTIC_TOL {
            return Err(invalid(format!(
                "mode-mixing matrix is not orthogonal (defect {defect:e})"
            )));
        }
        let s = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            if r % 2 == c % 2 {
                mode_mix[(r / 2, c / 2)]
            } else {
                0.0
            }
        });
        Ok(Self { s })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s
    }

    pub fn n_modes(&self) -> usize {
        self.s.nrows() / 2
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.s.nrows() != other.s.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.s.nrows(),
                found: other.s.nrows(),
            });
        }
        Ok(Self {
            s: &self.s * &other.s,
        })
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        Self {
            s: self.s.transpose(),
        }
    }

    /// Block-diagonal sum of two symplectic maps.
    pub fn direct_sum(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        Self {
            s: block_diagonal(&self.s, &other.s),
        }
    }

    /// `max|SᵀΩS - Ω|`.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.s)
    }
}

fn check_mode(n_modes: usize, mode: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(invalid(format!(
            "mode {mode} out of range for {n_modes} modes"
        )));
    }
    Ok(())
}

fn check_mode_pair(n_modes: usize, i: usize, j: usize) -> Result<()> {
    check_mode(n_modes, i)?;
    check_mode(n_modes, j)?;
    if i == j {
        return Err(invalid("a two-mode operation needs two distinct modes"));
    }
    Ok(())
}

/// `max|MᵀΩM - Ω|` for a square even-dimensional `m`.
pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let omega = SymplecticForm::new(m.nrows() / 2).into_matrix();
    max_abs(&(m.transpose() * &omega * m - omega))
}

fn block_diagonal(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

/// Returns `Sᵀ σ S`.
pub fn congruence(sigma: &CovarianceMatrix, s: &SymplecticMatrix) -> Result<CovarianceMatrix> {
    if sigma.dim() != s.s.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: s.s.nrows(),
        });
    }
    let out = s.s.transpose() * &sigma.sigma * &s.s;
    Ok(CovarianceMatrix::from_trusted(out))
}

/// Symplectic spectrum of `σ` in descending order.
///
/// With the Cholesky factor `σ = LLᵀ`, the spectrum of `iΩσ` equals that of
/// `i LᵀΩL`. The real antisymmetric `LᵀΩL` has singular values `ν_k`, each
/// appearing twice, and each pair is collapsed to one value.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = sigma.n_modes();
    let chol = sigma
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| invalid("covariance matrix is not positive definite"))?;
    let l = chol.l();
    let omega = SymplecticForm::new(n).into_matrix();
    let k = l.transpose() * omega * &l;
    let k = (&k - k.transpose()) * 0.5;

    let mut values: Vec<f64> = k
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));

    let mut nus = Vec::with_capacity(n);
    for pair in values.chunks(2) {
        let (hi, lo) = (pair[0], pair[1]);
        if lo.is_nan() || lo <= 0.0 || hi - lo > PAIRING_TOL * hi.max(1.0) {
            return Err(Error::NumericalDegeneracy(format!(
                "singular values of LᵀΩL do not pair up: {hi:e} vs {lo:e}"
            )));
        }
        nus.push(0.5 * (hi + lo));
    }
    Ok(nus)
}

/// Flips the sign of the momentum quadratures of `modes`.
pub fn partial_transpose(sigma: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    let n = sigma.n_modes();
    let selected: BTreeSet<usize> = modes.iter().copied().collect();
    if selected.is_empty() {
        return Err(invalid("partial transpose needs at least one mode"));
    }
    if let Some(&bad) = selected.iter().find(|&&m| m >= n) {
        return Err(invalid(format!("mode {bad} out of range for {n} modes")));
    }
    if selected.len() == n {
        return Err(invalid(
            "partial transpose over every mode does not define a bipartition",
        ));
    }
    let sign = |slot: usize| {
        if slot % 2 == 1 && selected.contains(&(slot / 2)) {
            -1.0
        } else {
            1.0
        }
    };
    let out = DMatrix::from_fn(sigma.dim(), sigma.dim(), |i, j| {
        sign(i) * sign(j) * sigma.sigma[(i, j)]
    });
    Ok(CovarianceMatrix {
        sigma: out,
        layout: sigma.layout,
    })
}

/// Block-diagonal concatenation `a ⊕ b`.
pub fn direct_sum(a: &CovarianceMatrix, b: &CovarianceMatrix) -> CovarianceMatrix {
    CovarianceMatrix {
        sigma: block_diagonal(&a.sigma, &b.sigma),
        layout: a.layout.concat(&b.layout),
    }
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validity {
    pub symmetric: bool,
    pub physical: bool,
    /// `None` when the spectrum could not be computed.
    pub min_symplectic_eigenvalue: Option<f64>,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        self.symmetric && self.physical
    }
}

/// Checks symmetry and the uncertainty principle `σ + iΩ ⪰ 0` of a raw matrix.
pub fn validate_matrix(sigma: &DMatrix<f64>) -> Result<Validity> {
    check_square_even(sigma)?;
    let symmetric = symmetry_defect(sigma) <= SYMMETRY_TOL * max_abs(sigma).max(1.0);
    if !symmetric {
        return Ok(Validity {
            symmetric,
            physical: false,
            min_symplectic_eigenvalue: None,
        });
    }
    let cov = CovarianceMatrix::from_trusted(sigma.clone());
    let min_nu = symplectic_eigenvalues(&cov)
        .ok()
        .and_then(|nus| nus.last().copied());
    Ok(Validity {
        symmetric,
        physical: min_nu.is_some_and(|nu| nu >= 1.0 - PHYSICAL_TOL),
        min_symplectic_eigenvalue: min_nu,
    })
}

/// Validity verdict for a covariance matrix. Never fails.
pub fn validate(sigma: &CovarianceMatrix) -> Validity {
    validate_matrix(&sigma.sigma).expect("covariance matrices are square and even")
}
