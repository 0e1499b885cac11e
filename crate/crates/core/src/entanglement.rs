//! Entanglement diagnostics: the three-mode combination witness, PPT-based
//! logarithmic negativity and localization of the output onto two modes.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::pdc::{output_covariance, squeezing_parameter, PdcConfig};
use crate::symplectic::{
    congruence, direct_sum, partial_transpose, symplectic_eigenvalues, CovarianceMatrix,
    SymplecticMatrix,
};

/// Bound below which the witness certifies genuine tripartite entanglement.
pub const WITNESS_THRESHOLD: f64 = 0.5;

/// Partially transposed eigenvalues within this distance below 1 are
/// treated as rounding noise and do not contribute to the negativity.
pub const NEGATIVITY_NOISE_FLOOR: f64 = 1e-12;

/// Maximum deviation of a localized state from the ideal two-mode block.
pub const LOCALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessResult {
    pub c_value: f64,
    pub threshold: f64,
    pub genuine_tripartite: bool,
}

fn check_three_modes(sigma: &CovarianceMatrix) -> Result<()> {
    if sigma.n_modes() != 3 {
        return Err(invalid(format!(
            "the tripartite witness is defined for 3 modes, got {}",
            sigma.n_modes()
        )));
    }
    Ok(())
}

/// `C = Var(x0 - (x+ + x-)/√2) + Var(p0 + (p+ + p-)/√2)`.
pub fn tripartite_witness(sigma: &CovarianceMatrix) -> Result<WitnessResult> {
    check_three_modes(sigma)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x_weights = [1.0, 0.0, -h, 0.0, -h, 0.0];
    let p_weights = [0.0, 1.0, 0.0, h, 0.0, h];
    let c_value = sigma.quadratic_form(&x_weights)? + sigma.quadratic_form(&p_weights)?;
    Ok(WitnessResult {
        c_value,
        threshold: WITNESS_THRESHOLD,
        genuine_tripartite: c_value < WITNESS_THRESHOLD,
    })
}

/// Smallest `αλℓ` for which the phase-matched three-mode witness fires:
/// `(3 ln 2) / (2√2)`.
pub fn threshold_coupling() -> f64 {
    3.0 * std::f64::consts::LN_2 / (2.0 * std::f64::consts::SQRT_2)
}

/// Squeezing parameter at the witness threshold, `(3/2) ln 2`.
pub fn threshold_squeezing() -> f64 {
    1.5 * std::f64::consts::LN_2
}

/// Split of the modes into two nonempty complementary sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl Bipartition {
    /// `side_a` and its complement in `0..n_modes`.
    pub fn new(side_a: impl IntoIterator<Item = usize>, n_modes: usize) -> Result<Self> {
        let a: BTreeSet<usize> = side_a.into_iter().collect();
        let b: BTreeSet<usize> = (0..n_modes).filter(|m| !a.contains(m)).collect();
        Self::from_sets(a, b, n_modes)
    }

    pub fn from_sides(side_a: &[usize], side_b: &[usize], n_modes: usize) -> Result<Self> {
        let a: BTreeSet<usize> = side_a.iter().copied().collect();
        let b: BTreeSet<usize> = side_b.iter().copied().collect();
        if a.len() != side_a.len() || b.len() != side_b.len() {
            return Err(invalid("bipartition lists a mode twice"));
        }
        if !a.is_disjoint(&b) {
            return Err(invalid("bipartition sides overlap"));
        }
        if a.len() + b.len() != n_modes {
            return Err(invalid(format!(
                "bipartition must cover all {n_modes} modes"
            )));
        }
        Self::from_sets(a, b, n_modes)
    }

    /// Parses `"0|1,2"`: pipe between sides, commas between mode indices.
    pub fn parse(text: &str, n_modes: usize) -> Result<Self> {
        let sides: Vec<&str> = text.split('|').collect();
        if sides.len() != 2 {
            return Err(invalid(format!(
                "bipartition `{text}` must have exactly two sides separated by `|`"
            )));
        }
        let parse_side = |side: &str| -> Result<Vec<usize>> {
            side.split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|_| {
                        invalid(format!("bipartition `{text}` has a bad mode index `{t}`"))
                    })
                })
                .collect()
        };
        Self::from_sides(&parse_side(sides[0])?, &parse_side(sides[1])?, n_modes)
    }

    fn from_sets(a: BTreeSet<usize>, b: BTreeSet<usize>, n_modes: usize) -> Result<Self> {
        if let Some(m) = a.iter().chain(&b).find(|&&m| m >= n_modes) {
            return Err(invalid(format!(
                "mode {m} out of range for {n_modes} modes"
            )));
        }
        if a.is_empty() || b.is_empty() {
            return Err(invalid("both sides of a bipartition must be nonempty"));
        }
        Ok(Self {
            side_a: a.into_iter().collect(),
            side_b: b.into_iter().collect(),
        })
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn n_modes(&self) -> usize {
        self.side_a.len() + self.side_b.len()
    }

    fn smaller_side(&self) -> &[usize] {
        if self.side_b.len() < self.side_a.len() {
            &self.side_b
        } else {
            &self.side_a
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |side: &[usize]| {
            side.iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", join(&self.side_a), join(&self.side_b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    /// Symplectic spectrum of the partial transpose, descending.
    pub nu_tilde: Vec<f64>,
    pub log_negativity: f64,
}

impl NegativityReport {
    fn from_spectrum(nu_tilde: Vec<f64>) -> Self {
        let total: f64 = nu_tilde
            .iter()
            .filter(|&&nu| nu < 1.0 - NEGATIVITY_NOISE_FLOOR)
            .map(|nu| -nu.ln())
            .sum();
        Self {
            nu_tilde,
            log_negativity: total.max(0.0),
        }
    }

    pub fn smallest_nu_tilde(&self) -> f64 {
        *self.nu_tilde.last().expect("spectrum is never empty")
    }
}

/// Logarithmic negativity across `partition`.
pub fn log_negativity(
    sigma: &CovarianceMatrix,
    partition: &Bipartition,
) -> Result<NegativityReport> {
    if partition.n_modes() != sigma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: sigma.n_modes(),
            found: partition.n_modes(),
        });
    }
    let transposed = partial_transpose(sigma, partition.smaller_side())?;
    Ok(NegativityReport::from_spectrum(symplectic_eigenvalues(
        &transposed,
    )?))
}

/// Orthogonal `2N × 2N` side-mode basis whose first row is the uniform
/// combination. Remaining rows come from Gram-Schmidt over the standard basis.
pub fn localization_basis(n_pairs: usize) -> Result<DMatrix<f64>> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs must be at least 1"));
    }
    let sides = 2 * n_pairs;
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0 / (sides as f64).sqrt(); sides]];
    for seed in 0..sides {
        if rows.len() == sides {
            break;
        }
        let mut v: Vec<f64> = (0..sides)
            .map(|i| if i == seed { 1.0 } else { 0.0 })
            .collect();
        // two passes keep the completion orthogonal to rounding level
        for _ in 0..2 {
            for row in &rows {
                let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(row).for_each(|(vi, ri)| *vi -= dot * ri);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Ok(DMatrix::from_fn(sides, sides, |i, j| rows[i][j]))
}

/// Passive symplectic `S` with `σ' = Sᵀ σ S` putting the uniform side-mode
/// combination in mode 1 and leaving mode 0 alone.
pub fn localization_transform(n_pairs: usize) -> Result<SymplecticMatrix> {
    let basis = localization_basis(n_pairs)?;
    let sides = basis.nrows();
    let mut mix = DMatrix::identity(sides + 1, sides + 1);
    mix.view_mut((1, 1), (sides, sides))
        .copy_from(&basis.transpose());
    SymplecticMatrix::passive(&mix)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    /// Output covariance after the localization transform.
    pub covariance: CovarianceMatrix,
    /// Negativity across `{0} | rest` of the transformed state.
    pub negativity: NegativityReport,
    /// `√N · r`.
    pub effective_squeezing: f64,
    /// Deviation from `TMS(√N r) ⊕ I`; only computed when `Δ = 0`.
    pub block_deviation: Option<f64>,
}

impl LocalizationReport {
    pub fn block_verified(&self) -> Option<bool> {
        self.block_deviation.map(|d| d <= LOCALIZATION_TOL)
    }
}

/// Localizes the output of `config` onto modes 0 and 1 and reports the
/// resulting entanglement.
pub fn localize_and_report(config: &PdcConfig) -> Result<LocalizationReport> {
    let n_pairs = config.n_pairs();
    let sigma = output_covariance(config);
    let localized = congruence(&sigma, &localization_transform(n_pairs)?)?;
    let effective_squeezing = (n_pairs as f64).sqrt() * squeezing_parameter(config).value();

    let block_deviation = if config.delta() == 0.0 {
        let ideal = direct_sum(
            &CovarianceMatrix::two_mode_squeezed(effective_squeezing),
            &CovarianceMatrix::vacuum(2 * n_pairs - 1),
        );
        Some(localized.max_abs_diff(&ideal)?)
    } else {
        None
    };

    let partition = Bipartition::new([0], localized.n_modes())?;
    let negativity = log_negativity(&localized, &partition)?;
    Ok(LocalizationReport {
        covariance: localized,
        negativity,
        effective_squeezing,
        block_deviation,
    })
}
