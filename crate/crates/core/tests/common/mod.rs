#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use tiltpump::{CovarianceMatrix, SymplecticForm, SymplecticMatrix};

/// One elementary symplectic operation: (kind, mode i, mode j, parameter).
pub type Gate = (u8, usize, usize, f64);

pub fn gates(max_len: usize) -> impl Strategy<Value = Vec<Gate>> {
    prop::collection::vec((0u8..4, 0usize..64, 0usize..64, -0.6f64..0.6), 1..=max_len)
}

/// Product of elementary maps on `n_modes` modes.
pub fn random_symplectic(n_modes: usize, gates: &[Gate]) -> SymplecticMatrix {
    let mut s = SymplecticMatrix::identity(n_modes);
    for &(kind, i, j, t) in gates {
        let i = i % n_modes;
        let j = if n_modes > 1 {
            let j = j % (n_modes - 1);
            if j >= i {
                j + 1
            } else {
                j
            }
        } else {
            i
        };
        let g = match kind {
            0 => SymplecticMatrix::phase_rotation(n_modes, i, 5.0 * t),
            1 => SymplecticMatrix::single_mode_squeezer(n_modes, i, t),
            2 if n_modes > 1 => SymplecticMatrix::beamsplitter(n_modes, i, j, 5.0 * t),
            3 if n_modes > 1 => SymplecticMatrix::two_mode_squeezer(n_modes, i, j, t),
            _ => SymplecticMatrix::single_mode_squeezer(n_modes, i, -t),
        }
        .unwrap();
        s = s.compose(&g).unwrap();
    }
    s
}

/// `S diag(ν_k, ν_k) Sᵀ`, whose symplectic spectrum is exactly `nus`.
pub fn thermal_state(s: &SymplecticMatrix, nus: &[f64]) -> CovarianceMatrix {
    let diag = DMatrix::from_fn(2 * nus.len(), 2 * nus.len(), |r, c| {
        if r == c {
            nus[r / 2]
        } else {
            0.0
        }
    });
    let m = s.matrix();
    let sigma = m * diag * m.transpose();
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    CovarianceMatrix::new(sigma).unwrap()
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * max_abs(&a).max(1.0) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Independent route to the symplectic spectrum: `ν²` are the eigenvalues of
/// the symmetric matrix `-(σ^½ Ω σ^½)²`, with `σ^½` and both spectra taken
/// from Jacobi sweeps.
pub fn oracle_spectrum(sigma: &CovarianceMatrix) -> Vec<f64> {
    let (vals, vecs) = jacobi_eigen(sigma.matrix());
    let root_diag = DMatrix::from_fn(vals.len(), vals.len(), |r, c| {
        if r == c {
            vals[r].sqrt()
        } else {
            0.0
        }
    });
    let root = &vecs * root_diag * vecs.transpose();
    let omega = SymplecticForm::new(sigma.n_modes()).into_matrix();
    let k = &root * omega * &root;
    let sq = -(&k * &k);
    let sq = (&sq + sq.transpose()) * 0.5;
    let nu_sq = sorted_desc(jacobi_eigen(&sq).0);
    nu_sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).sqrt())
        .collect()
}

pub fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
