use nalgebra::{DMatrix, SymmetricEigen};

use super::markov::MarkovOperator;
use crate::{Error, Result};

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub dim: usize,
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Eigen {
    /// `Σ_i λ_i v_i v_iᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += lambda * v[i] * v[j];
                }
            }
        }
        out
    }
}

fn symmetric_matrix(matrix: &[f64], n: usize) -> Result<DMatrix<f64>> {
    if matrix.len() != n * n {
        return Err(Error::InvalidOperator("matrix is not square".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (matrix[i * n + j] - matrix[j * n + i]).abs() > 1e-12 {
                return Err(Error::InvalidOperator(
                    "eigen-solver needs a symmetric matrix".into(),
                ));
            }
        }
    }
    Ok(DMatrix::from_row_slice(n, n, matrix))
}

/// Full eigen-decomposition of a symmetric row-major matrix.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<Eigen> {
    let eig = SymmetricEigen::new(symmetric_matrix(matrix, n)?);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    Ok(Eigen {
        dim: n,
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect(),
    })
}

/// Eigenvalues only, in descending order.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = symmetric_matrix(matrix, n)?
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn eigen_operator(op: &MarkovOperator) -> Result<Eigen> {
    if !op.is_symmetric() {
        return Err(Error::InvalidOperator(
            "spectral radius needs a symmetric operator".into(),
        ));
    }
    symmetric_eigen(op.entries(), op.dim())
}

/// Largest `|λ|` after removing one copy of the top eigenvalue 1.
pub fn spectral_radius(op: &MarkovOperator) -> Result<f64> {
    if !op.is_symmetric() {
        return Err(Error::InvalidOperator(
            "spectral radius needs a symmetric operator".into(),
        ));
    }
    let values = symmetric_eigenvalues(op.entries(), op.dim())?;
    Ok(values[1..].iter().fold(0.0_f64, |m, l| m.max(l.abs())))
}

/// Second route to the spectral radius: power iteration on `T²` restricted
/// to the complement of the constant vector, returning `sqrt(λ_1(T²))`.
pub fn spectral_radius_power(op: &MarkovOperator, max_iter: usize) -> f64 {
    let n = op.dim();
    if n == 1 {
        return 0.0;
    }
    let project = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        norm
    };
    // fixed irrational-ish start so the run is reproducible and generic
    let mut v: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.754_877_666).fract() - 0.5).collect();
    project(&mut v);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let mut w = op.apply(&op.apply(&v));
        let rayleigh: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        if project(&mut w) == 0.0 {
            return 0.0;
        }
        v = w;
        if (rayleigh - estimate).abs() < 1e-15 {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    estimate.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::markov::{beckner, dmr_operator};

    #[test]
    fn beckner_spectrum() {
        for q in 2..=6 {
            for rho in [0.0, 0.3, 0.9, -0.2] {
                let Ok(t) = beckner(q, rho) else { continue };
                let eig = eigen_operator(&t).unwrap();
                assert!((eig.values[0] - 1.0).abs() < 1e-10);
                if rho >= 0.0 {
                    assert!((spectral_radius(&t).unwrap() - rho).abs() < 1e-10);
                }
                for l in &eig.values[1..] {
                    assert!((l - rho).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_radius() {
        let id = MarkovOperator::identity(5).unwrap();
        assert_eq!(spectral_radius(&id).unwrap(), 1.0);
    }

    #[test]
    fn reconstruction() {
        let t = dmr_operator(6).unwrap();
        let eig = eigen_operator(&t).unwrap();
        let back = eig.reconstruct();
        for (a, b) in back.iter().zip(t.entries()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = [0.5, 0.5, 0.2, 0.8];
        assert!(symmetric_eigen(&m, 2).is_err());
        let t = MarkovOperator::new(2, m.to_vec(), false).unwrap();
        assert!(spectral_radius(&t).is_err());
    }

    #[test]
    fn power_matches_eigen() {
        for q in [6, 8] {
            let t = dmr_operator(q).unwrap();
            let a = spectral_radius(&t).unwrap();
            let b = spectral_radius_power(&t, 20_000);
            assert!((a - b).abs() < 1e-6, "q={q}: {a} vs {b}");
        }
    }
}
