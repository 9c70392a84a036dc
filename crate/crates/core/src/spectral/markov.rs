use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Dense row-stochastic matrix on `[dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovOperator {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
    symmetric: bool,
}

impl MarkovOperator {
    /// Validates non-negativity, unit row sums and, when `symmetric` is set,
    /// entrywise symmetry.
    pub fn new(dim: usize, entries: Vec<f64>, symmetric: bool) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidOperator(format!(
                "need {dim}x{dim} entries, got {}",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().position(|&e| !e.is_finite() || e < 0.0) {
            return Err(Error::InvalidOperator(format!(
                "entry ({}, {}) = {} is negative or not finite",
                bad / dim,
                bad % dim,
                entries[bad]
            )));
        }
        for (i, row) in entries.chunks(dim).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidOperator(format!("row {i} sums to {s}")));
            }
        }
        let op = MarkovOperator {
            dim,
            entries,
            symmetric,
        };
        if symmetric && !op.check_symmetric(STOCHASTIC_TOL) {
            return Err(Error::InvalidOperator("matrix is not symmetric".into()));
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self::new(dim, entries, true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.dim + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.entries[from * self.dim..(from + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn check_symmetric(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (i + 1..n).all(|j| (self.entry(i, j) - self.entry(j, i)).abs() <= tol))
    }

    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        let n = self.dim;
        let rows = (0..n).all(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs() <= tol);
        let cols = (0..n).all(|j| ((0..n).map(|i| self.entry(i, j)).sum::<f64>() - 1.0).abs() <= tol);
        rows && cols
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.dim).all(|i| self.entry(i, i) == 0.0)
    }

    /// `(T v)(x) = Σ_y T(x → y) v(y)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "vector length must match operator");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The matrix product `T·T`, row-major.
    pub fn square(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entry(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * self.entry(k, j);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<&[f64]> = self.entries.chunks(self.dim).collect();
        serde_json::json!({ "dim": self.dim, "symmetric": self.symmetric, "matrix": rows }).to_string()
    }
}

/// Beckner noise operator on `[q]`: keep the symbol with probability `ρ`,
/// otherwise resample uniformly.
pub fn beckner(q: usize, rho: f64) -> Result<MarkovOperator> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("beckner needs q >= 2, got {q}")));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside [-1, 1]")));
    }
    let qf = q as f64;
    let diag = 1.0 / qf + (1.0 - 1.0 / qf) * rho;
    let off = (1.0 - rho) / qf;
    if diag < -1e-15 || off < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} gives negative entries for q = {q}"
        )));
    }
    let mut entries = vec![off; q * q];
    for i in 0..q {
        entries[i * q + i] = diag;
    }
    // the row sum can drift by an ulp; renormalise the diagonal exactly
    for i in 0..q {
        let others: f64 = (0..q).filter(|&j| j != i).map(|j| entries[i * q + j]).sum();
        entries[i * q + i] = (1.0 - others).max(0.0);
    }
    MarkovOperator::new(q, entries, true)
}

/// Index of the pair `(a, b)` in `[q]²`.
pub fn pair_index(a: usize, b: usize, q: usize) -> usize {
    a + q * b
}

/// Inverse of [`pair_index`].
pub fn pair_of(index: usize, q: usize) -> (usize, usize) {
    (index % q, index / q)
}

/// Support class of a transition `x → y` of the zero-diagonal operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmrCase {
    /// Both pairs have distinct entries and the pairs are disjoint.
    Alpha,
    /// Exactly one pair is constant and it avoids the other pair.
    Beta,
    Zero,
}

pub fn dmr_case(x: (usize, usize), y: (usize, usize)) -> DmrCase {
    let (x1, x2) = x;
    let (y1, y2) = y;
    let disjoint = x1 != y1 && x1 != y2 && x2 != y1 && x2 != y2;
    match (x1 == x2, y1 == y2) {
        (false, false) if disjoint => DmrCase::Alpha,
        (true, false) if x1 != y1 && x1 != y2 => DmrCase::Beta,
        (false, true) if y1 != x1 && y1 != x2 => DmrCase::Beta,
        _ => DmrCase::Zero,
    }
}

fn check_dmr_q(q: usize) -> Result<()> {
    if q < 4 {
        return Err(Error::InvalidParameter(format!(
            "zero-diagonal operator needs q >= 4, got {q}"
        )));
    }
    Ok(())
}

/// `(α, β) = (1/((q-1)(q-3)), 1/((q-1)(q-2)))`.
pub fn dmr_alpha_beta(q: usize) -> (f64, f64) {
    let q = q as f64;
    (1.0 / ((q - 1.0) * (q - 3.0)), 1.0 / ((q - 1.0) * (q - 2.0)))
}

/// Common denominator `D = (q-1)(q-2)(q-3)` with `αD = q-2`, `βD = q-3`.
pub fn dmr_denominator(q: usize) -> u64 {
    let q = q as u64;
    (q - 1) * (q - 2) * (q - 3)
}

/// `D · T(x → y)` as an integer.
pub fn dmr_integer_weight(q: usize, x: (usize, usize), y: (usize, usize)) -> u64 {
    match dmr_case(x, y) {
        DmrCase::Alpha => q as u64 - 2,
        DmrCase::Beta => q as u64 - 3,
        DmrCase::Zero => 0,
    }
}

/// The symmetric zero-diagonal operator on `[q]²` with small spectral radius.
pub fn dmr_operator(q: usize) -> Result<MarkovOperator> {
    check_dmr_q(q)?;
    let (alpha, beta) = dmr_alpha_beta(q);
    let n = q * q;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = match dmr_case(pair_of(i, q), pair_of(j, q)) {
                DmrCase::Alpha => alpha,
                DmrCase::Beta => beta,
                DmrCase::Zero => 0.0,
            };
        }
    }
    MarkovOperator::new(n, entries, true)
}

/// Case formula for `T²(x → y)` with `l = |[q] ∖ {x1, x2, y1, y2}|`.
pub fn tsquare_closed_form(q: usize, x: (usize, usize), y: (usize, usize)) -> f64 {
    let (alpha, beta) = dmr_alpha_beta(q);
    let mut used = vec![x.0, x.1, y.0, y.1];
    used.sort_unstable();
    used.dedup();
    let l = (q - used.len()) as f64;
    match (x.0 == x.1, y.0 == y.1) {
        (true, true) => l * (l - 1.0) * beta * beta,
        (true, false) | (false, true) => l * (l - 1.0) * alpha * beta,
        (false, false) => l * (l - 1.0) * alpha * alpha + l * beta * beta,
    }
}

/// `(q-5)(q-4) / ((q-3)²(q-2)(q-1))`, the displayed lower bound on `T²`.
pub fn tsquare_lower_bound(q: usize) -> f64 {
    let q = q as f64;
    (q - 5.0) * (q - 4.0) / ((q - 3.0) * (q - 3.0) * (q - 2.0) * (q - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beckner_entries() {
        let t = beckner(3, 0.5).unwrap();
        assert!((t.entry(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.entry(0, 1) - 1.0 / 6.0).abs() < 1e-15);
        let id = beckner(4, 1.0).unwrap();
        assert_eq!(id, MarkovOperator::identity(4).unwrap());
        let flat = beckner(5, 0.0).unwrap();
        assert!(flat.entries().iter().all(|&e| (e - 0.2).abs() < 1e-15));
        assert!(beckner(3, -0.6).is_err());
        assert!(beckner(3, -0.5).is_ok());
    }

    #[test]
    fn dmr_small_facts() {
        let (a, b) = dmr_alpha_beta(6);
        assert!((a - 1.0 / 15.0).abs() < 1e-15 && (b - 1.0 / 20.0).abs() < 1e-15);
        assert_eq!(dmr_denominator(6), 60);
        assert!(dmr_operator(3).is_err());
        for q in 4..=10 {
            let t = dmr_operator(q).unwrap();
            assert!(t.is_doubly_stochastic(1e-12));
            assert!(t.has_zero_diagonal());
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(t.entry(pair_index(a, a, q), pair_index(b, b, q)), 0.0);
                }
            }
        }
    }

    #[test]
    fn integer_weights_scale_entries() {
        let q = 7;
        let t = dmr_operator(q).unwrap();
        let d = dmr_denominator(q) as f64;
        for i in 0..q * q {
            for j in 0..q * q {
                let w = dmr_integer_weight(q, pair_of(i, q), pair_of(j, q)) as f64;
                assert!((w / d - t.entry(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tsquare_example() {
        let v = tsquare_closed_form(6, (0, 0), (1, 1));
        assert!((v - 3.0 / 100.0).abs() < 1e-15);
        let t = dmr_operator(6).unwrap();
        let sq = t.square();
        assert!((sq[pair_index(0, 0, 6) * 36 + pair_index(1, 1, 6)] - v).abs() < 1e-15);
    }

    #[test]
    fn pair_roundtrip() {
        for i in 0..25 {
            let (a, b) = pair_of(i, 5);
            assert_eq!(pair_index(a, b, 5), i);
        }
        assert_eq!(pair_of(7, 3), (1, 2));
    }
}
