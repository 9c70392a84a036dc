//! Functions on `[q]^N`, their Fourier expansion in a tensor basis with
//! constant first vector, influences and noise stability.
//!
//! Points are stored little-endian: coordinate 0 is the least significant
//! digit of the table index.

use rand::Rng;
use serde::Serialize;

use super::markov::{beckner, MarkovOperator};
use crate::{Error, Result};

/// Largest table (points) accepted.
pub const MAX_TABLE_POINTS: usize = 1_000_000;

const SIMPLEX_TOL: f64 = 1e-12;

/// `q^n`, or an error when it exceeds [`MAX_TABLE_POINTS`].
pub fn table_points(q: usize, n: usize) -> Result<usize> {
    let mut size = 1usize;
    for _ in 0..n {
        size = size
            .checked_mul(q)
            .filter(|&s| s <= MAX_TABLE_POINTS)
            .ok_or_else(|| Error::InvalidTable(format!("q^N = {q}^{n} exceeds {MAX_TABLE_POINTS}")))?;
    }
    Ok(size)
}

/// Explicit table of `f : [q]^N → R^r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedFunction {
    q: usize,
    n: usize,
    r: usize,
    /// `values[point * r + component]`.
    values: Vec<f64>,
}

impl TabulatedFunction {
    pub fn new(q: usize, n: usize, r: usize, values: Vec<f64>) -> Result<Self> {
        if q < 2 || r == 0 {
            return Err(Error::InvalidTable(format!("need q >= 2 and r >= 1, got q={q}, r={r}")));
        }
        let points = table_points(q, n)?;
        if values.len() != points * r {
            return Err(Error::InvalidTable(format!(
                "expected {} values, got {}",
                points * r,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite table entry".into()));
        }
        Ok(TabulatedFunction { q, n, r, values })
    }

    pub fn scalar(q: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(q, n, 1, values)
    }

    /// Scalar table from a closure over coordinates.
    pub fn from_fn(q: usize, n: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let points = table_points(q, n)?;
        let mut x = vec![0; n];
        let values = (0..points)
            .map(|p| {
                decode_point(p, q, &mut x);
                f(&x)
            })
            .collect();
        Self::scalar(q, n, values)
    }

    /// Simplex-valued table `x ↦ e_{c(x)}` of a coloring `c : [q]^N → [r]`
    /// (colors 0-based here).
    pub fn from_coloring(q: usize, n: usize, r: usize, c: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let points = table_points(q, n)?;
        let mut values = vec![0.0; points * r];
        let mut x = vec![0; n];
        for p in 0..points {
            decode_point(p, q, &mut x);
            let color = c(&x);
            if color >= r {
                return Err(Error::InvalidTable(format!("color {color} outside [0, {r})")));
            }
            values[p * r + color] = 1.0;
        }
        Self::new(q, n, r, values)
    }

    pub fn random_scalar(q: usize, n: usize, rng: &mut impl Rng) -> Result<Self> {
        let points = table_points(q, n)?;
        Self::scalar(q, n, (0..points).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    /// Random point of the simplex at every input (normalised uniforms).
    pub fn random_simplex(q: usize, n: usize, r: usize, rng: &mut impl Rng) -> Result<Self> {
        let points = table_points(q, n)?;
        let mut values = Vec::with_capacity(points * r);
        for _ in 0..points {
            let raw: Vec<f64> = (0..r).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            values.extend(raw.iter().map(|v| v / s));
        }
        Self::new(q, n, r, values)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> usize {
        self.r
    }

    pub fn points(&self) -> usize {
        self.values.len() / self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, point: usize, component: usize) -> f64 {
        self.values[point * self.r + component]
    }

    pub fn at(&self, x: &[usize], component: usize) -> f64 {
        self.value(encode_point(x, self.q), component)
    }

    /// Component `j` as a scalar table.
    pub fn component(&self, j: usize) -> TabulatedFunction {
        assert!(j < self.r, "component out of range");
        TabulatedFunction {
            q: self.q,
            n: self.n,
            r: 1,
            values: self.values.iter().skip(j).step_by(self.r).copied().collect(),
        }
    }

    pub fn is_simplex_valued(&self) -> bool {
        self.values.chunks(self.r).all(|row| {
            row.iter().all(|&v| v >= -SIMPLEX_TOL)
                && (row.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOL
        })
    }

    /// `E[f²]` summed over components.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.points() as f64
    }

    /// `⟨f, g⟩ = E[f·g]` summed over components.
    pub fn inner(&self, other: &TabulatedFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "tables differ in shape");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() / self.points() as f64
    }

    /// `f ∘ σ` in the sense `(f∘σ)(x) = f(x∘σ)` with `(x∘σ)_p = x_{σ(p)}`.
    pub fn compose(&self, sigma: &[usize]) -> Result<TabulatedFunction> {
        if sigma.len() != self.n {
            return Err(Error::InvalidParameter("permutation length differs from arity".into()));
        }
        let mut seen = vec![false; self.n];
        for &s in sigma {
            if s >= self.n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let mut x = vec![0; self.n];
        let mut y = vec![0; self.n];
        let mut values = Vec::with_capacity(self.values.len());
        for p in 0..self.points() {
            decode_point(p, self.q, &mut x);
            for (yp, &s) in y.iter_mut().zip(sigma) {
                *yp = x[s];
            }
            let src = encode_point(&y, self.q);
            values.extend_from_slice(&self.values[src * self.r..(src + 1) * self.r]);
        }
        Ok(TabulatedFunction { values, ..self.clone() })
    }
}

/// Writes the coordinates of table index `p` into `x`.
pub fn decode_point(mut p: usize, q: usize, x: &mut [usize]) {
    for xi in x.iter_mut() {
        *xi = p % q;
        p /= q;
    }
}

pub fn encode_point(x: &[usize], q: usize) -> usize {
    x.iter().rev().fold(0, |acc, &xi| acc * q + xi)
}

/// Orthonormal basis `α_0, …, α_{q-1}` of `R^q` with `α_0` constant.
#[derive(Debug, Clone, Serialize)]
pub struct FourierBasis {
    q: usize,
    /// Euclidean-orthonormal vectors; `vectors[0] = (1/√q, …)`.
    vectors: Vec<Vec<f64>>,
}

impl FourierBasis {
    /// Gram–Schmidt on `1, e_0 − 1/q, e_1 − 1/q, …` (the last is dependent
    /// and dropped).
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("basis needs q >= 2, got {q}")));
        }
        let qf = q as f64;
        let mut vectors = vec![vec![1.0 / qf.sqrt(); q]];
        for a in 0..q - 1 {
            let mut v: Vec<f64> = (0..q).map(|b| (a == b) as u8 as f64 - 1.0 / qf).collect();
            for u in &vectors {
                let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            vectors.push(v);
        }
        Ok(FourierBasis { q, vectors })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn vector(&self, a: usize) -> &[f64] {
        &self.vectors[a]
    }

    /// `χ_a(v) = √q · α_a[v]`; orthonormal under the uniform expectation.
    pub fn character(&self, a: usize, v: usize) -> f64 {
        (self.q as f64).sqrt() * self.vectors[a][v]
    }

    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate() {
                let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                worst = worst.max((d - (i == j) as u8 as f64).abs());
            }
        }
        worst
    }
}

/// Applies the `q×q` matrix `m` (row-major, `m[out*q + in]`) along one
/// coordinate of a length-`q^n` table.
fn apply_along(table: &mut [f64], q: usize, coord: usize, m: &[f64]) {
    let stride = q.pow(coord as u32);
    let block = stride * q;
    let mut buf = vec![0.0; q];
    for base in (0..table.len()).step_by(block) {
        for off in 0..stride {
            for (o, slot) in buf.iter_mut().enumerate() {
                *slot = (0..q).map(|i| m[o * q + i] * table[base + off + i * stride]).sum();
            }
            for (o, &v) in buf.iter().enumerate() {
                table[base + off + o * stride] = v;
            }
        }
    }
}

/// Coefficients `f̂(α_x) = E[f · χ_x]`, indexed like points (multi-index `x`
/// little-endian). For vector-valued tables, one table per component.
pub fn fourier(f: &TabulatedFunction, basis: &FourierBasis) -> Result<Vec<Vec<f64>>> {
    if basis.q() != f.q {
        return Err(Error::InvalidParameter("basis and table disagree on q".into()));
    }
    let q = f.q;
    let m: Vec<f64> = (0..q * q)
        .map(|idx| basis.character(idx / q, idx % q) / q as f64)
        .collect();
    Ok((0..f.r)
        .map(|j| {
            let mut t = f.component(j).values;
            for coord in 0..f.n {
                apply_along(&mut t, q, coord, &m);
            }
            t
        })
        .collect())
}

/// `|x|`, the number of non-zero entries of multi-index `x`.
pub fn level(mut index: usize, q: usize, n: usize) -> usize {
    let mut count = 0;
    for _ in 0..n {
        count += !index.is_multiple_of(q) as usize;
        index /= q;
    }
    count
}

fn digit(index: usize, q: usize, coord: usize) -> usize {
    index / q.pow(coord as u32) % q
}

#[derive(Debug, Clone, Serialize)]
pub struct Influences {
    /// `Inf_i` from the Fourier formula, summed over components.
    pub total: Vec<f64>,
    /// `Inf_i` as expected conditional variance.
    pub total_variance: Vec<f64>,
    /// `Inf_i^{≤t}`.
    pub low: Vec<f64>,
    pub t: usize,
}

impl Influences {
    pub fn max_route_gap(&self) -> f64 {
        self.total
            .iter()
            .zip(&self.total_variance)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn low_sum(&self) -> f64 {
        self.low.iter().sum()
    }
}

/// `Inf_i(f) = E[Var(f | x_{-i})]`, summed over components.
pub fn influence_variance(f: &TabulatedFunction) -> Vec<f64> {
    let q = f.q;
    let points = f.points();
    (0..f.n)
        .map(|coord| {
            let stride = q.pow(coord as u32);
            let mut acc = 0.0;
            for p in (0..points).filter(|&p| digit(p, q, coord) == 0) {
                for j in 0..f.r {
                    let vals: Vec<f64> = (0..q).map(|a| f.value(p + a * stride, j)).collect();
                    let mean = vals.iter().sum::<f64>() / q as f64;
                    acc += vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / q as f64;
                }
            }
            acc / (points / q) as f64
        })
        .collect()
}

fn influences_from_coeffs(coeffs: &[Vec<f64>], q: usize, n: usize, t: usize) -> (Vec<f64>, Vec<f64>) {
    let mut total = vec![0.0; n];
    let mut low = vec![0.0; n];
    for comp in coeffs {
        for (x, &c) in comp.iter().enumerate() {
            let lvl = level(x, q, n);
            for i in (0..n).filter(|&i| digit(x, q, i) != 0) {
                total[i] += c * c;
                if lvl <= t {
                    low[i] += c * c;
                }
            }
        }
    }
    (total, low)
}

/// Influences of every coordinate, both routes, plus level-`t` influences.
pub fn influences(f: &TabulatedFunction, basis: &FourierBasis, t: usize) -> Result<Influences> {
    let coeffs = fourier(f, basis)?;
    let (total, low) = influences_from_coeffs(&coeffs, f.q, f.n, t);
    Ok(Influences {
        total,
        total_variance: influence_variance(f),
        low,
        t,
    })
}

/// `Inf_i^{≤t}` only.
pub fn low_level_influences(f: &TabulatedFunction, basis: &FourierBasis, t: usize) -> Result<Vec<f64>> {
    let coeffs = fourier(f, basis)?;
    Ok(influences_from_coeffs(&coeffs, f.q, f.n, t).1)
}

/// `(T^{⊗N} f)(x) = Σ_y Π_i T(x_i → y_i) f(y)`, one coordinate at a time.
pub fn tensor_apply(op: &MarkovOperator, f: &TabulatedFunction) -> Result<TabulatedFunction> {
    if op.dim() != f.q {
        return Err(Error::InvalidParameter(format!(
            "operator on [{}] applied to table over [{}]",
            op.dim(),
            f.q
        )));
    }
    let mut out = vec![0.0; f.values.len()];
    for j in 0..f.r {
        let mut t = f.component(j).values;
        for coord in 0..f.n {
            apply_along(&mut t, f.q, coord, op.entries());
        }
        for (p, v) in t.into_iter().enumerate() {
            out[p * f.r + j] = v;
        }
    }
    Ok(TabulatedFunction { values: out, ..f.clone() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stability {
    /// `⟨f, T_ρ^{⊗N} f⟩`.
    pub operator: f64,
    /// `Σ_x ρ^{|x|} f̂(α_x)²`.
    pub fourier: f64,
}

pub fn noise_stability(f: &TabulatedFunction, basis: &FourierBasis, rho: f64) -> Result<Stability> {
    let op = beckner(f.q, rho)?;
    let operator = f.inner(&tensor_apply(&op, f)?);
    let coeffs = fourier(f, basis)?;
    let fourier = coeffs
        .iter()
        .flat_map(|c| c.iter().enumerate())
        .map(|(x, &c)| rho.powi(level(x, f.q, f.n) as i32) * c * c)
        .sum();
    Ok(Stability { operator, fourier })
}

/// `(x_1, …, x_{2N}) ↦ (x_1 + q x_2, …)`.
pub fn bar_map(x: &[usize], q: usize) -> Result<Vec<usize>> {
    if !x.len().is_multiple_of(2) || x.iter().any(|&v| v >= q) {
        return Err(Error::InvalidParameter("bar map needs an even-length string over [q]".into()));
    }
    Ok(x.chunks(2).map(|p| p[0] + q * p[1]).collect())
}

pub fn underline_map(y: &[usize], q: usize) -> Result<Vec<usize>> {
    if y.iter().any(|&v| v >= q * q) {
        return Err(Error::InvalidParameter("underline map needs a string over [q²]".into()));
    }
    Ok(y.iter().flat_map(|&v| [v % q, v / q]).collect())
}

/// `f̄(y) = f(underline(y))` on `[q²]^N` for `f` on `[q]^{2N}`.
pub fn bar_table(f: &TabulatedFunction) -> Result<TabulatedFunction> {
    if !f.n.is_multiple_of(2) {
        return Err(Error::InvalidTable("bar needs an even arity".into()));
    }
    let (q, n) = (f.q, f.n / 2);
    let qq = q * q;
    let points = table_points(qq, n)?;
    let mut y = vec![0; n];
    let mut values = Vec::with_capacity(points * f.r);
    for p in 0..points {
        decode_point(p, qq, &mut y);
        let x = underline_map(&y, q)?;
        let src = encode_point(&x, q);
        values.extend_from_slice(&f.values[src * f.r..(src + 1) * f.r]);
    }
    TabulatedFunction::new(qq, n, f.r, values)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClaimCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `Inf_i^{≤t}(f̄)` against `Inf_{2i-1}^{≤2t}(f) + Inf_{2i}^{≤2t}(f)`;
/// `i` is the zero-based block index, so the right side uses coordinates
/// `2i` and `2i + 1`.
pub fn check_claim_infrel(f: &TabulatedFunction, i: usize, t: usize) -> Result<ClaimCheck> {
    if 2 * i + 1 >= f.n {
        return Err(Error::InvalidParameter(format!("block {i} out of range")));
    }
    let fb = bar_table(f)?;
    let lhs = low_level_influences(&fb, &FourierBasis::new(fb.q)?, t)?[i];
    let low = low_level_influences(f, &FourierBasis::new(f.q)?, 2 * t)?;
    let rhs = low[2 * i] + low[2 * i + 1];
    Ok(ClaimCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Number of colors `q` (components of `f`).
    pub colors: usize,
    /// `Σ_j ⟨f_j, T^{⊗N} f_j⟩`.
    pub stability_sum: f64,
    /// `max_i Σ_j Inf_i^{≤t}(f_j)`.
    pub max_low_influence: f64,
    /// `1/q − 2c ln q/q² − C ln ln q/q²`.
    pub reference: f64,
    pub c: f64,
    pub big_c: f64,
    pub t: usize,
}

/// Report-only comparison of a simplex-valued table against the stability
/// lower bound; `c` and `C` are free parameters.
pub fn stability_sum_report(
    f: &TabulatedFunction,
    op: &MarkovOperator,
    t: usize,
    c: f64,
    big_c: f64,
) -> Result<StabilityReport> {
    if !f.is_simplex_valued() {
        return Err(Error::InvalidTable("stability report needs a simplex-valued table".into()));
    }
    let stability_sum = f.inner(&tensor_apply(op, f)?);
    let low = low_level_influences(f, &FourierBasis::new(f.q)?, t)?;
    let q = f.r as f64;
    let reference = 1.0 / q - 2.0 * c * q.ln() / (q * q) - big_c * q.ln().ln() / (q * q);
    Ok(StabilityReport {
        colors: f.r,
        stability_sum,
        max_low_influence: low.iter().fold(0.0, |m: f64, &v| m.max(v)),
        reference,
        c,
        big_c,
        t,
    })
}
