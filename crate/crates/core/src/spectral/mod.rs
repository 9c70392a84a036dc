//! Markov noise operators, a dense symmetric eigen-solver, and Fourier
//! analysis of tabulated functions on `[q]^N`.

mod eigen;
mod fourier;
mod markov;

pub use eigen::{eigen_operator, symmetric_eigen, symmetric_eigenvalues, spectral_radius, spectral_radius_power, Eigen};
pub use fourier::{
    bar_map, bar_table, check_claim_infrel, decode_point, encode_point, fourier, influence_variance,
    influences, level, low_level_influences, noise_stability, stability_sum_report, table_points,
    tensor_apply, underline_map, ClaimCheck, FourierBasis, Influences, Stability, StabilityReport,
    TabulatedFunction, MAX_TABLE_POINTS,
};
pub use markov::{
    beckner, dmr_alpha_beta, dmr_case, dmr_denominator, dmr_integer_weight, dmr_operator, pair_index,
    pair_of, tsquare_closed_form, tsquare_lower_bound, DmrCase, MarkovOperator,
};

use serde::Serialize;

use crate::Result;

/// One row of the spectral-radius table.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusRow {
    pub q: usize,
    pub radius: f64,
    pub radius_power: f64,
    /// `4/(q-1)`.
    pub bound: f64,
    pub symmetric: bool,
    pub doubly_stochastic: bool,
    pub zero_diagonal: bool,
    /// Largest `|T·T − closed form|` over all entries.
    pub tsquare_gap: f64,
    /// Smallest `T²` entry against the displayed lower bound.
    pub tsquare_min: f64,
    pub tsquare_lower_bound: f64,
    pub pass: bool,
}

/// Measures the zero-diagonal operator for one `q`.
pub fn radius_row(q: usize) -> Result<RadiusRow> {
    let t = dmr_operator(q)?;
    let radius = spectral_radius(&t)?;
    let radius_power = spectral_radius_power(&t, 50_000);
    let sq = t.square();
    let n = q * q;
    let mut gap: f64 = 0.0;
    let mut min = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let v = sq[i * n + j];
            gap = gap.max((v - tsquare_closed_form(q, pair_of(i, q), pair_of(j, q))).abs());
            min = min.min(v);
        }
    }
    let bound = 4.0 / (q as f64 - 1.0);
    let symmetric = t.check_symmetric(1e-12);
    let doubly_stochastic = t.is_doubly_stochastic(1e-12);
    let zero_diagonal = t.has_zero_diagonal();
    let lb = tsquare_lower_bound(q);
    let pass = symmetric
        && doubly_stochastic
        && zero_diagonal
        && gap <= 1e-12
        && (q < 6 || radius <= bound + 1e-9);
    Ok(RadiusRow {
        q,
        radius,
        radius_power,
        bound,
        symmetric,
        doubly_stochastic,
        zero_diagonal,
        tsquare_gap: gap,
        tsquare_min: min,
        tsquare_lower_bound: lb,
        pass,
    })
}
