//! Lifting 3-coloring instances to k colors.
//!
//! For `k ≡ 0 (mod 3)` the source graph `G` is blown up into blocks
//! `B_u = {(u, i, j) : i < k/3, j < 3}` of `k` vertices each. Every block is
//! a clique whose edges weigh `2/3 · d_u`, and every source edge `(u, v)`
//! becomes unit edges `((u, i, j), (v, i', j))` for all `i, i'` and each `j`.
//! Other residues of `k` are handled by padding a `K`-colorable instance with
//! one or two extra vertices.
//!
//! Indices `i` and `j` are zero-based here; they correspond to `i + 1` and
//! `j + 1` in one-based notation.

use std::collections::BTreeSet;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::graph::{score, Coloring, Weight, WeightedGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorLayout {
    pub k: u32,
    pub source_vertices: usize,
    /// Degree of each source vertex (parallel edges counted).
    pub degrees: Vec<usize>,
}

impl TensorLayout {
    pub fn copies(&self) -> usize {
        self.k as usize / 3
    }

    /// Vertex id of `(u, i, j)`.
    pub fn vertex(&self, u: usize, i: usize, j: usize) -> usize {
        u * self.k as usize + i * 3 + j
    }

    /// Inverse of [`Self::vertex`].
    pub fn coordinates(&self, id: usize) -> (usize, usize, usize) {
        let k = self.k as usize;
        let (u, rest) = (id / k, id % k);
        (u, rest / 3, rest % 3)
    }

    pub fn block(&self, u: usize) -> std::ops::Range<usize> {
        let k = self.k as usize;
        u * k..(u + 1) * k
    }

    /// `Σ_u [C(k,2)·(2/3)d_u + (3/2)(k/3)²·d_u]`.
    pub fn closed_form_weight(&self) -> Weight {
        let k = self.k as i128;
        let copies = Weight::from_integer(k / 3);
        self.degrees
            .iter()
            .map(|&d| {
                let d = Weight::from_integer(d as i128);
                Weight::from_integer(k * (k - 1) / 2) * Weight::new(2, 3) * d
                    + Weight::new(3, 2) * copies * copies * d
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn check_tensor_k(k: u32) -> Result<()> {
    if k < 3 || !k.is_multiple_of(3) {
        return Err(Error::InvalidParameter(format!(
            "tensor lift needs k >= 3 divisible by 3, got {k}; pad a K = {} instance to reach k",
            (k / 3 * 3).max(3)
        )));
    }
    Ok(())
}

/// Builds the k-coloring instance `H` from a unit-weight graph `G`.
pub fn tensor_build(g: &WeightedGraph, k: u32) -> Result<(WeightedGraph, TensorLayout)> {
    check_tensor_k(k)?;
    if !g.is_unit_weight() {
        return Err(Error::InvalidGraph(
            "tensor lift needs a unit-weight graph; expand weights first".into(),
        ));
    }
    let layout = TensorLayout {
        k,
        source_vertices: g.vertex_count(),
        degrees: g.degrees(),
    };
    let copies = layout.copies();
    let mut h = WeightedGraph::new(g.vertex_count() * k as usize);
    for u in 0..g.vertex_count() {
        let w = Weight::new(2 * layout.degrees[u] as i128, 3);
        if w.is_zero() {
            continue;
        }
        let block: Vec<usize> = layout.block(u).collect();
        for (a, &p) in block.iter().enumerate() {
            for &q in &block[a + 1..] {
                h.add_edge(p, q, w)?;
            }
        }
    }
    for e in g.edges() {
        for j in 0..3 {
            for i in 0..copies {
                for i2 in 0..copies {
                    h.add_edge(layout.vertex(e.u, i, j), layout.vertex(e.v, i2, j), Weight::one())?;
                }
            }
        }
    }
    for id in 0..h.vertex_count() {
        let (u, i, j) = layout.coordinates(id);
        let base = g.label(u).map_or_else(|| u.to_string(), str::to_string);
        h.set_label(id, format!("{base}.{}.{}", i + 1, j + 1));
    }
    Ok((h, layout))
}

/// `π(x) = x mod 3 + 1` on `{1, 2, 3}`.
pub fn pi(x: u32) -> u32 {
    x % 3 + 1
}

/// `π` applied `times` times.
pub fn pi_pow(x: u32, times: usize) -> u32 {
    (0..times % 3).fold(x, |c, _| pi(c))
}

/// Lifts a 3-coloring: `(u, i, j) ↦ π^(j+1)(χ(u)) + 3i`.
pub fn encode_3_to_k(layout: &TensorLayout, chi_g: &Coloring) -> Result<Coloring> {
    if chi_g.k() != 3 || chi_g.len() != layout.source_vertices {
        return Err(Error::InvalidColoring(
            "expected a 3-coloring of the source graph".into(),
        ));
    }
    let n = layout.source_vertices * layout.k as usize;
    let colors = (0..n)
        .map(|id| {
            let (u, i, j) = layout.coordinates(id);
            pi_pow(chi_g.color(u), j + 1) + 3 * i as u32
        })
        .collect();
    Coloring::new(layout.k, colors)
}

/// Accounting attached to a k → 3 decode.
#[derive(Debug, Clone, Serialize)]
pub struct DecodeCertificate {
    /// Monochromatic pairs inside each block `B_u`.
    pub c_within: Vec<u64>,
    /// Monochromatic source-derived edges between blocks.
    pub c_between: u64,
    /// `Σ_u (2/3)d_u·C_within_u + C_between`.
    #[serde(serialize_with = "crate::graph::ser_weight")]
    pub c_total: Weight,
    /// `|Sugg_u|` per source vertex.
    pub sugg_sizes: Vec<usize>,
    /// `Σ_{uv ∈ E} Σ_j |Sugg^j_u ∩ Sugg^j_v|`.
    pub sugg_overlap: u64,
    /// Expected miscolored edges of the randomized decoder, exactly.
    #[serde(serialize_with = "crate::graph::ser_weight")]
    pub expected_miscolored: Weight,
    /// The pivot color `c` the derandomized decoder kept.
    pub chosen_pivot: u32,
    #[serde(serialize_with = "crate::graph::ser_weight")]
    pub miscolored: Weight,
    /// `C_total / k`.
    #[serde(serialize_with = "crate::graph::ser_weight")]
    pub bound: Weight,
}

/// Color sets `Sugg^j_u` for `j = 0, 1, 2`.
pub fn suggestion_sets(layout: &TensorLayout, chi_h: &Coloring, u: usize) -> [BTreeSet<u32>; 3] {
    let mut sets: [BTreeSet<u32>; 3] = Default::default();
    for i in 0..layout.copies() {
        for (j, set) in sets.iter_mut().enumerate() {
            set.insert(chi_h.color(layout.vertex(u, i, j)));
        }
    }
    sets
}

/// Decodes a k-coloring of `H` into a 3-coloring of `G`.
///
/// The randomized rule picks a pivot color `c`; a vertex whose blocks use `c`
/// takes the smallest `j` with `c ∈ Sugg^j_u`, others take a uniform color.
/// Here every pivot is tried, the uniform choices are fixed by conditional
/// expectations in vertex-id order, and the pivot with the fewest miscolored
/// edges wins (smallest pivot on ties). The result is at most the exact
/// expectation, which is at most `C_total / k`.
pub fn decode_k_to_3(
    g: &WeightedGraph,
    layout: &TensorLayout,
    chi_h: &Coloring,
) -> Result<(Coloring, DecodeCertificate)> {
    check_tensor_k(layout.k)?;
    let k = layout.k;
    if chi_h.k() != k || chi_h.len() != layout.source_vertices * k as usize {
        return Err(Error::InvalidColoring(format!(
            "expected a {k}-coloring of the lifted graph"
        )));
    }
    if g.vertex_count() != layout.source_vertices {
        return Err(Error::InvalidGraph("graph does not match layout".into()));
    }
    let n = g.vertex_count();
    let sugg: Vec<[BTreeSet<u32>; 3]> = (0..n).map(|u| suggestion_sets(layout, chi_h, u)).collect();
    let union: Vec<BTreeSet<u32>> = sugg
        .iter()
        .map(|s| s.iter().flatten().copied().collect())
        .collect();

    let c_within: Vec<u64> = (0..n)
        .map(|u| {
            let block: Vec<u32> = layout.block(u).map(|id| chi_h.color(id)).collect();
            let mut pairs = 0;
            for a in 0..block.len() {
                for b in a + 1..block.len() {
                    pairs += (block[a] == block[b]) as u64;
                }
            }
            pairs
        })
        .collect();
    let copies = layout.copies();
    let mut c_between = 0u64;
    let mut sugg_overlap = 0u64;
    for e in g.edges() {
        for j in 0..3 {
            for i in 0..copies {
                for i2 in 0..copies {
                    c_between += (chi_h.color(layout.vertex(e.u, i, j))
                        == chi_h.color(layout.vertex(e.v, i2, j))) as u64;
                }
            }
            sugg_overlap += sugg[e.u][j].intersection(&sugg[e.v][j]).count() as u64;
        }
    }
    let c_total: Weight = (0..n)
        .map(|u| Weight::new(2 * layout.degrees[u] as i128, 3) * Weight::from(c_within[u] as i128))
        .sum::<Weight>()
        + Weight::from(c_between as i128);

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    let third = Weight::new(1, 3);
    let mut expected_sum = Weight::zero();
    let mut best: Option<(u64, u32, Vec<u32>)> = None;
    for pivot in 1..=k {
        // 0 marks a vertex whose color is still uniformly random
        let mut colors: Vec<u32> = (0..n)
            .map(|u| {
                sugg[u]
                    .iter()
                    .position(|s| s.contains(&pivot))
                    .map_or(0, |j| j as u32 + 1)
            })
            .collect();
        expected_sum += g
            .edges()
            .iter()
            .map(|e| match (colors[e.u], colors[e.v]) {
                (0, _) | (_, 0) => third,
                (a, b) => Weight::from((a == b) as i128),
            })
            .sum::<Weight>();
        for u in 0..n {
            if colors[u] != 0 {
                continue;
            }
            // only decided neighbours distinguish the three choices
            let pick = (1..=3u32)
                .min_by_key(|&c| (adj[u].iter().filter(|&&v| colors[v] == c).count(), c))
                .expect("three colors");
            colors[u] = pick;
        }
        let miscolored = g.edges().iter().filter(|e| colors[e.u] == colors[e.v]).count() as u64;
        if best.as_ref().is_none_or(|(b, _, _)| miscolored < *b) {
            best = Some((miscolored, pivot, colors));
        }
    }
    let (miscolored, chosen_pivot, colors) = best.expect("k >= 3 pivots");
    let chi_g = Coloring::new(3, colors)?;
    debug_assert_eq!(
        score(g, &chi_g)?.miscolored_weight,
        Weight::from(miscolored as i128)
    );
    let cert = DecodeCertificate {
        c_within,
        c_between,
        c_total,
        sugg_sizes: union.iter().map(BTreeSet::len).collect(),
        sugg_overlap,
        expected_miscolored: expected_sum / Weight::from(k as i128),
        chosen_pivot,
        miscolored: Weight::from(miscolored as i128),
        bound: c_total / Weight::from(k as i128),
    };
    Ok((chi_g, cert))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingLayout {
    #[serde(rename = "K")]
    pub base_k: u32,
    pub k: u32,
    /// Number of added vertices, `k - K`.
    pub extra: u32,
    pub new_vertices: Vec<usize>,
    /// Edge count of the unpadded graph.
    pub base_edges: usize,
}

impl PaddingLayout {
    /// `M + 2LM/K + M(L-1)/(33K)`.
    pub fn closed_form_weight(&self) -> Weight {
        let m = Weight::from(self.base_edges as i128);
        let l = Weight::from(self.extra as i128);
        let kk = Weight::from(self.base_k as i128);
        m + Weight::from(2) * l * m / kk + m * (l - Weight::one()) / (Weight::from(33) * kk)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Adds `L = k - K ∈ {1, 2}` vertices joined to every old vertex `v` with
/// weight `d_v / K`, plus an edge of weight `M / (33K)` between the two new
/// vertices when `L = 2`.
pub fn pad_to_k(g: &WeightedGraph, base_k: u32, k: u32) -> Result<(WeightedGraph, PaddingLayout)> {
    if base_k < 3 || !base_k.is_multiple_of(3) {
        return Err(Error::InvalidParameter(format!(
            "padding starts from K divisible by 3, got {base_k}"
        )));
    }
    let extra = k.checked_sub(base_k).filter(|l| (1..=2).contains(l)).ok_or_else(|| {
        Error::InvalidParameter(format!("k - K must be 1 or 2, got k = {k}, K = {base_k}"))
    })?;
    if !g.is_unit_weight() {
        return Err(Error::InvalidGraph("padding needs a unit-weight graph".into()));
    }
    let degrees = g.degrees();
    let mut h = g.clone();
    let new_vertices: Vec<usize> = (0..extra).map(|_| h.add_vertex()).collect();
    for (i, &u) in new_vertices.iter().enumerate() {
        h.set_label(u, format!("pad{}", i + 1));
        for (v, &d) in degrees.iter().enumerate() {
            if d > 0 {
                h.add_edge(u, v, Weight::new(d as i128, base_k as i128))?;
            }
        }
    }
    let m = g.edge_count();
    if extra == 2 && m > 0 {
        h.add_edge(
            new_vertices[0],
            new_vertices[1],
            Weight::new(m as i128, 33 * base_k as i128),
        )?;
    }
    Ok((
        h,
        PaddingLayout {
            base_k,
            k,
            extra,
            new_vertices,
            base_edges: m,
        },
    ))
}

/// Extends a `K`-coloring of the base graph: the new vertices take the fresh
/// colors `K + 1, …, k`.
pub fn extend_padded_coloring(layout: &PaddingLayout, base: &Coloring) -> Result<Coloring> {
    if base.k() != layout.base_k {
        return Err(Error::InvalidColoring(format!(
            "expected a {}-coloring of the base graph",
            layout.base_k
        )));
    }
    let mut colors = base.colors().to_vec();
    colors.extend((1..=layout.extra).map(|i| layout.base_k + i));
    Coloring::new(layout.k, colors)
}

/// Replaces each edge of weight `w` by `w · s` parallel unit edges, where `s`
/// is the least common multiple of the weight denominators.
#[derive(Debug, Clone)]
pub struct Unweighted {
    pub graph: WeightedGraph,
    pub scale: i128,
}

pub fn unweight(g: &WeightedGraph, cap: u64) -> Result<Unweighted> {
    let (scale, multiplicities) = g.integer_weights();
    let total: i128 = multiplicities.iter().sum();
    if total > cap as i128 {
        return Err(Error::BudgetExceeded {
            what: "unweighted expansion",
            needed: total.to_u128().unwrap_or(u128::MAX),
            budget: cap,
        });
    }
    let mut h = WeightedGraph::new(g.vertex_count());
    for (e, &mult) in g.edges().iter().zip(&multiplicities) {
        for _ in 0..mult {
            h.add_edge(e.u, e.v, Weight::one())?;
        }
    }
    for (&v, l) in g.labels() {
        h.set_label(v, l.clone());
    }
    Ok(Unweighted { graph: h, scale })
}
