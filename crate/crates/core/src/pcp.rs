//! 2-to-1 label cover, Long Code proofs, and an exact simulator of the
//! k-coloring verifier built on the zero-diagonal operator on `[k]²`.
//!
//! Labels are zero-based. Small-side labels live in `[R]`, big-side labels
//! in `[2R]`, and block `i` of a permutation consists of positions `2i` and
//! `2i + 1`.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{
    dmr_denominator, dmr_integer_weight, low_level_influences, pair_of, table_points, FourierBasis,
    TabulatedFunction,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCoverEdge {
    pub u: usize,
    pub v: usize,
    /// `π : [2R] → [R]`.
    pub pi: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCoverInstance {
    pub u_count: usize,
    pub v_count: usize,
    /// Small-side label count; the big side has `2R` labels.
    pub r: usize,
    pub edges: Vec<LabelCoverEdge>,
}

impl LabelCoverInstance {
    pub fn validate(&self) -> Result<()> {
        if self.u_count == 0 || self.r == 0 {
            return Err(Error::InvalidLabelCover("need |U| >= 1 and R >= 1".into()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.u >= self.u_count || e.v >= self.v_count {
                return Err(Error::InvalidLabelCover(format!("edge {i} endpoint out of range")));
            }
            check_two_to_one(&e.pi, self.r)
                .map_err(|msg| Error::InvalidLabelCover(format!("edge {i}: {msg}")))?;
        }
        let degs = self.left_degrees();
        if degs.iter().any(|&d| d != degs[0]) || degs[0] == 0 {
            return Err(Error::InvalidLabelCover("instance is not left-regular".into()));
        }
        Ok(())
    }

    fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.u_count];
        for e in &self.edges {
            d[e.u] += 1;
        }
        d
    }

    pub fn degree(&self) -> usize {
        self.edges.iter().filter(|e| e.u == 0).count()
    }

    /// Edge indices at each `u`, in edge order.
    pub fn edges_at(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.u_count];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.u].push(i);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

fn check_two_to_one(pi: &[usize], r: usize) -> std::result::Result<(), String> {
    if pi.len() != 2 * r {
        return Err(format!("projection has {} entries, expected {}", pi.len(), 2 * r));
    }
    let mut count = vec![0u8; r];
    for &i in pi {
        if i >= r {
            return Err(format!("projection value {i} outside [0, {r})"));
        }
        count[i] += 1;
    }
    if count.iter().any(|&c| c != 2) {
        return Err("projection is not exactly 2-to-1".into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

impl Labeling {
    /// Edges with `π_e(ℓ(v)) = ℓ(u)`.
    pub fn satisfied(&self, inst: &LabelCoverInstance) -> usize {
        inst.edges
            .iter()
            .filter(|e| e.pi[self.v[e.v]] == self.u[e.u])
            .count()
    }

    pub fn value(&self, inst: &LabelCoverInstance) -> Ratio<u64> {
        if inst.edges.is_empty() {
            return Ratio::from_integer(1);
        }
        Ratio::new(self.satisfied(inst) as u64, inst.edges.len() as u64)
    }
}

/// Random left-regular 2-to-1 instance. Neighbours of `u` are
/// `perm[(u·d + s) mod |V|]` for `s < d`, so every `v` is covered once
/// `|U|·d ≥ |V|`. With `satisfiable`, projections are adjusted to a planted
/// labeling.
pub fn gen_label_cover(
    seed: u64,
    u_count: usize,
    v_count: usize,
    degree: usize,
    r: usize,
    satisfiable: bool,
) -> Result<(LabelCoverInstance, Option<Labeling>)> {
    if u_count == 0 || r == 0 || degree == 0 {
        return Err(Error::InvalidParameter("need |U|, R and degree all positive".into()));
    }
    if degree > v_count {
        return Err(Error::InvalidParameter(format!(
            "degree {degree} exceeds |V| = {v_count}"
        )));
    }
    if u_count * degree < v_count {
        return Err(Error::InvalidParameter(format!(
            "|U|·degree = {} cannot cover |V| = {v_count}",
            u_count * degree
        )));
    }
    let mut rng = crate::seeded_rng(seed);
    let mut perm: Vec<usize> = (0..v_count).collect();
    perm.shuffle(&mut rng);
    let planted = satisfiable.then(|| Labeling {
        u: (0..u_count).map(|_| rng.random_range(0..r)).collect(),
        v: (0..v_count).map(|_| rng.random_range(0..2 * r)).collect(),
    });
    let mut edges = Vec::with_capacity(u_count * degree);
    for u in 0..u_count {
        for s in 0..degree {
            let v = perm[(u * degree + s) % v_count];
            let mut pi: Vec<usize> = (0..2 * r).map(|p| p / 2).collect();
            pi.shuffle(&mut rng);
            if let Some(l) = &planted {
                let (lu, lv) = (l.u[u], l.v[v]);
                if pi[lv] != lu {
                    let other = pi.iter().position(|&i| i == lu).expect("2-to-1");
                    pi.swap(lv, other);
                }
            }
            edges.push(LabelCoverEdge { u, v, pi });
        }
    }
    let inst = LabelCoverInstance {
        u_count,
        v_count,
        r,
        edges,
    };
    inst.validate()?;
    Ok((inst, planted))
}

/// Canonical `σ` for a 2-to-1 projection: the sorted preimages `p0 < p1`
/// of label `i` go to positions `2i` and `2i + 1`.
pub fn canonical_sigma(pi: &[usize]) -> Result<Vec<usize>> {
    if !pi.len().is_multiple_of(2) {
        return Err(Error::InvalidLabelCover("projection has odd length".into()));
    }
    let r = pi.len() / 2;
    check_two_to_one(pi, r).map_err(Error::InvalidLabelCover)?;
    let mut sigma = vec![0; pi.len()];
    let mut filled = vec![0usize; r];
    for (p, &i) in pi.iter().enumerate() {
        sigma[p] = 2 * i + filled[i];
        filled[i] += 1;
    }
    Ok(sigma)
}

pub fn sigma_permutations(pi: &[usize], pi2: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    Ok((canonical_sigma(pi)?, canonical_sigma(pi2)?))
}

pub fn invert(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (p, &s) in sigma.iter().enumerate() {
        inv[s] = p;
    }
    inv
}

/// `π(σ⁻¹(2i)) = π(σ⁻¹(2i+1)) = π'(σ'⁻¹(2i)) = π'(σ'⁻¹(2i+1))` for all `i`.
pub fn check_pairing(pi: &[usize], sigma: &[usize], pi2: &[usize], sigma2: &[usize]) -> bool {
    let (inv, inv2) = (invert(sigma), invert(sigma2));
    (0..pi.len() / 2).all(|i| {
        let a = pi[inv[2 * i]];
        a == pi[inv[2 * i + 1]] && a == pi2[inv2[2 * i]] && a == pi2[inv2[2 * i + 1]]
    })
}

/// Coloring tables `χ_v : [k]^{2R} → {1..k}`, one per big-side vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongCodeProof {
    pub k: usize,
    /// Arity `2R`.
    pub arity: usize,
    pub tables: Vec<Vec<u32>>,
}

impl LongCodeProof {
    pub fn validate(&self) -> Result<()> {
        let size = table_points(self.k, self.arity)?;
        for (v, t) in self.tables.iter().enumerate() {
            if t.len() != size {
                return Err(Error::InvalidTable(format!("table {v} has {} entries, expected {size}", t.len())));
            }
            if t.iter().any(|&c| c == 0 || c as usize > self.k) {
                return Err(Error::InvalidTable(format!("table {v} has a color outside 1..={}", self.k)));
            }
        }
        Ok(())
    }

    /// Long Code of a labeling.
    pub fn from_labeling(inst: &LabelCoverInstance, labeling: &Labeling, k: usize) -> Result<Self> {
        let tables = labeling
            .v
            .iter()
            .map(|&l| long_code_encode(l, 2 * inst.r, k))
            .collect::<Result<_>>()?;
        Ok(LongCodeProof {
            k,
            arity: 2 * inst.r,
            tables,
        })
    }

    pub fn constant(inst: &LabelCoverInstance, k: usize, color: u32) -> Result<Self> {
        let size = table_points(k, 2 * inst.r)?;
        let proof = LongCodeProof {
            k,
            arity: 2 * inst.r,
            tables: vec![vec![color; size]; inst.v_count],
        };
        proof.validate()?;
        Ok(proof)
    }

    pub fn random(inst: &LabelCoverInstance, k: usize, rng: &mut impl Rng) -> Result<Self> {
        let size = table_points(k, 2 * inst.r)?;
        Ok(LongCodeProof {
            k,
            arity: 2 * inst.r,
            tables: (0..inst.v_count)
                .map(|_| (0..size).map(|_| rng.random_range(1..=k as u32)).collect())
                .collect(),
        })
    }

    /// Simplex form `f^v(x) = e_{χ_v(x)}`.
    pub fn simplex_table(&self, v: usize) -> Result<TabulatedFunction> {
        let t = &self.tables[v];
        let q = self.k;
        let mut values = vec![0.0; t.len() * q];
        for (p, &c) in t.iter().enumerate() {
            values[p * q + c as usize - 1] = 1.0;
        }
        TabulatedFunction::new(q, self.arity, q, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("proof serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// Dictator table `x ↦ x_label + 1` over `[k]^arity`.
pub fn long_code_encode(label: usize, arity: usize, k: usize) -> Result<Vec<u32>> {
    if label >= arity {
        return Err(Error::InvalidParameter(format!("label {label} outside [0, {arity})")));
    }
    let size = table_points(k, arity)?;
    let stride = k.pow(label as u32);
    Ok((0..size).map(|p| (p / stride % k) as u32 + 1).collect())
}

/// `x ↦ χ(x ∘ σ)` stored over the same index space.
fn composed_table(table: &[u32], sigma: &[usize], k: usize) -> Vec<u32> {
    let n = sigma.len();
    let strides: Vec<usize> = (0..n).map(|p| k.pow(p as u32)).collect();
    (0..table.len())
        .map(|idx| {
            let src: usize = sigma
                .iter()
                .enumerate()
                .map(|(p, &s)| (idx / strides[s] % k) * strides[p])
                .sum();
            table[src]
        })
        .collect()
}

fn check_verifier_inputs(inst: &LabelCoverInstance, proof: &LongCodeProof) -> Result<()> {
    inst.validate()?;
    proof.validate()?;
    if proof.k < 4 {
        return Err(Error::InvalidParameter(format!("verifier needs k >= 4, got {}", proof.k)));
    }
    if proof.arity != 2 * inst.r || proof.tables.len() != inst.v_count {
        return Err(Error::InvalidTable("proof does not match the instance".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    #[serde(serialize_with = "ser_ratio")]
    pub probability: Ratio<u128>,
    pub probability_f64: f64,
    /// Weighted verifier outcomes enumerated: `|U|·deg²·k^{2R}·D^R`.
    pub denominator: u128,
    /// Number of `(x, y)` pairs in the support, over all `(u, v, v')`.
    pub support_pairs: u128,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Integer `D·T` applied along every coordinate of a table on `[k²]^R`.
fn integer_tensor_apply(table: &mut [u128], weights: &[u64], qq: usize, arity: usize) {
    let mut buf = vec![0u128; qq];
    for coord in 0..arity {
        let stride = qq.pow(coord as u32);
        for base in (0..table.len()).step_by(stride * qq) {
            for off in 0..stride {
                for (o, slot) in buf.iter_mut().enumerate() {
                    *slot = (0..qq)
                        .map(|i| weights[o * qq + i] as u128 * table[base + off + i * stride])
                        .sum();
                }
                for (o, &v) in buf.iter().enumerate() {
                    table[base + off + o * stride] = v;
                }
            }
        }
    }
}

/// Exact acceptance probability of the verifier on `proof`.
///
/// For each `u` and each ordered pair of its edges, the rejection weight
/// `Σ_{x,y} D^R·T^{⊗R}(x→y)·[h(x) = h'(y)]` is accumulated in integers, where
/// `h = χ_v ∘ σ_v` read on `[k²]^R`.
pub fn acceptance_probability(
    inst: &LabelCoverInstance,
    proof: &LongCodeProof,
    budget: u64,
) -> Result<AcceptanceReport> {
    check_verifier_inputs(inst, proof)?;
    let k = proof.k;
    let qq = k * k;
    let r = inst.r;
    let deg = inst.degree() as u128;
    let row_support: Vec<u128> = (0..qq)
        .map(|x| {
            (0..qq)
                .filter(|&y| dmr_integer_weight(k, pair_of(x, k), pair_of(y, k)) > 0)
                .count() as u128
        })
        .collect();
    // Σ_x Π_i support(x_i) = (Σ_a support(a))^R
    let per_triple = row_support.iter().sum::<u128>().pow(r as u32);
    let support_pairs = inst.u_count as u128 * deg * deg * per_triple;
    if support_pairs > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "verifier enumeration",
            needed: support_pairs,
            budget,
        });
    }
    let weights: Vec<u64> = (0..qq * qq)
        .map(|idx| dmr_integer_weight(k, pair_of(idx / qq, k), pair_of(idx % qq, k)))
        .collect();
    let d_r = (dmr_denominator(k) as u128).pow(r as u32);
    let points = qq.pow(r as u32);
    let mut equal_weight = 0u128;
    for edges in inst.edges_at() {
        let composed: Vec<Vec<u32>> = edges
            .iter()
            .map(|&e| {
                let edge = &inst.edges[e];
                composed_table(&proof.tables[edge.v], &canonical_sigma(&edge.pi).expect("validated"), k)
            })
            .collect();
        for h2 in &composed {
            // smoothed[c][x] = Σ_y D^R T(x→y) [h2(y) = c]
            let smoothed: Vec<Vec<u128>> = (1..=k as u32)
                .map(|c| {
                    let mut t: Vec<u128> = h2.iter().map(|&v| (v == c) as u128).collect();
                    integer_tensor_apply(&mut t, &weights, qq, r);
                    t
                })
                .collect();
            for h1 in &composed {
                equal_weight += (0..points)
                    .map(|x| smoothed[h1[x] as usize - 1][x])
                    .sum::<u128>();
            }
        }
    }
    let denominator = inst.u_count as u128 * deg * deg * points as u128 * d_r;
    let probability = Ratio::new(denominator - equal_weight, denominator);
    Ok(AcceptanceReport {
        probability_f64: probability.to_f64().unwrap_or(f64::NAN),
        probability,
        denominator,
        support_pairs,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub samples: u64,
    pub accepted: u64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Runs the verifier `samples` times with explicit sampling of every choice.
pub fn monte_carlo_acceptance(
    inst: &LabelCoverInstance,
    proof: &LongCodeProof,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<MonteCarloEstimate> {
    check_verifier_inputs(inst, proof)?;
    let k = proof.k;
    let qq = k * k;
    let r = inst.r;
    let rows: Vec<Vec<(usize, u64)>> = (0..qq)
        .map(|x| {
            (0..qq)
                .map(|y| (y, dmr_integer_weight(k, pair_of(x, k), pair_of(y, k))))
                .filter(|&(_, w)| w > 0)
                .collect()
        })
        .collect();
    let d = dmr_denominator(k);
    let at = inst.edges_at();
    let query = |e: usize, pairs: &[usize]| -> u32 {
        let edge = &inst.edges[e];
        let sigma = canonical_sigma(&edge.pi).expect("validated");
        let under: Vec<usize> = pairs.iter().flat_map(|&p| [p % k, p / k]).collect();
        let z: Vec<usize> = sigma.iter().map(|&s| under[s]).collect();
        let idx = z.iter().rev().fold(0, |acc, &c| acc * k + c);
        proof.tables[edge.v][idx]
    };
    let mut accepted = 0u64;
    for _ in 0..samples {
        let u = rng.random_range(0..inst.u_count);
        let e1 = at[u][rng.random_range(0..at[u].len())];
        let e2 = at[u][rng.random_range(0..at[u].len())];
        let x: Vec<usize> = (0..r).map(|_| rng.random_range(0..qq)).collect();
        let y: Vec<usize> = x
            .iter()
            .map(|&xi| {
                let mut pick = rng.random_range(0..d);
                rows[xi]
                    .iter()
                    .find(|&&(_, w)| {
                        if pick < w {
                            true
                        } else {
                            pick -= w;
                            false
                        }
                    })
                    .expect("rows sum to D")
                    .0
            })
            .collect();
        accepted += (query(e1, &x) != query(e2, &y)) as u64;
    }
    let p = accepted as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        samples,
        accepted,
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InfluenceDecode {
    pub t: usize,
    pub delta: f64,
    /// `Sugg_u ⊆ [R]`, threshold `δ` at level `t`.
    pub sugg_u: Vec<Vec<usize>>,
    /// `Sugg_v ⊆ [2R]`, threshold `δ/4` at level `2t`.
    pub sugg_v: Vec<Vec<usize>>,
    /// `Σ_i Inf_i^{≤t}(g^u)` per `u`.
    pub low_sum_u: Vec<f64>,
    pub labeling: Labeling,
    pub satisfied: usize,
    pub edges: usize,
}

/// Influence-based decoding of a proof into suggestion sets and a greedy
/// labeling (lowest suggested label; label 0 when nothing is suggested).
pub fn influence_decode(
    inst: &LabelCoverInstance,
    proof: &LongCodeProof,
    t: usize,
    delta: f64,
) -> Result<InfluenceDecode> {
    inst.validate()?;
    proof.validate()?;
    if proof.arity != 2 * inst.r || proof.tables.len() != inst.v_count {
        return Err(Error::InvalidTable("proof does not match the instance".into()));
    }
    if delta.is_nan() || delta <= 0.0 || t == 0 {
        return Err(Error::InvalidParameter("need delta > 0 and t >= 1".into()));
    }
    let k = proof.k;
    let basis_k = FourierBasis::new(k)?;
    let basis_kk = FourierBasis::new(k * k)?;
    let fv: Vec<TabulatedFunction> = (0..inst.v_count)
        .map(|v| proof.simplex_table(v))
        .collect::<Result<_>>()?;

    let mut sugg_v = Vec::with_capacity(inst.v_count);
    for f in &fv {
        let low = low_level_influences(f, &basis_k, 2 * t)?;
        sugg_v.push((0..low.len()).filter(|&j| low[j] >= delta / 4.0).collect::<Vec<_>>());
    }

    let mut sugg_u = Vec::with_capacity(inst.u_count);
    let mut low_sum_u = Vec::with_capacity(inst.u_count);
    for edges in inst.edges_at() {
        let mut acc: Option<Vec<f64>> = None;
        for &e in &edges {
            let edge = &inst.edges[e];
            let composed = fv[edge.v].compose(&canonical_sigma(&edge.pi)?)?;
            // [k]^{2R} and [k²]^R share the same little-endian index, so the
            // bar of a table is the identity on storage; go through the
            // explicit map anyway
            let bar = crate::spectral::bar_table(&composed)?;
            match &mut acc {
                None => acc = Some(bar.values().to_vec()),
                Some(a) => a.iter_mut().zip(bar.values()).for_each(|(s, v)| *s += v),
            }
        }
        let mut values = acc.expect("left-regular with positive degree");
        let n = edges.len() as f64;
        values.iter_mut().for_each(|v| *v /= n);
        let g = TabulatedFunction::new(k * k, inst.r, k, values)?;
        let low = low_level_influences(&g, &basis_kk, t)?;
        low_sum_u.push(low.iter().sum());
        sugg_u.push((0..low.len()).filter(|&i| low[i] >= delta).collect::<Vec<_>>());
    }

    let labeling = Labeling {
        u: sugg_u.iter().map(|s| s.first().copied().unwrap_or(0)).collect(),
        v: sugg_v.iter().map(|s| s.first().copied().unwrap_or(0)).collect(),
    };
    Ok(InfluenceDecode {
        t,
        delta,
        satisfied: labeling.satisfied(inst),
        edges: inst.edges.len(),
        sugg_u,
        sugg_v,
        low_sum_u,
        labeling,
    })
}

/// Exact acceptance as a float, for callers that do not need the fraction.
pub fn acceptance_f64(inst: &LabelCoverInstance, proof: &LongCodeProof, budget: u64) -> Result<f64> {
    let rep = acceptance_probability(inst, proof, budget)?;
    Ok(if rep.probability.is_zero() { 0.0 } else { rep.probability_f64 })
}
