//! Independent oracles used by the acceptance target and integration tests.
//! Everything here is written from the definitions, not from library
//! internals, so agreement is meaningful.
#![allow(dead_code)]

use num_rational::Ratio;
use num_traits::{One, Zero};

use kcolor::csp::{CspInstance, Constraint};
use kcolor::graph::{score, Coloring, Weight, WeightedGraph};
use kcolor::pcp::{LabelCoverInstance, LongCodeProof};
use kcolor::reduce3::{build_3color_instance, decode_coloring, GadgetLayout};
use kcolor::reducek::TensorLayout;

pub type Q = Ratio<i64>;

/// Mean proper weight over all `k^n` colorings, by enumeration.
pub fn brute_force_mean_proper(g: &WeightedGraph, k: u32) -> Weight {
    let n = g.vertex_count();
    let mut colors = vec![1u32; n];
    let mut sum = Weight::zero();
    let mut count: i128 = 0;
    loop {
        let c = Coloring::new(k, colors.clone()).unwrap();
        sum += score(g, &c).unwrap().proper_weight;
        count += 1;
        let mut i = 0;
        loop {
            if i == n {
                return sum / Weight::from(count);
            }
            if colors[i] < k {
                colors[i] += 1;
                break;
            }
            colors[i] = 1;
            i += 1;
        }
    }
}

/// Local gadget check for one constraint shape: with `T, F, R` colored
/// 1, 2, 3 and variable nodes colored by truth value, returns the minimum
/// number of miscolored edges touching `A, A', B, B'` over all `3^4`
/// colorings of those four nodes, plus the number of colorings achieving it.
pub fn gadget_min_cost(x: bool, y: bool, y_negated: bool, zk: bool, zl: bool) -> (usize, usize) {
    let inst = CspInstance::new(
        1,
        1,
        2,
        vec![Constraint {
            x: 0,
            y: 0,
            y_negated,
            zk: 0,
            zl: 1,
        }],
    )
    .unwrap();
    let out = build_3color_instance(&inst).unwrap();
    let l = &out.layout;
    let truth = |b: bool| if b { 1 } else { 2 };
    let mut colors = vec![0u32; l.node_count()];
    colors[l.t] = 1;
    colors[l.f] = 2;
    colors[l.r] = 3;
    colors[l.x_nodes[0]] = truth(x);
    colors[l.y_pos[0]] = truth(y);
    colors[l.y_neg[0]] = truth(!y);
    colors[l.z_nodes[0]] = truth(zk);
    colors[l.z_nodes[1]] = truth(zl);
    let gd = &l.gadgets[0];
    let local = [gd.a, gd.a_prime, gd.b, gd.b_prime];
    let mut best = usize::MAX;
    let mut ways = 0;
    for code in 0..81u32 {
        let mut c = colors.clone();
        let mut rest = code;
        for &node in &local {
            c[node] = rest % 3 + 1;
            rest /= 3;
        }
        let cost = out
            .graph
            .edges()
            .iter()
            .filter(|e| local.contains(&e.u) || local.contains(&e.v))
            .filter(|e| c[e.u] == c[e.v])
            .count();
        // edges away from the gadget are properly colored by construction
        let outside = out
            .graph
            .edges()
            .iter()
            .filter(|e| !local.contains(&e.u) && !local.contains(&e.v))
            .filter(|e| c[e.u] == c[e.v])
            .count();
        assert_eq!(outside, 0, "variable/global edges must be proper");
        match cost.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = cost;
                ways = 1;
            }
            std::cmp::Ordering::Equal => ways += 1,
            _ => {}
        }
    }
    (best, ways)
}

pub fn constraint_holds(x: bool, y_lit: bool, zk: bool, zl: bool) -> bool {
    (x || y_lit == zk) && (!x || y_lit == zl)
}

#[derive(Debug, Default)]
pub struct SweepStats {
    pub leaves: u64,
    pub nodes: u64,
}

/// Enumerates every 3-coloring with `T, F, R = 1, 2, 3` whose miscolored
/// weight is below `m/2`, and checks the decoder on each. Partial colorings
/// are pruned as soon as their miscolored weight reaches `m/2`, which skips
/// only colorings outside the guarantee.
pub fn soundness_sweep(inst: &CspInstance) -> Result<SweepStats, String> {
    let out = build_3color_instance(inst).map_err(|e| e.to_string())?;
    let g = &out.graph;
    let l: &GadgetLayout = &out.layout;
    let m = inst.m() as i128;
    let n = g.vertex_count();
    // doubled integer weights: every weight is a multiple of 1/2
    let mut adj: Vec<Vec<(usize, i128)>> = vec![Vec::new(); n];
    for e in g.edges() {
        let w2 = e.w * Weight::from(2);
        assert!(w2.is_integer(), "weights are half-integers");
        adj[e.u].push((e.v, w2.to_integer()));
        adj[e.v].push((e.u, w2.to_integer()));
    }
    // globals first, then variables, then each gadget
    let mut order = vec![l.t, l.f, l.r];
    order.extend(&l.x_nodes);
    for j in 0..inst.ny {
        order.push(l.y_pos[j]);
        order.push(l.y_neg[j]);
    }
    order.extend(&l.z_nodes);
    for gd in &l.gadgets {
        order.extend([gd.a, gd.b, gd.a_prime, gd.b_prime]);
    }
    assert_eq!(order.len(), n);
    let mut colors = vec![0u32; n];
    let mut stats = SweepStats::default();
    let fixed = [1u32, 2, 3];

    fn rec(
        pos: usize,
        cost2: i128,
        m: i128,
        order: &[usize],
        fixed: &[u32; 3],
        adj: &[Vec<(usize, i128)>],
        colors: &mut Vec<u32>,
        stats: &mut SweepStats,
        leaf: &mut dyn FnMut(&[u32]) -> Result<(), String>,
    ) -> Result<(), String> {
        stats.nodes += 1;
        if pos == order.len() {
            stats.leaves += 1;
            return leaf(colors);
        }
        let v = order[pos];
        let choices: &[u32] = if pos < 3 { &fixed[pos..pos + 1] } else { &[1, 2, 3] };
        for &c in choices {
            let add: i128 = adj[v]
                .iter()
                .filter(|&&(u, _)| colors[u] == c)
                .map(|&(_, w)| w)
                .sum();
            // keep only τ < m/2, i.e. 2τ < m
            if cost2 + add >= m {
                continue;
            }
            colors[v] = c;
            rec(pos + 1, cost2 + add, m, order, fixed, adj, colors, stats, leaf)?;
            colors[v] = 0;
        }
        Ok(())
    }

    let mut leaf = |c: &[u32]| -> Result<(), String> {
        let chi = Coloring::new(3, c.to_vec()).map_err(|e| e.to_string())?;
        let dec = decode_coloring(inst, l, g, &chi).map_err(|e| e.to_string())?;
        if !dec.guarantee_applies {
            return Err("pruned sweep produced tau >= m/2".into());
        }
        if Weight::from(dec.satisfied as i128) < Weight::from(m) - dec.tau {
            return Err(format!(
                "decode satisfied {} < m - tau = {} - {}",
                dec.satisfied, m, dec.tau
            ));
        }
        Ok(())
    };
    rec(0, 0, m, &order, &fixed, &adj, &mut colors, &mut stats, &mut leaf)?;
    Ok(stats)
}

/// The weighted uncut total, term by term from the definition:
/// `Σ_u (2/3)d_u · #{monochromatic pairs in B_u}` plus the number of
/// monochromatic `((u,i,j), (v,i',j))` pairs over all edges, `i`, `i'`, `j`.
pub fn c_total_by_definition(g: &WeightedGraph, layout: &TensorLayout, chi_h: &Coloring) -> Weight {
    let k = layout.k as usize;
    let copies = k / 3;
    let deg = g.degrees();
    let mut total = Weight::zero();
    for u in 0..g.vertex_count() {
        let block: Vec<u32> = (0..copies)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| chi_h.color(layout.vertex(u, i, j)))
            .collect();
        let mut mono = 0i128;
        for a in 0..block.len() {
            for b in a + 1..block.len() {
                mono += (block[a] == block[b]) as i128;
            }
        }
        total += Weight::new(2 * deg[u] as i128, 3) * Weight::from(mono);
    }
    for e in g.edges() {
        for j in 0..3 {
            for i in 0..copies {
                for i2 in 0..copies {
                    if chi_h.color(layout.vertex(e.u, i, j)) == chi_h.color(layout.vertex(e.v, i2, j)) {
                        total += Weight::one();
                    }
                }
            }
        }
    }
    total
}

/// The zero-diagonal operator on `[q]²` in exact rationals, straight from
/// the four-case definition; pair `(a, b)` has index `a + q·b`.
pub fn dmr_exact(q: i64) -> Vec<Vec<Q>> {
    let alpha = Q::new(1, (q - 1) * (q - 3));
    let beta = Q::new(1, (q - 1) * (q - 2));
    let n = (q * q) as usize;
    let pair = |i: usize| ((i as i64) % q, (i as i64) / q);
    let mut t = vec![vec![Q::zero(); n]; n];
    for (i, row) in t.iter_mut().enumerate() {
        let (x1, x2) = pair(i);
        for (j, cell) in row.iter_mut().enumerate() {
            let (y1, y2) = pair(j);
            let disjoint = ![y1, y2].contains(&x1) && ![y1, y2].contains(&x2);
            *cell = if disjoint && x1 != x2 && y1 != y2 {
                alpha
            } else if ![y1, y2].contains(&x1) && x1 == x2 && y1 != y2 {
                beta
            } else if ![x1, x2].contains(&y1) && x1 != x2 && y1 == y2 {
                beta
            } else {
                Q::zero()
            };
        }
    }
    t
}

pub fn square_exact(t: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = t.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if t[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += t[i][k] * t[k][j];
            }
        }
    }
    out
}

/// `sqrt(λ_1(T²))` by power iteration orthogonal to the constant vector.
pub fn second_eigen_power(t: &[f64], n: usize, iters: usize) -> f64 {
    let mul = |v: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| t[i * n + j] * v[j]).sum()).collect()
    };
    let mut v: Vec<f64> = (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 / 101.0 - 0.5).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let w = mul(&mul(&v));
        lambda = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = w;
    }
    lambda.sqrt()
}

/// Acceptance probability by direct enumeration of every verifier run,
/// following the verifier text literally. Only for tiny instances.
pub fn brute_force_acceptance(inst: &LabelCoverInstance, proof: &LongCodeProof) -> Ratio<i128> {
    let k = proof.k;
    let kk = k * k;
    let r = inst.r;
    let t = dmr_exact(k as i64);
    let sigma_of = |pi: &[usize]| -> Vec<usize> {
        // σ sends the two preimages of label i, in increasing order, to
        // positions 2i and 2i+1
        let mut sigma = vec![0; pi.len()];
        for i in 0..r {
            let pre: Vec<usize> = (0..pi.len()).filter(|&p| pi[p] == i).collect();
            sigma[pre[0]] = 2 * i;
            sigma[pre[1]] = 2 * i + 1;
        }
        sigma
    };
    let query = |v: usize, sigma: &[usize], pairs: &[usize]| -> u32 {
        let under: Vec<usize> = pairs.iter().flat_map(|&p| [p % k, p / k]).collect();
        // χ_v∘σ(z) = χ_v(z∘σ), (z∘σ)_p = z_{σ(p)}
        let composed: Vec<usize> = sigma.iter().map(|&s| under[s]).collect();
        let mut idx = 0;
        for &c in composed.iter().rev() {
            idx = idx * k + c;
        }
        proof.tables[v][idx]
    };
    let points = kk.pow(r as u32);
    let decode = |mut p: usize| -> Vec<usize> {
        (0..r)
            .map(|_| {
                let d = p % kk;
                p /= kk;
                d
            })
            .collect()
    };
    let mut total = Ratio::<i128>::zero();
    for u in 0..inst.u_count {
        let nbrs: Vec<&kcolor::pcp::LabelCoverEdge> = inst.edges.iter().filter(|e| e.u == u).collect();
        let pu = Ratio::new(1, (inst.u_count * nbrs.len() * nbrs.len()) as i128);
        for e1 in &nbrs {
            for e2 in &nbrs {
                let (s1, s2) = (sigma_of(&e1.pi), sigma_of(&e2.pi));
                let mut acc = Ratio::<i128>::zero();
                for xp in 0..points {
                    let x = decode(xp);
                    for yp in 0..points {
                        let y = decode(yp);
                        let mut w = Ratio::<i128>::one();
                        for i in 0..r {
                            let tij = t[x[i]][y[i]];
                            w *= Ratio::new(*tij.numer() as i128, *tij.denom() as i128);
                        }
                        if w.is_zero() {
                            continue;
                        }
                        if query(e1.v, &s1, &x) != query(e2.v, &s2, &y) {
                            acc += w;
                        }
                    }
                }
                total += pu * acc / Ratio::from_integer(points as i128);
            }
        }
    }
    total
}
