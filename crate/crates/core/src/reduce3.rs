//! CSP → weighted 3-coloring.
//!
//! Three global nodes `R`, `T`, `F` form a triangle of weight `m/2`. Every
//! variable gets a node (two for `y` variables, one per literal), tied to `R`
//! so that cheap colorings give variable nodes the color of `T` or `F`. Each
//! constraint `(x ∨ (Y = z_k)) ∧ (¬x ∨ (Y = z_l))` gets a local gadget on
//! four fresh nodes with ten unit edges:
//!
//! ```text
//! A–T  A–x  A–B  B–Y  B–z_k
//! A'–F A'–x A'–B' B'–Y B'–z_l
//! ```
//!
//! With `x` colored like `F`, `A` is forced to `R`'s color and `B` can only be
//! properly colored when `Y` and `z_k` agree; the primed half does the same
//! for `x` colored like `T` and `z_l`. The total weight is exactly `33m/2`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::csp::{count_satisfied, Assignment, CspInstance};
use crate::graph::{score, Coloring, Weight, WeightedGraph};
use crate::{Error, Result};

pub const COLOR_T: u32 = 1;
pub const COLOR_F: u32 = 2;
pub const COLOR_R: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalGadget {
    pub a: usize,
    pub a_prime: usize,
    pub b: usize,
    pub b_prime: usize,
}

/// Where an edge of the reduced graph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeSource {
    GlobalTriangle,
    LiteralTriangle { y: usize },
    Spoke { node: usize },
    Gadget { constraint: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetLayout {
    pub r: usize,
    pub t: usize,
    pub f: usize,
    pub x_nodes: Vec<usize>,
    pub y_pos: Vec<usize>,
    pub y_neg: Vec<usize>,
    pub z_nodes: Vec<usize>,
    pub gadgets: Vec<LocalGadget>,
    /// Number of gadget edges incident to each node.
    pub gadget_degree: Vec<u64>,
    /// Source of every edge, parallel to the graph's edge list.
    pub provenance: Vec<EdgeSource>,
}

impl GadgetLayout {
    pub fn node_count(&self) -> usize {
        self.gadget_degree.len()
    }

    /// Node of the literal `Y` used by a constraint.
    pub fn literal_node(&self, y: usize, negated: bool) -> usize {
        if negated {
            self.y_neg[y]
        } else {
            self.y_pos[y]
        }
    }

    /// `w_j = (Δ(y_j) + Δ(ȳ_j)) / 2`.
    pub fn literal_weight(&self, y: usize) -> Weight {
        Weight::new(
            (self.gadget_degree[self.y_pos[y]] + self.gadget_degree[self.y_neg[y]]) as i128,
            2,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_against(&self, inst: &CspInstance) -> Result<()> {
        if self.x_nodes.len() != inst.nx
            || self.y_pos.len() != inst.ny
            || self.z_nodes.len() != inst.nz
            || self.gadgets.len() != inst.m()
        {
            return Err(Error::InvalidParameter(
                "layout does not belong to this CSP instance".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reduction3Output {
    pub graph: WeightedGraph,
    pub layout: GadgetLayout,
    pub m: usize,
}

/// Expected total weight `33m/2`.
pub fn expected_total_weight(m: usize) -> Weight {
    Weight::new(33 * m as i128, 2)
}

pub fn build_3color_instance(inst: &CspInstance) -> Result<Reduction3Output> {
    inst.validate()?;
    let m = inst.m();
    let (r, t, f) = (0, 1, 2);
    let mut next = 3;
    let mut alloc = |count: usize| {
        let ids: Vec<usize> = (next..next + count).collect();
        next += count;
        ids
    };
    let x_nodes = alloc(inst.nx);
    let mut y_pos = Vec::with_capacity(inst.ny);
    let mut y_neg = Vec::with_capacity(inst.ny);
    for _ in 0..inst.ny {
        let pair = alloc(2);
        y_pos.push(pair[0]);
        y_neg.push(pair[1]);
    }
    let z_nodes = alloc(inst.nz);
    let gadgets: Vec<LocalGadget> = (0..m)
        .map(|_| {
            let ids = alloc(4);
            LocalGadget {
                a: ids[0],
                a_prime: ids[1],
                b: ids[2],
                b_prime: ids[3],
            }
        })
        .collect();
    let n = next;

    let mut gadget_degree = vec![0u64; n];
    let mut gadget_edges = Vec::with_capacity(10 * m);
    for (c, gd) in inst.constraints.iter().zip(&gadgets) {
        let x = x_nodes[c.x];
        let y = if c.y_negated { y_neg[c.y] } else { y_pos[c.y] };
        let (zk, zl) = (z_nodes[c.zk], z_nodes[c.zl]);
        let local = [
            (gd.a, t),
            (gd.a, x),
            (gd.a, gd.b),
            (gd.b, y),
            (gd.b, zk),
            (gd.a_prime, f),
            (gd.a_prime, x),
            (gd.a_prime, gd.b_prime),
            (gd.b_prime, y),
            (gd.b_prime, zl),
        ];
        for (u, v) in local {
            gadget_degree[u] += 1;
            gadget_degree[v] += 1;
        }
        gadget_edges.push(local);
    }

    let mut graph = WeightedGraph::new(n);
    let mut provenance = Vec::new();
    let mut push = |g: &mut WeightedGraph, u, v, w: Weight, src| -> Result<()> {
        // zero-weight edges are left out
        if !w.is_zero() {
            g.add_edge(u, v, w)?;
            provenance.push(src);
        }
        Ok(())
    };

    let half_m = Weight::new(m as i128, 2);
    for (u, v) in [(r, t), (t, f), (f, r)] {
        push(&mut graph, u, v, half_m, EdgeSource::GlobalTriangle)?;
    }
    for j in 0..inst.ny {
        let w = Weight::new(
            (gadget_degree[y_pos[j]] + gadget_degree[y_neg[j]]) as i128,
            2,
        );
        for (u, v) in [(y_pos[j], y_neg[j]), (y_pos[j], r), (y_neg[j], r)] {
            push(&mut graph, u, v, w, EdgeSource::LiteralTriangle { y: j })?;
        }
    }
    for &node in x_nodes.iter().chain(&z_nodes) {
        let w = Weight::new(gadget_degree[node] as i128, 2);
        push(&mut graph, node, r, w, EdgeSource::Spoke { node })?;
    }
    for (i, local) in gadget_edges.iter().enumerate() {
        for &(u, v) in local {
            push(&mut graph, u, v, Weight::one(), EdgeSource::Gadget { constraint: i })?;
        }
    }

    for (id, name) in [(r, "R"), (t, "T"), (f, "F")] {
        graph.set_label(id, name);
    }
    for (i, &id) in x_nodes.iter().enumerate() {
        graph.set_label(id, format!("x{i}"));
    }
    for j in 0..inst.ny {
        graph.set_label(y_pos[j], format!("y{j}"));
        graph.set_label(y_neg[j], format!("~y{j}"));
    }
    for (l, &id) in z_nodes.iter().enumerate() {
        graph.set_label(id, format!("z{l}"));
    }
    for (i, gd) in gadgets.iter().enumerate() {
        graph.set_label(gd.a, format!("A{i}"));
        graph.set_label(gd.a_prime, format!("A'{i}"));
        graph.set_label(gd.b, format!("B{i}"));
        graph.set_label(gd.b_prime, format!("B'{i}"));
    }

    Ok(Reduction3Output {
        graph,
        layout: GadgetLayout {
            r,
            t,
            f,
            x_nodes,
            y_pos,
            y_neg,
            z_nodes,
            gadgets,
            gadget_degree,
            provenance,
        },
        m,
    })
}

fn truth_color(value: bool) -> u32 {
    if value {
        COLOR_T
    } else {
        COLOR_F
    }
}

fn others(excluded: &[u32]) -> Vec<u32> {
    (1..=3).filter(|c| !excluded.contains(c)).collect()
}

/// Picks colors for one half of a gadget: the anchor (`A` or `A'`) avoids the
/// variable node and its global node, the inner node (`B` or `B'`) avoids the
/// literal and its `z` node. When no proper pair exists the anchor takes the
/// variable's color, miscoloring exactly that one edge.
fn color_half(x_color: u32, global: u32, y_color: u32, z_color: u32) -> (u32, u32) {
    let anchor = others(&[x_color, global]);
    let inner = others(&[y_color, z_color]);
    for &a in &anchor {
        for &b in &inner {
            if a != b {
                return (a, b);
            }
        }
    }
    let b = inner
        .iter()
        .copied()
        .find(|&b| b != x_color)
        .expect("inner set avoids at most two colors");
    (x_color, b)
}

/// Colors the reduced graph from an assignment; the miscolored weight is at
/// most the number of violated constraints, each costing one gadget edge.
pub fn encode_assignment(
    inst: &CspInstance,
    layout: &GadgetLayout,
    a: &Assignment,
) -> Result<Coloring> {
    inst.check_assignment(a)?;
    layout.check_against(inst)?;
    let mut colors = vec![COLOR_R; layout.node_count()];
    colors[layout.t] = COLOR_T;
    colors[layout.f] = COLOR_F;
    colors[layout.r] = COLOR_R;
    for (i, &node) in layout.x_nodes.iter().enumerate() {
        colors[node] = truth_color(a.x[i]);
    }
    for j in 0..inst.ny {
        colors[layout.y_pos[j]] = truth_color(a.y[j]);
        colors[layout.y_neg[j]] = truth_color(!a.y[j]);
    }
    for (l, &node) in layout.z_nodes.iter().enumerate() {
        colors[node] = truth_color(a.z[l]);
    }
    for (c, gd) in inst.constraints.iter().zip(&layout.gadgets) {
        let x = colors[layout.x_nodes[c.x]];
        let y = colors[layout.literal_node(c.y, c.y_negated)];
        let zk = colors[layout.z_nodes[c.zk]];
        let zl = colors[layout.z_nodes[c.zl]];
        let (ca, cb) = color_half(x, COLOR_T, y, zk);
        let (cap, cbp) = color_half(x, COLOR_F, y, zl);
        colors[gd.a] = ca;
        colors[gd.b] = cb;
        colors[gd.a_prime] = cap;
        colors[gd.b_prime] = cbp;
    }
    Coloring::new(3, colors)
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub assignment: Assignment,
    /// Coloring after repairing variable nodes.
    pub repaired: Coloring,
    /// Miscolored weight of the input coloring.
    pub tau: Weight,
    /// Miscolored weight after repair; never above `tau`.
    pub repaired_tau: Weight,
    /// Whether `tau < m/2`, the regime where `satisfied >= m - tau` is promised.
    pub guarantee_applies: bool,
    pub satisfied: usize,
}

struct LocalCost<'a> {
    graph: &'a WeightedGraph,
    incidence: Vec<Vec<usize>>,
}

impl LocalCost<'_> {
    /// Miscolored weight over edges touching any of `nodes`, each edge once.
    fn around(&self, colors: &[u32], nodes: &[usize]) -> Weight {
        let mut edges: Vec<usize> = nodes
            .iter()
            .flat_map(|&n| self.incidence[n].iter().copied())
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
            .into_iter()
            .map(|i| &self.graph.edges()[i])
            .filter(|e| colors[e.u] == colors[e.v])
            .map(|e| e.w)
            .sum()
    }

    /// Tries each candidate coloring of `nodes` and keeps the cheapest; the
    /// first candidate wins ties.
    fn best_of(&self, colors: &mut [u32], nodes: &[usize], candidates: &[&[u32]]) {
        let mut best: Option<(Weight, usize)> = None;
        for (i, cand) in candidates.iter().enumerate() {
            for (&n, &c) in nodes.iter().zip(cand.iter()) {
                colors[n] = c;
            }
            let cost = self.around(colors, nodes);
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, i));
            }
        }
        let (_, i) = best.expect("at least one candidate");
        for (&n, &c) in nodes.iter().zip(candidates[i].iter()) {
            colors[n] = c;
        }
    }
}

/// Reads an assignment back from a 3-coloring of the reduced graph.
///
/// Variable nodes that sit on `R`'s color, and literal pairs that are not
/// colored `{T, F}` in some order, are recolored to whichever of the two
/// truth colorings leaves less miscolored weight around them. The averaging
/// argument guarantees the better of the two never loses weight. Values are
/// then read off as `T → true`, `F → false`.
///
/// Fails with [`Error::MalformedColoring`] when `R`, `T` and `F` do not get
/// three distinct colors; in that case `tau >= m/2` and there is nothing to
/// guarantee.
pub fn decode_coloring(
    inst: &CspInstance,
    layout: &GadgetLayout,
    graph: &WeightedGraph,
    c: &Coloring,
) -> Result<DecodeOutcome> {
    layout.check_against(inst)?;
    c.check_covers(graph)?;
    if c.k() != 3 {
        return Err(Error::InvalidColoring(format!("expected k = 3, got {}", c.k())));
    }
    let tau = score(graph, c)?.miscolored_weight;
    let (ct, cf, cr) = (c.color(layout.t), c.color(layout.f), c.color(layout.r));
    if ct == cf || cf == cr || ct == cr {
        return Err(Error::MalformedColoring(format!(
            "R, T, F share colors ({cr}, {ct}, {cf}); miscolored weight {tau} is at least m/2"
        )));
    }
    let guarantee_applies = tau < Weight::new(inst.m() as i128, 2);

    let local = LocalCost {
        graph,
        incidence: graph.incidence(),
    };
    let mut colors = c.colors().to_vec();
    for &node in layout.x_nodes.iter().chain(&layout.z_nodes) {
        if colors[node] == cr {
            local.best_of(&mut colors, &[node], &[&[ct], &[cf]]);
        }
    }
    for j in 0..inst.ny {
        let (p, q) = (layout.y_pos[j], layout.y_neg[j]);
        let (cp, cq) = (colors[p], colors[q]);
        if cp == cr || cq == cr || cp == cq {
            local.best_of(&mut colors, &[p, q], &[&[ct, cf], &[cf, ct]]);
        }
    }

    let read = |node: usize| colors[node] == ct;
    let assignment = Assignment {
        x: layout.x_nodes.iter().map(|&n| read(n)).collect(),
        y: layout.y_pos.iter().map(|&n| read(n)).collect(),
        z: layout.z_nodes.iter().map(|&n| read(n)).collect(),
    };
    let repaired = Coloring::new(3, colors)?;
    let repaired_tau = score(graph, &repaired)?.miscolored_weight;
    let satisfied = count_satisfied(inst, &assignment);
    Ok(DecodeOutcome {
        assignment,
        repaired,
        tau,
        repaired_tau,
        guarantee_applies,
        satisfied,
    })
}
