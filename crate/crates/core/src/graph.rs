//! Weighted multigraphs, colorings and the Max k-Colorable Subgraph objective.
//!
//! Weights are exact rationals. Parallel edges are allowed; self-loops and
//! non-positive weights are rejected at insertion.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact edge weight.
pub type Weight = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: Weight,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    labels: BTreeMap<usize, String>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Builds a unit-weight graph from an edge list.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v, Weight::one())?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.edges.push(Edge {
                    u,
                    v,
                    w: Weight::one(),
                });
            }
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: Weight) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) has an endpoint outside [0, {})",
                self.n
            )));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop on vertex {u}")));
        }
        if !w.is_positive() {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) has non-positive weight {w}"
            )));
        }
        self.edges.push(Edge { u, v, w });
        Ok(())
    }

    /// Adds a vertex and returns its id.
    pub fn add_vertex(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    pub fn set_label(&mut self, v: usize, label: impl Into<String>) {
        if v < self.n {
            self.labels.insert(v, label.into());
        }
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<usize, String> {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Number of incident edges, counting parallel edges separately.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.u] += 1;
            d[e.v] += 1;
        }
        d
    }

    pub fn weighted_degrees(&self) -> Vec<Weight> {
        let mut d = vec![Weight::zero(); self.n];
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.w.is_one())
    }

    /// Incident edge indices per vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push(i);
            inc[e.v].push(i);
        }
        inc
    }

    /// Least common multiple of the weight denominators.
    pub fn weight_scale(&self) -> i128 {
        self.edges
            .iter()
            .fold(1i128, |acc, e| acc.lcm(e.w.denom()))
    }

    /// Weights multiplied by [`Self::weight_scale`], as integers.
    pub(crate) fn integer_weights(&self) -> (i128, Vec<i128>) {
        let scale = self.weight_scale();
        let ws = self
            .edges
            .iter()
            .map(|e| (e.w * Weight::from_integer(scale)).to_integer())
            .collect();
        (scale, ws)
    }

    /// Serializes to the `wgraph` text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("wgraph {} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "e {} {} {}", e.u, e.v, format_weight(&e.w));
        }
        for (v, l) in &self.labels {
            let _ = writeln!(out, "l {v} {l}");
        }
        out
    }

    /// Parses the `wgraph` text format. Blank lines and `#` comments are
    /// ignored; `l <v> <label>` lines attach display labels.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut graph: Option<WeightedGraph> = None;
        let mut declared_edges = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let perr = |msg: String| Error::Parse { line, msg };
            match (tag, graph.as_mut()) {
                ("wgraph", None) => {
                    let n = parse_usize(parts.next(), line, "vertex count")?;
                    declared_edges = parse_usize(parts.next(), line, "edge count")?;
                    graph = Some(WeightedGraph::new(n));
                }
                ("wgraph", Some(_)) => return Err(perr("duplicate header".into())),
                (_, None) => return Err(perr("expected `wgraph <n> <m>` header".into())),
                ("e", Some(g)) => {
                    if content.split_whitespace().count() != 4 {
                        return Err(perr("expected `e <u> <v> <weight>`".into()));
                    }
                    let u = parse_usize(parts.next(), line, "endpoint")?;
                    let v = parse_usize(parts.next(), line, "endpoint")?;
                    let w = parse_weight(parts.next().unwrap_or(""))
                        .map_err(&perr)?;
                    g.add_edge(u, v, w).map_err(|e| perr(e.to_string()))?;
                }
                ("l", Some(g)) => {
                    let v = parse_usize(parts.next(), line, "vertex")?;
                    if v >= g.n {
                        return Err(perr(format!("label for unknown vertex {v}")));
                    }
                    let rest: Vec<&str> = parts.collect();
                    g.set_label(v, rest.join(" "));
                }
                (other, Some(_)) => return Err(perr(format!("unknown record `{other}`"))),
            }
        }
        let g = graph.ok_or(Error::Parse {
            line: 0,
            msg: "empty graph file".into(),
        })?;
        if g.edges.len() != declared_edges {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "header declares {declared_edges} edges but {} were given",
                    g.edges.len()
                ),
            });
        }
        Ok(g)
    }
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected {what}"),
    })
}

/// Formats a weight as `num/den`.
pub fn format_weight(w: &Weight) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

/// Parses `num/den`, an integer, or a finite decimal such as `1.25`.
pub fn parse_weight(tok: &str) -> std::result::Result<Weight, String> {
    let bad = || format!("bad weight `{tok}`");
    if let Some((n, d)) = tok.split_once('/') {
        let n: i128 = n.parse().map_err(|_| bad())?;
        let d: i128 = d.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Weight::new(n, d));
    }
    if let Some((int, frac)) = tok.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i128.pow(frac.len() as u32);
        let f: i128 = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * den + f;
        return Ok(Weight::new(if neg { -mag } else { mag }, den));
    }
    tok.parse::<i128>().map(Weight::from_integer).map_err(|_| bad())
}

/// A total map from vertices to colors `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    k: u32,
    colors: Vec<u32>,
}

impl Coloring {
    pub fn new(k: u32, colors: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidColoring("k must be at least 1".into()));
        }
        if let Some((v, c)) = colors
            .iter()
            .enumerate()
            .find(|(_, &c)| c == 0 || c > k)
        {
            return Err(Error::InvalidColoring(format!(
                "vertex {v} has color {c} outside 1..={k}"
            )));
        }
        Ok(Self { k, colors })
    }

    pub fn uniform(k: u32, n: usize, color: u32) -> Result<Self> {
        Self::new(k, vec![color; n])
    }

    pub fn random(k: u32, n: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidColoring("k must be at least 1".into()));
        }
        Ok(Self {
            k,
            colors: (0..n).map(|_| rng.random_range(1..=k)).collect(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn set(&mut self, v: usize, color: u32) -> Result<()> {
        if color == 0 || color > self.k {
            return Err(Error::InvalidColoring(format!(
                "color {color} outside 1..={}",
                self.k
            )));
        }
        self.colors[v] = color;
        Ok(())
    }

    pub fn into_colors(self) -> Vec<u32> {
        self.colors
    }

    /// Applies a renaming of colors; `perm[c - 1]` is the new name of `c`.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self> {
        Self::new(
            self.k,
            self.colors.iter().map(|&c| perm[c as usize - 1]).collect(),
        )
    }

    pub fn check_covers(&self, g: &WeightedGraph) -> Result<()> {
        if self.colors.len() != g.vertex_count() {
            return Err(Error::InvalidColoring(format!(
                "coloring has {} vertices, graph has {}",
                self.colors.len(),
                g.vertex_count()
            )));
        }
        Ok(())
    }

    /// `k <k>` followed by one `c <v> <color>` line per vertex.
    pub fn to_text(&self) -> String {
        let mut out = format!("k {}\n", self.k);
        for (v, c) in self.colors.iter().enumerate() {
            let _ = writeln!(out, "c {v} {c}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut k = None;
        let mut assigned: BTreeMap<usize, u32> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            match toks.as_slice() {
                ["k", kk] if k.is_none() => {
                    k = Some(kk.parse::<u32>().map_err(|_| Error::Parse {
                        line,
                        msg: "bad color count".into(),
                    })?);
                }
                ["c", v, c] if k.is_some() => {
                    let v = parse_usize(Some(v), line, "vertex")?;
                    let c = c.parse::<u32>().map_err(|_| Error::Parse {
                        line,
                        msg: "bad color".into(),
                    })?;
                    if assigned.insert(v, c).is_some() {
                        return Err(Error::Parse {
                            line,
                            msg: format!("vertex {v} colored twice"),
                        });
                    }
                }
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unexpected line `{content}`"),
                    })
                }
            }
        }
        let k = k.ok_or(Error::Parse {
            line: 0,
            msg: "missing `k <k>` line".into(),
        })?;
        let n = assigned.len();
        if let Some((_, (&v, _))) = assigned.iter().enumerate().find(|(i, (&v, _))| *i != v) {
            return Err(Error::InvalidColoring(format!(
                "vertex ids must be 0..{n}; found {v}"
            )));
        }
        Self::new(k, assigned.into_values().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreReport {
    #[serde(serialize_with = "ser_weight")]
    pub proper_weight: Weight,
    #[serde(serialize_with = "ser_weight")]
    pub miscolored_weight: Weight,
    /// Proper weight over total weight; 1 for an edgeless graph.
    #[serde(serialize_with = "ser_weight")]
    pub fraction_proper: Weight,
}

pub(crate) fn ser_weight<S: serde::Serializer>(w: &Weight, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_weight(w))
}

/// Scores a coloring: weight of properly and improperly colored edges.
pub fn score(g: &WeightedGraph, c: &Coloring) -> Result<ScoreReport> {
    c.check_covers(g)?;
    let mut proper = Weight::zero();
    let mut miscolored = Weight::zero();
    for e in g.edges() {
        if c.color(e.u) == c.color(e.v) {
            miscolored += e.w;
        } else {
            proper += e.w;
        }
    }
    let total = proper + miscolored;
    let fraction_proper = if total.is_zero() {
        Weight::one()
    } else {
        proper / total
    };
    Ok(ScoreReport {
        proper_weight: proper,
        miscolored_weight: miscolored,
        fraction_proper,
    })
}

/// Miscolored weight only.
pub fn miscolored_weight(g: &WeightedGraph, c: &Coloring) -> Result<Weight> {
    Ok(score(g, c)?.miscolored_weight)
}

/// Expected properly colored weight of a uniformly random k-coloring.
pub fn random_coloring_expectation(g: &WeightedGraph, k: u32) -> Result<Weight> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok((Weight::one() - Weight::new(1, k as i128)) * g.total_weight())
}

struct Search<'a> {
    k: u32,
    // earlier[v] = (u, w) for every edge with u < v
    earlier: &'a [Vec<(usize, i128)>],
    colors: Vec<u32>,
    best_cost: i128,
    best: Option<Vec<u32>>,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self, v: usize, cost: i128, max_used: u32) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded {
                what: "exact coloring search",
                needed: self.visited as u128,
                budget: self.budget,
            });
        }
        if v == self.colors.len() {
            self.best_cost = cost;
            self.best = Some(self.colors.clone());
            return Ok(());
        }
        // colors beyond max_used + 1 are renamings of max_used + 1
        let limit = (max_used + 1).min(self.k);
        for c in 1..=limit {
            let added: i128 = self.earlier[v]
                .iter()
                .filter(|(u, _)| self.colors[*u] == c)
                .map(|(_, w)| *w)
                .sum();
            let next = cost + added;
            if next >= self.best_cost {
                continue;
            }
            self.colors[v] = c;
            self.run(v + 1, next, max_used.max(c))?;
        }
        Ok(())
    }
}

fn exact_search(
    g: &WeightedGraph,
    k: u32,
    budget: u64,
    initial_bound: Option<i128>,
) -> Result<Option<Vec<u32>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let (_, ws) = g.integer_weights();
    let mut earlier = vec![Vec::new(); g.vertex_count()];
    for (e, w) in g.edges().iter().zip(ws) {
        let (lo, hi) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
        earlier[hi].push((lo, w));
    }
    let mut s = Search {
        k,
        earlier: &earlier,
        colors: vec![1; g.vertex_count()],
        best_cost: initial_bound.unwrap_or(i128::MAX),
        best: None,
        visited: 0,
        budget,
    };
    s.run(0, 0, 0)?;
    Ok(s.best)
}

/// Exact minimum-miscolored-weight k-coloring by branch and bound.
///
/// Ties resolve to the lexicographically smallest assignment. `budget` caps
/// the number of visited search nodes; exceeding it is an error.
pub fn exact_best_coloring(
    g: &WeightedGraph,
    k: u32,
    budget: u64,
) -> Result<(Coloring, ScoreReport)> {
    let colors = exact_search(g, k, budget, None)?
        .expect("an unbounded search always reaches a leaf");
    let coloring = Coloring::new(k, colors)?;
    let report = score(g, &coloring)?;
    Ok((coloring, report))
}

/// True iff some k-coloring leaves no edge miscolored.
pub fn is_k_colorable(g: &WeightedGraph, k: u32, budget: u64) -> Result<bool> {
    // any positive cost prunes, so only proper colorings reach a leaf
    Ok(exact_search(g, k, budget, Some(1))?.is_some())
}

/// Single-vertex recoloring descent from `start` until no move improves.
///
/// The seed fixes the vertex scan order. Each visited vertex moves to its
/// cheapest color (lowest color on ties) when that strictly lowers the
/// miscolored weight.
pub fn local_search(g: &WeightedGraph, k: u32, start: &Coloring, seed: u64) -> Result<Coloring> {
    start.check_covers(g)?;
    if start.k() != k {
        return Err(Error::InvalidColoring(format!(
            "start coloring uses k = {}, expected {k}",
            start.k()
        )));
    }
    let (_, ws) = g.integer_weights();
    let mut adj: Vec<Vec<(usize, i128)>> = vec![Vec::new(); g.vertex_count()];
    for (e, w) in g.edges().iter().zip(ws) {
        adj[e.u].push((e.v, w));
        adj[e.v].push((e.u, w));
    }
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.shuffle(&mut crate::seeded_rng(seed));
    let mut colors = start.colors().to_vec();
    let mut cost_by_color = vec![0i128; k as usize + 1];
    loop {
        let mut improved = false;
        for &v in &order {
            cost_by_color.iter_mut().for_each(|c| *c = 0);
            for &(u, w) in &adj[v] {
                cost_by_color[colors[u] as usize] += w;
            }
            let current = cost_by_color[colors[v] as usize];
            let (best_color, best_cost) = (1..=k)
                .map(|c| (c, cost_by_color[c as usize]))
                .min_by_key(|&(c, cost)| (cost, c))
                .expect("k >= 1");
            if best_cost < current {
                colors[v] = best_color;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Coloring::new(k, colors)
}
