//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails or runs over its time limit.

mod common;

use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::Rng;

use kcolor::csp::{count_satisfied, generate_planted, CspInstance, Constraint};
use kcolor::graph::{is_k_colorable, miscolored_weight, random_coloring_expectation, Coloring, Weight, WeightedGraph};
use kcolor::pcp::{acceptance_probability, gen_label_cover, LongCodeProof};
use kcolor::reduce3::{build_3color_instance, decode_coloring, encode_assignment};
use kcolor::reducek::{decode_k_to_3, encode_3_to_k, extend_padded_coloring, pad_to_k, tensor_build};
use kcolor::spectral::{
    check_claim_infrel, dmr_operator, fourier, influences, low_level_influences, noise_stability, pair_of,
    spectral_radius, stability_sum_report, tsquare_closed_form, tsquare_lower_bound, FourierBasis,
    TabulatedFunction,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_instance(rng: &mut impl Rng, m: usize) -> CspInstance {
    let nx = rng.random_range(1..=4);
    let ny = rng.random_range(1..=4);
    let nz = rng.random_range(1..=4);
    let constraints = (0..m)
        .map(|_| Constraint {
            x: rng.random_range(0..nx),
            y: rng.random_range(0..ny),
            y_negated: rng.random(),
            zk: rng.random_range(0..nz),
            zl: rng.random_range(0..nz),
        })
        .collect();
    CspInstance::new(nx, ny, nz, constraints).unwrap()
}

fn c1_gadget_weight() -> Outcome {
    let mut rng = kcolor::seeded_rng(101);
    for i in 0..200 {
        let m = rng.random_range(0..=12);
        let inst = random_instance(&mut rng, m);
        let out = build_3color_instance(&inst).map_err(|e| e.to_string())?;
        let total = out.graph.total_weight();
        ensure(total == Weight::new(33 * m as i128, 2), || {
            format!("instance {i}: total {total} != 33*{m}/2")
        })?;
    }
    Ok("200 instances, total = 33m/2 exactly".into())
}

fn c2_local_gadget() -> Outcome {
    let mut settings = 0;
    for bits in 0..32u32 {
        let b = |i: u32| bits >> i & 1 == 1;
        let (x, y, yneg, zk, zl) = (b(0), b(1), b(2), b(3), b(4));
        let lit = y != yneg;
        let sat = common::constraint_holds(x, lit, zk, zl);
        let (best, ways) = common::gadget_min_cost(x, y, yneg, zk, zl);
        if sat {
            ensure(best == 0, || format!("setting {bits:05b} satisfied but best = {best}"))?;
        } else {
            ensure(best == 1 && ways > 0, || {
                format!("setting {bits:05b} violated but best = {best}")
            })?;
        }
        settings += 1;
    }
    Ok(format!("{settings} settings (16 truth values x literal sign), 81 colorings each"))
}

fn c3_round_trip() -> Outcome {
    for s in 0..100u64 {
        let mut rng = kcolor::seeded_rng(300 + s);
        let (nx, ny, nz) = (rng.random_range(1..=6), rng.random_range(1..=6), rng.random_range(1..=6));
        let m = rng.random_range(1..=10);
        let (inst, a) = generate_planted(s, nx, ny, nz, m).map_err(|e| e.to_string())?;
        let out = build_3color_instance(&inst).map_err(|e| e.to_string())?;
        let chi = encode_assignment(&inst, &out.layout, &a).map_err(|e| e.to_string())?;
        let mis = miscolored_weight(&out.graph, &chi).map_err(|e| e.to_string())?;
        ensure(mis.is_zero(), || format!("seed {s}: encode miscolors {mis}"))?;
        let dec = decode_coloring(&inst, &out.layout, &out.graph, &chi).map_err(|e| e.to_string())?;
        ensure(dec.satisfied == m && count_satisfied(&inst, &dec.assignment) == m, || {
            format!("seed {s}: decode satisfies {} of {m}", dec.satisfied)
        })?;
    }
    // soundness: every m = 1 shape, then seeded m = 2 and m = 3 instances
    let mut leaves = 0u64;
    let mut instances = 0;
    for yneg in [false, true] {
        for same_z in [false, true] {
            let c = Constraint {
                x: 0,
                y: 0,
                y_negated: yneg,
                zk: 0,
                zl: if same_z { 0 } else { 1 },
            };
            let inst = CspInstance::new(1, 1, 2, vec![c]).unwrap();
            leaves += common::soundness_sweep(&inst)?.leaves;
            instances += 1;
        }
    }
    let mut rng = kcolor::seeded_rng(333);
    for (m, count) in [(2, 40), (3, 25)] {
        for _ in 0..count {
            let nx = rng.random_range(1..=2);
            let ny = rng.random_range(1..=2);
            let nz = rng.random_range(1..=2);
            let constraints = (0..m)
                .map(|_| Constraint {
                    x: rng.random_range(0..nx),
                    y: rng.random_range(0..ny),
                    y_negated: rng.random(),
                    zk: rng.random_range(0..nz),
                    zl: rng.random_range(0..nz),
                })
                .collect();
            let inst = CspInstance::new(nx, ny, nz, constraints).unwrap();
            leaves += common::soundness_sweep(&inst)?.leaves;
            instances += 1;
        }
    }
    Ok(format!(
        "100 planted round trips; soundness sweep over {instances} instances, {leaves} colorings with tau < m/2"
    ))
}

fn c4_tensor() -> Outcome {
    let g = WeightedGraph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let (h, layout) = tensor_build(&g, 6).map_err(|e| e.to_string())?;
    ensure(h.vertex_count() == 18, || format!("|V(H)| = {}", h.vertex_count()))?;
    ensure(h.total_weight() == Weight::from(96), || format!("weight {}", h.total_weight()))?;
    ensure(h.total_weight() <= Weight::from(36 * 3), || "weight exceeds k^2 m".into())?;
    let lifted = encode_3_to_k(&layout, &Coloring::new(3, vec![1, 2, 3]).unwrap()).map_err(|e| e.to_string())?;
    ensure(miscolored_weight(&h, &lifted).unwrap().is_zero(), || "encoded coloring not proper".into())?;
    let mut rng = kcolor::seeded_rng(404);
    for s in 0..100 {
        let chi_h = Coloring::random(6, 18, &mut rng).unwrap();
        let c_total = common::c_total_by_definition(&g, &layout, &chi_h);
        let (chi_g, cert) = decode_k_to_3(&g, &layout, &chi_h).map_err(|e| e.to_string())?;
        ensure(cert.c_total == c_total, || format!("sample {s}: certificate C_total {} != {c_total}", cert.c_total))?;
        let mis = miscolored_weight(&g, &chi_g).unwrap();
        ensure(mis <= c_total / Weight::from(6), || format!("sample {s}: {mis} > {c_total}/6"))?;
    }
    Ok("triangle k=6: 18 vertices, weight 96 <= 108; 100 decodes within C_total/k".into())
}

fn c5_padding() -> Outcome {
    let mut rng = kcolor::seeded_rng(505);
    let mut checked = 0;
    for _ in 0..6 {
        let n = rng.random_range(3..=6);
        let part: Vec<u32> = (0..n).map(|v| if v < 3 { v as u32 } else { rng.random_range(0..3) }).collect();
        let mut g = WeightedGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if part[u] != part[v] && rng.random_bool(0.7) {
                    g.add_edge(u, v, Weight::one()).unwrap();
                }
            }
        }
        let mm = Weight::from(g.edge_count() as i128);
        for (k, l) in [(4u32, 1i128), (5, 2)] {
            let (h, pl) = pad_to_k(&g, 3, k).map_err(|e| e.to_string())?;
            let want = mm + Weight::from(2 * l) * mm / Weight::from(3) + mm * Weight::from(l - 1) / Weight::from(99);
            ensure(h.total_weight() == want, || format!("k={k}: {} != {want}", h.total_weight()))?;
            let colorable = is_k_colorable(&h, k, 10_000_000).map_err(|e| e.to_string())?;
            ensure(colorable, || format!("k={k}: padded graph not {k}-colorable"))?;
            let base = Coloring::new(3, part.iter().map(|p| p + 1).collect()).unwrap();
            let ext = extend_padded_coloring(&pl, &base).map_err(|e| e.to_string())?;
            ensure(miscolored_weight(&h, &ext).unwrap().is_zero(), || "extension not proper".into())?;
            checked += 1;
        }
    }
    Ok(format!("{checked} padded graphs: weight formula exact, k-colorable"))
}

fn c6_spectral() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for q in 6..=16usize {
        let t = dmr_operator(q).map_err(|e| e.to_string())?;
        let n = q * q;
        ensure(t.check_symmetric(0.0), || format!("q={q}: not symmetric"))?;
        ensure(t.is_doubly_stochastic(1e-12), || format!("q={q}: not doubly stochastic"))?;
        ensure(t.has_zero_diagonal(), || format!("q={q}: non-zero diagonal"))?;
        let exact = common::dmr_exact(q as i64);
        for i in 0..n {
            for j in 0..n {
                let e = exact[i][j];
                let v = *e.numer() as f64 / *e.denom() as f64;
                ensure((t.entry(i, j) - v).abs() <= 1e-15, || format!("q={q}: entry ({i},{j}) differs"))?;
            }
        }
        let rho = spectral_radius(&t).map_err(|e| e.to_string())?;
        let bound = 4.0 / (q as f64 - 1.0);
        ensure(rho <= bound + 1e-9, || format!("q={q}: radius {rho} > {bound}"))?;
        if q <= 10 {
            let power = common::second_eigen_power(t.entries(), n, 3000);
            ensure((power - rho).abs() < 1e-6, || format!("q={q}: power {power} vs eigen-solver {rho}"))?;
        }
        worst_ratio = worst_ratio.max(rho / bound);
        let sq = t.square();
        let lb = tsquare_lower_bound(q);
        for i in 0..n {
            for j in 0..n {
                let cf = tsquare_closed_form(q, pair_of(i, q), pair_of(j, q));
                ensure((sq[i * n + j] - cf).abs() <= 1e-12, || format!("q={q}: T^2 ({i},{j}) differs"))?;
                ensure(cf >= lb - 1e-15, || format!("q={q}: T^2 entry below lower bound"))?;
            }
        }
        if q <= 8 {
            let sq_exact = common::square_exact(&exact);
            for i in 0..n {
                for j in 0..n {
                    let e = sq_exact[i][j];
                    let v = *e.numer() as f64 / *e.denom() as f64;
                    ensure((v - sq[i * n + j]).abs() <= 1e-15, || format!("q={q}: exact square differs"))?;
                }
            }
        }
    }
    Ok(format!("q=6..16 all within 4/(q-1); max radius/bound = {worst_ratio:.4}"))
}

fn c7_fourier() -> Outcome {
    let mut rng = kcolor::seeded_rng(707);
    let basis = FourierBasis::new(3).unwrap();
    let tol = 1e-10;
    for s in 0..100 {
        let n = rng.random_range(1..=3);
        let f = TabulatedFunction::random_scalar(3, n, &mut rng).unwrap();
        let coeffs = &fourier(&f, &basis).unwrap()[0];
        let parseval: f64 = coeffs.iter().map(|c| c * c).sum();
        ensure((parseval - f.norm_sq()).abs() <= tol, || format!("table {s}: Parseval off"))?;
        let inf = influences(&f, &basis, n).unwrap();
        ensure(inf.max_route_gap() <= tol, || format!("table {s}: influence routes differ"))?;
        let rho = rng.random_range(-0.5..1.0);
        let st = noise_stability(&f, &basis, rho).unwrap();
        ensure((st.operator - st.fourier).abs() <= tol, || format!("table {s}: stability routes differ"))?;
    }
    for s in 0..100 {
        let n = rng.random_range(1..=3);
        let f = TabulatedFunction::random_simplex(3, n, 3, &mut rng).unwrap();
        for t in 1..=n {
            let sum: f64 = low_level_influences(&f, &basis, t).unwrap().iter().sum();
            ensure(sum <= t as f64 + tol, || format!("simplex table {s}: sum Inf^<={t} = {sum}"))?;
        }
        let inf = influences(&f, &basis, n).unwrap();
        ensure(inf.max_route_gap() <= tol, || format!("simplex table {s}: routes differ"))?;
    }
    let mut worst: f64 = f64::INFINITY;
    for s in 0..200 {
        let f = TabulatedFunction::random_scalar(3, 4, &mut rng).unwrap();
        let i = s % 2;
        let t = 1 + (s / 2) % 2;
        let c = check_claim_infrel(&f, i, t).map_err(|e| e.to_string())?;
        ensure(c.holds, || format!("function {s}: {} > {}", c.lhs, c.rhs))?;
        worst = worst.min(c.rhs - c.lhs);
    }
    Ok(format!("300 tables agree within 1e-10; pairing-claim min slack {worst:.3e} over 200 functions"))
}

fn c8_pcp() -> Outcome {
    let mut perturbed = 0;
    for s in 0..20u64 {
        let r = 1 + (s as usize % 2);
        let k = if s % 4 < 2 { 4 } else { 6 };
        let v_count = 2 + (s as usize % 3);
        let (inst, lab) = gen_label_cover(s, 2, v_count, 2, r, true).map_err(|e| e.to_string())?;
        let lab = lab.unwrap();
        let mut proof = LongCodeProof::from_labeling(&inst, &lab, k).map_err(|e| e.to_string())?;
        let p = acceptance_probability(&inst, &proof, u64::MAX).map_err(|e| e.to_string())?.probability;
        ensure(p == Ratio::one(), || format!("instance {s}: long-code acceptance {p}"))?;
        let mut rng = kcolor::seeded_rng(800 + s);
        let used: Vec<usize> = inst.edges.iter().map(|e| e.v).collect();
        let v = used[rng.random_range(0..used.len())];
        // a value equal to one of the point's own coordinates is never rejected,
        // so the new value is drawn from the colors the point does not use
        let (idx, color) = loop {
            let idx = rng.random_range(0..proof.tables[v].len());
            let coords: Vec<u32> = (0..proof.arity).map(|p| (idx / k.pow(p as u32) % k) as u32 + 1).collect();
            let free: Vec<u32> = (1..=k as u32).filter(|c| !coords.contains(c)).collect();
            if !free.is_empty() {
                break (idx, free[rng.random_range(0..free.len())]);
            }
        };
        proof.tables[v][idx] = color;
        let q = acceptance_probability(&inst, &proof, u64::MAX).map_err(|e| e.to_string())?.probability;
        ensure(q < p, || format!("instance {s}: perturbation did not lower acceptance ({q})"))?;
        perturbed += 1;
    }
    for q in [4usize, 6, 8] {
        let f = TabulatedFunction::from_coloring(q * q, 1, q, |y| y[0] % q).unwrap();
        let rep = stability_sum_report(&f, &dmr_operator(q).unwrap(), 1, 1.0, 1.0).map_err(|e| e.to_string())?;
        ensure(rep.stability_sum == 0.0, || format!("q={q}: dictator stability {}", rep.stability_sum))?;
    }
    Ok(format!("20 planted proofs accepted with probability 1; {perturbed} perturbations strictly lower; dictator stability 0"))
}

fn c9_baseline() -> Outcome {
    let mut rng = kcolor::seeded_rng(909);
    let mut cases = 0;
    for _ in 0..20 {
        let n = rng.random_range(2..=7);
        let mut g = WeightedGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.5) {
                    g.add_edge(u, v, Weight::new(rng.random_range(1..=9), rng.random_range(1..=4))).unwrap();
                }
            }
        }
        for k in [2, 3, 4] {
            let mean = common::brute_force_mean_proper(&g, k);
            let want = (Weight::one() - Weight::new(1, k as i128)) * g.total_weight();
            ensure(mean == want, || format!("n={n} k={k}: mean {mean} != {want}"))?;
            ensure(random_coloring_expectation(&g, k).unwrap() == want, || "library expectation differs".into())?;
            cases += 1;
        }
    }
    Ok(format!("{cases} graph/k pairs: mean over all colorings = (1-1/k) W exactly"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("1 gadget weight identity", 5, c1_gadget_weight),
        ("2 local-gadget oracle", 1, c2_local_gadget),
        ("3 completeness/soundness round trip", 120, c3_round_trip),
        ("4 tensor lemmas", 30, c4_tensor),
        ("5 padding arithmetic", 10, c5_padding),
        ("6 spectral bound", 10, c6_spectral),
        ("7 Fourier suite", 60, c7_fourier),
        ("8 verifier completeness", 120, c8_pcp),
        ("9 baseline identity", 30, c9_baseline),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(limit);
        match (&outcome, over) {
            (Ok(detail), false) => println!("PASS  criterion {name} ({:.2}s): {detail}", elapsed.as_secs_f64()),
            (Ok(detail), true) => {
                failed += 1;
                println!("FAIL  criterion {name} ({:.2}s > {limit}s limit): {detail}", elapsed.as_secs_f64());
            }
            (Err(msg), _) => {
                failed += 1;
                println!("FAIL  criterion {name} ({:.2}s): {msg}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
