use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kcolor::csp::{self, Assignment, CspInstance};
use kcolor::graph::{self, format_weight, Coloring, WeightedGraph};
use kcolor::pcp::{self, LabelCoverInstance, Labeling, LongCodeProof};
use kcolor::pipeline::{run_verify, VerifyConfig};
use kcolor::reduce3::{self, GadgetLayout};
use kcolor::reducek;
use kcolor::spectral;
use kcolor::Error;

#[derive(Parser)]
#[command(name = "kcolor", version, about = "Reductions, spectral checks and verifier simulation for Max k-Colorable Subgraph")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search-node / enumeration budget.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for artifacts and report copies (JSON and TSV).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Constraint systems.
    #[command(subcommand)]
    Csp(CspCmd),
    /// Instance reductions.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// End-to-end lemma checks.
    Verify(VerifyArgs),
    /// Noise operators and spectral radii.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Label cover and the verifier.
    #[command(subcommand)]
    Pcp(PcpCmd),
    /// Scoring and solving colorings.
    #[command(subcommand)]
    Graph(GraphCmd),
}

#[derive(Subcommand)]
enum CspCmd {
    /// Generate an instance (planted unless --random).
    Gen {
        #[arg(long, default_value_t = 4)]
        nx: usize,
        #[arg(long, default_value_t = 4)]
        ny: usize,
        #[arg(long, default_value_t = 4)]
        nz: usize,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long)]
        random: bool,
    },
    /// Exact maximum number of satisfiable constraints.
    Solve { instance: PathBuf },
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// CSP to weighted 3-coloring.
    #[command(name = "3color")]
    ThreeColor { instance: PathBuf },
    /// Unit-weight 3-coloring instance to k-coloring (k divisible by 3).
    Kcolor {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
    },
    /// Pad a K-coloring instance to k = K + 1 or K + 2 colors.
    Pad {
        graph: PathBuf,
        #[arg(long = "base-k")]
        base_k: u32,
        #[arg(long)]
        k: u32,
    },
    /// Expand rational weights into parallel unit edges.
    Unweight {
        graph: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
    /// Color the reduced graph from an assignment.
    Encode3 {
        instance: PathBuf,
        assignment: PathBuf,
    },
    /// Read an assignment back from a coloring of the reduced graph.
    Decode3 {
        instance: PathBuf,
        coloring: PathBuf,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long = "m-max", default_value_t = 8)]
    m_max: usize,
    #[arg(long, default_value_t = 3)]
    nx: usize,
    #[arg(long, default_value_t = 3)]
    ny: usize,
    #[arg(long, default_value_t = 3)]
    nz: usize,
    #[arg(long, default_value_t = 6)]
    k: u32,
    #[arg(long = "tensor-samples", default_value_t = 50)]
    tensor_samples: usize,
    /// Record wall-clock times per stage (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum SpectralCmd {
    /// Spectral radius of the zero-diagonal operator against 4/(q-1).
    Report {
        /// Values of q; defaults to 6..=16.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        q: Vec<usize>,
    },
    /// Dump an operator matrix.
    Operator {
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = OperatorKind::Dmr)]
        kind: OperatorKind,
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OperatorKind {
    Dmr,
    Beckner,
}

#[derive(Subcommand)]
enum PcpCmd {
    /// Generate a 2-to-1 label cover instance.
    Gen {
        #[arg(long = "u", default_value_t = 2)]
        u_count: usize,
        #[arg(long = "v", default_value_t = 3)]
        v_count: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long = "R", default_value_t = 1)]
        r: usize,
        /// Do not plant a satisfying labeling.
        #[arg(long)]
        unsat: bool,
        /// Also emit the Long Code proof of the planted labeling.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Exact acceptance probability and influence decoding.
    Simulate {
        instance: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, conflicts_with = "labeling")]
        proof: Option<PathBuf>,
        /// Use the Long Code of this labeling as the proof.
        #[arg(long)]
        labeling: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Monte Carlo samples to run alongside the exact value.
        #[arg(long, default_value_t = 0)]
        samples: u64,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    Score { graph: PathBuf, coloring: PathBuf },
    Solve {
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        /// Local search from a random coloring instead of the exact solver.
        #[arg(long)]
        local: bool,
    },
}

enum Failure {
    Error(Error),
    Lemma(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Error(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Error> {
    Ok(fs::read_to_string(path)?)
}

fn write_artifact(g: &Global, name: &str, contents: &str) -> Result<(), Error> {
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Flattens a JSON value into `key\tvalue` lines.
fn tsv_of(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix}\t{s}\n")),
            other => out.push_str(&format!("{prefix}\t{other}\n")),
        }
    }
    let mut out = String::from("key\tvalue\n");
    walk("", v, &mut out);
    out
}

/// Prints a report in the chosen format and mirrors it into `--out`.
fn emit(g: &Global, name: &str, report: &Value, tsv: Option<String>) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(report)?;
    let tsv = tsv.unwrap_or_else(|| tsv_of(report));
    write_artifact(g, &format!("{name}.json"), &format!("{json}\n"))?;
    write_artifact(g, &format!("{name}.tsv"), &tsv)?;
    match g.format {
        Format::Json => print_out(&format!("{json}\n")),
        Format::Tsv => print_out(&tsv),
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_out(text: &str) -> Result<(), Error> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global.clone();
    let result = match cli.cmd {
        Cmd::Csp(c) => run_csp(&g, c),
        Cmd::Reduce(c) => run_reduce(&g, c),
        Cmd::Verify(a) => run_verify_cmd(&g, a),
        Cmd::Spectral(c) => run_spectral(&g, c),
        Cmd::Pcp(c) => run_pcp(&g, c),
        Cmd::Graph(c) => run_graph(&g, c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 2 } else { 1 })
        }
        Err(Failure::Lemma(msg)) => {
            eprintln!("lemma check failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run_csp(g: &Global, cmd: CspCmd) -> CmdResult {
    match cmd {
        CspCmd::Gen { nx, ny, nz, m, random } => {
            if random {
                let inst = csp::generate_random(g.seed, nx, ny, nz, m)?;
                write_artifact(g, "instance.json", &inst.to_json())?;
                print_out(&format!("{}\n", inst.to_json()))?;
            } else {
                let (inst, a) = csp::generate_planted(g.seed, nx, ny, nz, m)?;
                write_artifact(g, "instance.json", &inst.to_json())?;
                write_artifact(g, "planted.json", &a.to_json())?;
                print_out(&format!("{}\n", inst.to_json()))?;
            }
        }
        CspCmd::Solve { instance } => {
            let inst = CspInstance::from_json(&read(&instance)?)?;
            let (a, best) = csp::exact_max_sat(&inst, g.budget)?;
            let report = json!({
                "m": inst.m(),
                "satisfied": best,
                "assignment": serde_json::from_str::<Value>(&a.to_json())?,
            });
            write_artifact(g, "assignment.json", &a.to_json())?;
            emit(g, "solve", &report, None)?;
        }
    }
    Ok(())
}

fn run_reduce(g: &Global, cmd: ReduceCmd) -> CmdResult {
    match cmd {
        ReduceCmd::ThreeColor { instance } => {
            let inst = CspInstance::from_json(&read(&instance)?)?;
            let out = reduce3::build_3color_instance(&inst)?;
            let total = out.graph.total_weight();
            let expected = reduce3::expected_total_weight(inst.m());
            write_artifact(g, "graph.wg", &out.graph.to_text())?;
            write_artifact(g, "layout.json", &out.layout.to_json())?;
            let report = json!({
                "m": inst.m(),
                "vertices": out.graph.vertex_count(),
                "edges": out.graph.edge_count(),
                "total_weight": format_weight(&total),
                "expected_total_weight": format_weight(&expected),
                "identity": format!("{} = 33*{}/2", format_weight(&total), inst.m()),
                "identity_holds": total == expected,
            });
            emit(g, "reduce3", &report, None)?;
            if total != expected {
                return Err(Failure::Lemma("total weight differs from 33m/2".into()));
            }
        }
        ReduceCmd::Kcolor { graph, k } => {
            let src = WeightedGraph::from_text(&read(&graph)?)?;
            let (h, layout) = reducek::tensor_build(&src, k)?;
            write_artifact(g, "graph.wg", &h.to_text())?;
            write_artifact(g, "layout.json", &layout.to_json())?;
            let total = h.total_weight();
            let closed = layout.closed_form_weight();
            let report = json!({
                "k": k,
                "vertices": h.vertex_count(),
                "edges": h.edge_count(),
                "total_weight": format_weight(&total),
                "closed_form_weight": format_weight(&closed),
                "k2m": (k as usize * k as usize * src.edge_count()).to_string(),
                "identity_holds": total == closed,
            });
            emit(g, "reducek", &report, None)?;
            if total != closed {
                return Err(Failure::Lemma("tensor weight differs from the closed form".into()));
            }
        }
        ReduceCmd::Pad { graph, base_k, k } => {
            let src = WeightedGraph::from_text(&read(&graph)?)?;
            let (h, layout) = reducek::pad_to_k(&src, base_k, k)?;
            write_artifact(g, "graph.wg", &h.to_text())?;
            write_artifact(g, "layout.json", &layout.to_json())?;
            let total = h.total_weight();
            let closed = layout.closed_form_weight();
            let report = json!({
                "K": base_k,
                "k": k,
                "M": src.edge_count(),
                "total_weight": format_weight(&total),
                "closed_form_weight": format_weight(&closed),
                "identity_holds": total == closed,
            });
            emit(g, "pad", &report, None)?;
            if total != closed {
                return Err(Failure::Lemma("padded weight differs from the closed form".into()));
            }
        }
        ReduceCmd::Unweight { graph, cap } => {
            let src = WeightedGraph::from_text(&read(&graph)?)?;
            let out = reducek::unweight(&src, cap)?;
            write_artifact(g, "graph.wg", &out.graph.to_text())?;
            let mut rng = kcolor::seeded_rng(g.seed);
            let invariant = if src.vertex_count() == 0 {
                Value::Null
            } else {
                let c = Coloring::random(3, src.vertex_count(), &mut rng)?;
                let a = graph::score(&src, &c)?.fraction_proper;
                let b = graph::score(&out.graph, &c)?.fraction_proper;
                json!({"fraction_before": format_weight(&a), "fraction_after": format_weight(&b), "equal": a == b})
            };
            let report = json!({
                "scale": out.scale.to_string(),
                "edges": out.graph.edge_count(),
                "sampled_coloring": invariant,
            });
            emit(g, "unweight", &report, None)?;
        }
        ReduceCmd::Encode3 { instance, assignment } => {
            let inst = CspInstance::from_json(&read(&instance)?)?;
            let a = Assignment::from_json(&read(&assignment)?)?;
            let out = reduce3::build_3color_instance(&inst)?;
            let chi = reduce3::encode_assignment(&inst, &out.layout, &a)?;
            let mis = graph::miscolored_weight(&out.graph, &chi)?;
            let sat = csp::count_satisfied(&inst, &a);
            write_artifact(g, "coloring.txt", &chi.to_text())?;
            let report = json!({
                "m": inst.m(),
                "satisfied": sat,
                "miscolored_weight": format_weight(&mis),
                "bound": (inst.m() - sat).to_string(),
                "bound_holds": mis <= kcolor::Weight::from((inst.m() - sat) as i128),
            });
            emit(g, "encode3", &report, None)?;
        }
        ReduceCmd::Decode3 { instance, coloring } => {
            let inst = CspInstance::from_json(&read(&instance)?)?;
            let chi = Coloring::from_text(&read(&coloring)?)?;
            let out = reduce3::build_3color_instance(&inst)?;
            let layout: &GadgetLayout = &out.layout;
            let dec = reduce3::decode_coloring(&inst, layout, &out.graph, &chi)?;
            write_artifact(g, "assignment.json", &dec.assignment.to_json())?;
            let m = kcolor::Weight::from(inst.m() as i128);
            let holds = !dec.guarantee_applies || kcolor::Weight::from(dec.satisfied as i128) >= m - dec.tau;
            let report = json!({
                "m": inst.m(),
                "tau": format_weight(&dec.tau),
                "repaired_tau": format_weight(&dec.repaired_tau),
                "guarantee_applies": dec.guarantee_applies,
                "satisfied": dec.satisfied,
                "assignment": serde_json::from_str::<Value>(&dec.assignment.to_json())?,
            });
            emit(g, "decode3", &report, None)?;
            if !holds {
                return Err(Failure::Lemma("decoded assignment satisfies fewer than m - tau".into()));
            }
        }
    }
    Ok(())
}

fn run_verify_cmd(g: &Global, a: VerifyArgs) -> CmdResult {
    let cfg = VerifyConfig {
        seed: g.seed,
        instances: a.instances,
        nx: a.nx,
        ny: a.ny,
        nz: a.nz,
        m_max: a.m_max,
        k: a.k,
        tensor_samples: a.tensor_samples,
        budget: g.budget,
        timing: a.timing,
    };
    let report = run_verify(&cfg)?;
    let value = serde_json::to_value(&report)?;
    emit(g, "verify", &value, Some(report.to_tsv()))?;
    if let Some(first) = report.failures().next() {
        let n = report.failures().count();
        return Err(Failure::Lemma(format!(
            "{n} check(s) failed, first: [{}] {}: {} {} {}",
            first.stage,
            first.name,
            first.lhs,
            first.relation.symbol(),
            first.rhs
        )));
    }
    Ok(())
}

fn run_spectral(g: &Global, cmd: SpectralCmd) -> CmdResult {
    match cmd {
        SpectralCmd::Report { q } => {
            let qs = if q.is_empty() { (6..=16).collect() } else { q };
            let rows = qs
                .iter()
                .map(|&q| spectral::radius_row(q))
                .collect::<Result<Vec<_>, _>>()?;
            let mut tsv = String::from("q\tradius\tradius_power\tbound\ttsquare_gap\tpass\n");
            for r in &rows {
                tsv.push_str(&format!(
                    "{}\t{:.12}\t{:.12}\t{:.12}\t{:.3e}\t{}\n",
                    r.q, r.radius, r.radius_power, r.bound, r.tsquare_gap, r.pass
                ));
            }
            let all = rows.iter().all(|r| r.pass);
            let report = json!({ "rows": rows, "all_pass": all });
            emit(g, "spectral", &report, Some(tsv))?;
            if !all {
                return Err(Failure::Lemma("spectral bound check failed".into()));
            }
        }
        SpectralCmd::Operator { q, kind, rho } => {
            let op = match kind {
                OperatorKind::Dmr => spectral::dmr_operator(q)?,
                OperatorKind::Beckner => spectral::beckner(q, rho)?,
            };
            let value: Value = serde_json::from_str(&op.to_json())?;
            emit(g, "operator", &value, None)?;
        }
    }
    Ok(())
}

fn run_pcp(g: &Global, cmd: PcpCmd) -> CmdResult {
    match cmd {
        PcpCmd::Gen { u_count, v_count, degree, r, unsat, k } => {
            let (inst, lab) = pcp::gen_label_cover(g.seed, u_count, v_count, degree, r, !unsat)?;
            write_artifact(g, "label_cover.json", &inst.to_json())?;
            if let Some(l) = &lab {
                write_artifact(g, "labeling.json", &serde_json::to_string(l)?)?;
                if let Some(k) = k {
                    let proof = LongCodeProof::from_labeling(&inst, l, k)?;
                    write_artifact(g, "proof.json", &proof.to_json())?;
                }
            }
            print_out(&format!("{}\n", inst.to_json()))?;
        }
        PcpCmd::Simulate { instance, k, r, proof, labeling, t, delta, samples } => {
            let inst = LabelCoverInstance::from_json(&read(&instance)?)?;
            if let Some(r) = r {
                if r != inst.r {
                    return Err(Error::InvalidParameter(format!("--R {r} but the instance has R = {}", inst.r)).into());
                }
            }
            let proof = match (proof, labeling) {
                (Some(p), _) => LongCodeProof::from_json(&read(&p)?)?,
                (None, Some(l)) => {
                    let lab: Labeling = serde_json::from_str(&read(&l)?)?;
                    LongCodeProof::from_labeling(&inst, &lab, k)?
                }
                (None, None) => {
                    return Err(Error::InvalidParameter("pass --proof or --labeling".into()).into())
                }
            };
            if proof.k != k {
                return Err(Error::InvalidParameter(format!("proof uses k = {}, --k is {k}", proof.k)).into());
            }
            let acc = pcp::acceptance_probability(&inst, &proof, g.budget)?;
            let dec = pcp::influence_decode(&inst, &proof, t, delta)?;
            let mut report = json!({
                "k": k,
                "R": inst.r,
                "acceptance": acc,
                "influence_decode": dec,
            });
            if samples > 0 {
                let mut rng = kcolor::seeded_rng(g.seed);
                let mc = pcp::monte_carlo_acceptance(&inst, &proof, samples, &mut rng)?;
                report["monte_carlo"] = serde_json::to_value(mc)?;
            }
            emit(g, "simulate", &report, None)?;
        }
    }
    Ok(())
}

fn run_graph(g: &Global, cmd: GraphCmd) -> CmdResult {
    match cmd {
        GraphCmd::Score { graph, coloring } => {
            let wg = WeightedGraph::from_text(&read(&graph)?)?;
            let c = Coloring::from_text(&read(&coloring)?)?;
            let rep = graph::score(&wg, &c)?;
            emit(g, "score", &serde_json::to_value(rep)?, None)?;
        }
        GraphCmd::Solve { graph, k, local } => {
            let wg = WeightedGraph::from_text(&read(&graph)?)?;
            let (c, method) = if local {
                let mut rng = kcolor::seeded_rng(g.seed);
                let start = Coloring::random(k, wg.vertex_count(), &mut rng)?;
                (graph::local_search(&wg, k, &start, g.seed)?, "local_search")
            } else {
                (graph::exact_best_coloring(&wg, k, g.budget)?.0, "exact")
            };
            let rep = graph::score(&wg, &c)?;
            write_artifact(g, "coloring.txt", &c.to_text())?;
            let report = json!({
                "method": method,
                "k": k,
                "score": rep,
                "random_expectation": format_weight(&graph::random_coloring_expectation(&wg, k)?),
                "coloring": c.colors(),
            });
            emit(g, "solve", &report, None)?;
        }
    }
    Ok(())
}
