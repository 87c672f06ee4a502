//! Command-line front end.
//!
//! Every command is deterministic given its flags; the Monte Carlo command
//! refuses to run without an explicit seed. Node ids are 1-based on the
//! command line and in all output, matching the edge-list format. CSV
//! values are printed with 12 significant digits so downstream tolerances
//! are set by the mathematics, not the formatting.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numerical
//! failure (no convergence, singular system, degenerate rescale).

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::closed_forms::{self, ClosedFormError};
use crate::graph::{
    generate, read_edge_list, write_edge_list, DirectedGraph, GraphError, StructureSpec,
    WeightVector,
};
use crate::linalg::LinalgError;
use crate::perturbation::{self, PerturbError};
use crate::random_walk::{self, WalkConfig, WalkError};
use crate::sensitivity::{self, SensitivityError, SweepRecord, SweepSource, FD_STEP};
use crate::solver::{self, Engine, SolveOptions, SolverError, Variant};

#[derive(Parser)]
#[command(
    name = "structrank",
    version,
    about = "PageRank variants, closed-form ranks, damping sweeps, and weight perturbations"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    R1,
    R2,
    R3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    /// Power iteration on the normalized rank
    Power,
    /// Dense LU solve of the rank system
    Lu,
    /// Fixed-point iteration on the non-normalized system
    Neumann,
}

impl EngineArg {
    fn to_engine(self) -> Engine {
        match self {
            EngineArg::Power => Engine::Power,
            EngineArg::Lu => Engine::DenseLu,
            EngineArg::Neumann => Engine::Neumann,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Line,
    Backlink,
    Attached,
    Split,
    Complete,
    CompleteOut,
    CompleteToLine,
    LineToComplete,
    Share,
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::Line => "line",
            KindArg::Backlink => "backlink",
            KindArg::Attached => "attached",
            KindArg::Split => "split",
            KindArg::Complete => "complete",
            KindArg::CompleteOut => "complete-out",
            KindArg::CompleteToLine => "complete-to-line",
            KindArg::LineToComplete => "line-to-complete",
            KindArg::Share => "share",
        }
    }
}

#[derive(Args, Clone)]
struct StructureArgs {
    /// Structure kind
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Line length
    #[arg(long)]
    nl: Option<usize>,
    /// Complete-graph size
    #[arg(long)]
    ng: Option<usize>,
    /// 1-based line position of the attachment
    #[arg(long)]
    j: Option<usize>,
}

fn build_spec(
    kind: KindArg,
    nl: Option<usize>,
    ng: Option<usize>,
    j: Option<usize>,
) -> Result<StructureSpec, CmdError> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| CmdError::Usage(format!("--{flag} is required for kind {}", kind.name())))
    };
    let spec = match kind {
        KindArg::Line => StructureSpec::line(need(nl, "nl")?),
        KindArg::Backlink => StructureSpec::backlink(need(nl, "nl")?),
        KindArg::Attached => StructureSpec::attached(need(nl, "nl")?, need(j, "j")?),
        KindArg::Split => StructureSpec::split(need(nl, "nl")?, need(j, "j")?),
        KindArg::Complete => StructureSpec::complete(need(ng, "ng")?),
        KindArg::CompleteOut => StructureSpec::complete_with_outlink(need(ng, "ng")?),
        KindArg::CompleteToLine => {
            StructureSpec::complete_to_line(need(nl, "nl")?, need(ng, "ng")?, need(j, "j")?)
        }
        KindArg::LineToComplete => {
            StructureSpec::line_to_complete(need(nl, "nl")?, need(ng, "ng")?, need(j, "j")?)
        }
        KindArg::Share => StructureSpec::share(need(nl, "nl")?, need(ng, "ng")?, need(j, "j")?),
    };
    spec.validate()?;
    Ok(spec)
}

impl StructureArgs {
    fn to_spec(&self) -> Result<StructureSpec, CmdError> {
        build_spec(self.kind, self.nl, self.ng, self.j)
    }
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Edge-list file (alternative to --kind)
    #[arg(long, conflicts_with_all = ["kind", "nl", "ng", "j"])]
    graph: Option<PathBuf>,
    /// Structure kind (alternative to --graph)
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Line length
    #[arg(long)]
    nl: Option<usize>,
    /// Complete-graph size
    #[arg(long)]
    ng: Option<usize>,
    /// 1-based line position of the attachment
    #[arg(long)]
    j: Option<usize>,
}

impl SourceArgs {
    fn to_source(&self) -> Result<SweepSource, CmdError> {
        match (&self.graph, self.kind) {
            (Some(path), None) => Ok(SweepSource::Graph(load_graph(path)?)),
            (None, Some(kind)) => {
                Ok(SweepSource::Structure(build_spec(kind, self.nl, self.ng, self.j)?))
            }
            _ => Err(CmdError::Usage("give exactly one of --graph or --kind".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a PageRank variant on an edge-list file; prints node,value CSV
    Solve {
        /// Edge-list file
        #[arg(long)]
        graph: PathBuf,
        /// Damping factor in (0,1)
        #[arg(long, default_value_t = 0.85)]
        c: f64,
        #[arg(long, value_enum, default_value_t = VariantArg::R1)]
        variant: VariantArg,
        /// Solution engine (r3 always takes its own path)
        #[arg(long, value_enum, default_value_t = EngineArg::Lu)]
        engine: EngineArg,
        /// Per-node weights file, whitespace-separated reals
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Generate a structured graph as an edge list
    Generate {
        #[command(flatten)]
        structure: StructureArgs,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate analytic rank formulas; prints node,r2,r1 CSV plus a normalizer comment
    ClosedForm {
        #[command(flatten)]
        structure: StructureArgs,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
    /// Tabulate rank against the damping factor; prints c,node,value CSV
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = VariantArg::R1)]
        variant: VariantArg,
        /// 1-based nodes to record, comma-separated (all nodes when omitted)
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 0.01)]
        c_lo: f64,
        #[arg(long, default_value_t = 0.99)]
        c_hi: f64,
        #[arg(long, default_value_t = 99)]
        steps: usize,
        /// Also write the sweep as a standalone SVG line chart
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Maximize a node's normalized rank over the damping factor
    Cmax {
        #[command(flatten)]
        structure: StructureArgs,
        /// 1-based node id
        #[arg(long)]
        node: usize,
        #[arg(long, default_value_t = 0.001)]
        c_lo: f64,
        #[arg(long, default_value_t = 0.999)]
        c_hi: f64,
    },
    /// Rank derivatives with respect to the damping factor
    #[command(subcommand)]
    Derivative(DerivativeCmd),
    /// Weight-perturbation deltas and the analytic loss bound
    #[command(subcommand)]
    Perturb(PerturbCmd),
    /// Contrast normalized and non-normalized ranks on two built-in graphs
    Compare {
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
    /// Monte Carlo rank estimation (requires an explicit seed)
    Walk {
        /// Edge-list file
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
        /// Walks per start node
        #[arg(long, default_value_t = 100_000)]
        walks: usize,
        /// Random seed; runs are reproducible for a fixed seed
        #[arg(long)]
        seed: u64,
        /// Per-walk step cap
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Estimate a hitting probability from this 1-based node instead
        #[arg(long, requires = "to")]
        from: Option<usize>,
        /// ... to this 1-based node
        #[arg(long, requires = "from")]
        to: Option<usize>,
    },
}

#[derive(Subcommand)]
enum DerivativeCmd {
    /// Analytic line-rank derivative, checked against a finite difference
    Line {
        /// Line length
        #[arg(long)]
        nl: usize,
        /// 1-based line position
        #[arg(long)]
        i: usize,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
    /// Shared-node derivative in the line-sharing-node structure
    Shared {
        #[arg(long)]
        nl: usize,
        #[arg(long)]
        ng: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
    /// Graph-only-member derivative in the line-sharing-node structure
    Graph {
        #[arg(long)]
        nl: usize,
        #[arg(long)]
        ng: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum PerturbCmd {
    /// Largest rank a node can lose by zeroing its own weight: 1/(1-c^2)
    Bound {
        #[arg(long, default_value_t = 0.85)]
        c: f64,
    },
    /// Per-node rank loss from zeroing the listed nodes' weights
    Zero {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
        /// 1-based nodes whose weights drop to zero, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
    },
    /// Per-node rank gain from doubling one node's weight
    Double {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.85)]
        c: f64,
        /// 1-based node whose weight doubles
        #[arg(long)]
        node: usize,
    },
}

enum CmdError {
    Usage(String),
    Numeric(String),
}

impl From<GraphError> for CmdError {
    fn from(e: GraphError) -> Self {
        CmdError::Usage(e.to_string())
    }
}

impl From<LinalgError> for CmdError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular(_) => CmdError::Numeric(e.to_string()),
            _ => CmdError::Usage(e.to_string()),
        }
    }
}

impl From<SolverError> for CmdError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NotConverged { .. }
            | SolverError::DegenerateScale(_)
            | SolverError::ZeroVector => CmdError::Numeric(e.to_string()),
            SolverError::Linalg(inner) => inner.into(),
            SolverError::Graph(inner) => inner.into(),
            SolverError::COutOfRange(_) | SolverError::UnsupportedEngine => {
                CmdError::Usage(e.to_string())
            }
        }
    }
}

impl From<ClosedFormError> for CmdError {
    fn from(e: ClosedFormError) -> Self {
        match e {
            ClosedFormError::InvalidParams(_) => CmdError::Usage(e.to_string()),
            ClosedFormError::Solver(inner) => inner.into(),
        }
    }
}

impl From<SensitivityError> for CmdError {
    fn from(e: SensitivityError) -> Self {
        match e {
            SensitivityError::ClosedForm(inner) => inner.into(),
            SensitivityError::Solver(inner) => inner.into(),
            _ => CmdError::Usage(e.to_string()),
        }
    }
}

impl From<PerturbError> for CmdError {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::Linalg(inner) => inner.into(),
            _ => CmdError::Usage(e.to_string()),
        }
    }
}

impl From<WalkError> for CmdError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Linalg(inner) => inner.into(),
            _ => CmdError::Usage(e.to_string()),
        }
    }
}

/// 12 significant digits, locale-independent.
fn fmt_sig(v: f64) -> String {
    format!("{:.11e}", v)
}

fn load_graph(path: &Path) -> Result<DirectedGraph, CmdError> {
    let file = fs::File::open(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_edge_list(BufReader::new(file))?)
}

fn load_weights(path: &Path) -> Result<WeightVector, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for token in text.split_whitespace() {
        let v: f64 = token.parse().map_err(|_| {
            CmdError::Usage(format!("invalid weight {token:?} in {}", path.display()))
        })?;
        values.push(v);
    }
    Ok(WeightVector::new(values)?)
}

fn to_index(node: usize) -> Result<usize, CmdError> {
    if node == 0 {
        Err(CmdError::Usage("node ids are 1-based; 0 is not a node".into()))
    } else {
        Ok(node - 1)
    }
}

fn check_c_flag(c: f64) -> Result<(), CmdError> {
    if c.is_finite() && c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(CmdError::Usage(format!("c out of range: {c} (must be in (0,1))")))
    }
}

/// Parses the process arguments, runs one command, and returns the exit
/// code. Errors are reported on stderr.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(text) => {
            emit(&text);
            0
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CmdError::Numeric(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

/// Writes the finished report to stdout. A closed pipe downstream is a
/// normal way for output to end, not a crash.
fn emit(text: &str) {
    use std::io::Write as _;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
}

fn dispatch(command: Command) -> Result<String, CmdError> {
    match command {
        Command::Solve { graph, c, variant, engine, weights } => {
            cmd_solve(&graph, c, variant, engine, weights.as_deref())
        }
        Command::Generate { structure, out } => cmd_generate(&structure, out.as_deref()),
        Command::ClosedForm { structure, c } => cmd_closed_form(&structure, c),
        Command::Sweep { source, variant, nodes, c_lo, c_hi, steps, svg } => {
            cmd_sweep(&source, variant, &nodes, c_lo, c_hi, steps, svg.as_deref())
        }
        Command::Cmax { structure, node, c_lo, c_hi } => cmd_cmax(&structure, node, c_lo, c_hi),
        Command::Derivative(cmd) => cmd_derivative(cmd),
        Command::Perturb(cmd) => cmd_perturb(cmd),
        Command::Compare { c } => cmd_compare(c),
        Command::Walk { graph, c, walks, seed, max_steps, from, to } => {
            cmd_walk(&graph, c, walks, seed, max_steps, from, to)
        }
    }
}

fn cmd_solve(
    graph: &Path,
    c: f64,
    variant: VariantArg,
    engine: EngineArg,
    weights: Option<&Path>,
) -> Result<String, CmdError> {
    use std::fmt::Write as _;
    let g = load_graph(graph)?;
    let w = match weights {
        Some(path) => load_weights(path)?,
        None => WeightVector::uniform(g.n()),
    };
    let opts = SolveOptions { engine: engine.to_engine(), ..SolveOptions::default() };
    let r = match (variant, engine) {
        (VariantArg::R1, EngineArg::Power) => solver::pagerank_r1(&g, c, &w, &opts)?,
        (VariantArg::R1, _) => solver::normalize(&solver::pagerank_r2(&g, c, &w, &opts)?)?,
        (VariantArg::R2, _) => solver::pagerank_r2(&g, c, &w, &opts)?,
        (VariantArg::R3, _) => solver::pagerank_r3(&g, c, &w)?,
    };
    let mut out = String::from("node,value\n");
    for (i, v) in r.values.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, fmt_sig(*v)).unwrap();
    }
    Ok(out)
}

fn cmd_generate(structure: &StructureArgs, out: Option<&Path>) -> Result<String, CmdError> {
    let g = generate(&structure.to_spec()?)?;
    let text = write_edge_list(&g);
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn cmd_closed_form(structure: &StructureArgs, c: f64) -> Result<String, CmdError> {
    use std::fmt::Write as _;
    let spec = structure.to_spec()?;
    let result = closed_forms::evaluate(&spec, c)?.ok_or_else(|| {
        CmdError::Usage(format!(
            "kind {} has no analytic rank formula; use solve on a generated graph",
            structure.kind.name()
        ))
    })?;
    let mut out = String::new();
    writeln!(out, "# normalizer={}", fmt_sig(result.normalizer)).unwrap();
    writeln!(out, "node,r2,r1").unwrap();
    for i in 0..result.r2.len() {
        writeln!(out, "{},{},{}", i + 1, fmt_sig(result.r2[i]), fmt_sig(result.r1[i])).unwrap();
    }
    Ok(out)
}

fn cmd_sweep(
    source: &SourceArgs,
    variant: VariantArg,
    nodes: &[usize],
    c_lo: f64,
    c_hi: f64,
    steps: usize,
    svg: Option<&Path>,
) -> Result<String, CmdError> {
    let variant = match variant {
        VariantArg::R1 => Variant::R1,
        VariantArg::R2 => Variant::R2,
        VariantArg::R3 => {
            return Err(CmdError::Usage("sweep supports the r1 and r2 variants".into()))
        }
    };
    use std::fmt::Write as _;
    let source = source.to_source()?;
    let indices: Vec<usize> =
        nodes.iter().map(|&n| to_index(n)).collect::<Result<_, _>>()?;
    let rec = sensitivity::sweep_c(&source, variant, &indices, c_lo, c_hi, steps)?;
    let mut out = String::from("c,node,value\n");
    for (k, c) in rec.c_grid.iter().enumerate() {
        for (m, node) in rec.nodes.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_sig(*c), node + 1, fmt_sig(rec.values[k][m])).unwrap();
        }
    }
    if let Some(path) = svg {
        fs::write(path, svg_chart(&rec))
            .map_err(|e| CmdError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(out)
}

fn cmd_cmax(
    structure: &StructureArgs,
    node: usize,
    c_lo: f64,
    c_hi: f64,
) -> Result<String, CmdError> {
    let spec = structure.to_spec()?;
    let idx = to_index(node)?;
    let r = sensitivity::find_c_max_on(&spec, idx, c_lo, c_hi, 999)?;
    Ok(format!(
        "c_max={:.6}, max={:.6}, boundary_hit={}\n",
        r.c_max, r.value_at_max, r.boundary_hit
    ))
}

fn cmd_derivative(cmd: DerivativeCmd) -> Result<String, CmdError> {
    match cmd {
        DerivativeCmd::Line { nl, i, c } => {
            let analytic = sensitivity::dr2_dc_line(nl, i, c)?;
            let numeric = sensitivity::dr_dc_numeric(
                |x| closed_forms::line_r2(nl, x).map(|r| r.r2),
                c,
                FD_STEP,
            )?[i - 1];
            let agrees = (analytic - numeric).abs() <= f64::max(1e-6 * numeric.abs(), 1e-9);
            Ok(format!("analytic={analytic}, numeric={numeric}, agrees={agrees}\n"))
        }
        DerivativeCmd::Shared { nl, ng, j, c } => {
            let check = sensitivity::dr2_dc_share_shared(nl, ng, j, c)?;
            Ok(format!(
                "printed={}, numeric={}, agrees={}, value={}\n",
                check.printed, check.numeric, check.agrees, check.value
            ))
        }
        DerivativeCmd::Graph { nl, ng, j, c } => {
            let check = sensitivity::dr2_dc_share_graph(nl, ng, j, c)?;
            Ok(format!(
                "printed={}, numeric={}, agrees={}, value={}\n",
                check.printed, check.numeric, check.agrees, check.value
            ))
        }
    }
}

fn cmd_perturb(cmd: PerturbCmd) -> Result<String, CmdError> {
    use std::fmt::Write as _;
    match cmd {
        PerturbCmd::Bound { c } => {
            check_c_flag(c)?;
            Ok(format!("{}\n", perturbation::zeroing_bound(c)))
        }
        PerturbCmd::Zero { graph, c, nodes } => {
            let g = load_graph(&graph)?;
            let indices: Vec<usize> =
                nodes.iter().map(|&n| to_index(n)).collect::<Result<_, _>>()?;
            let delta = perturbation::zeroing_delta_set(&g, c, &indices)?;
            let mut out = String::from("node,delta\n");
            for (i, d) in delta.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, fmt_sig(*d)).unwrap();
            }
            Ok(out)
        }
        PerturbCmd::Double { graph, c, node } => {
            let g = load_graph(&graph)?;
            let delta = perturbation::doubling_delta(&g, c, to_index(node)?)?;
            let mut out = String::from("node,delta\n");
            for (i, d) in delta.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, fmt_sig(*d)).unwrap();
            }
            Ok(out)
        }
    }
}

fn cmd_compare(c: f64) -> Result<String, CmdError> {
    use std::fmt::Write as _;
    check_c_flag(c)?;
    if c >= 0.99 {
        eprintln!(
            "warning: c = {c} is close to 1; the rank system is nearly singular and \
             non-normalized values grow without bound"
        );
    }
    let complete = generate(&StructureSpec::complete(4))?;
    let dangling = DirectedGraph::from_edges(4, &[])?;
    let w = WeightVector::uniform(4);
    let opts = SolveOptions::default();
    let r2_complete = solver::pagerank_r2(&complete, c, &w, &opts)?;
    let r2_dangling = solver::pagerank_r2(&dangling, c, &w, &opts)?;
    let r1_complete = solver::normalize(&r2_complete)?;
    let r1_dangling = solver::normalize(&r2_dangling)?;

    let mut out = String::new();
    writeln!(out, "ranks of a 4-member complete graph and of 4 isolated nodes at c = {c}")
        .unwrap();
    writeln!(out).unwrap();
    let mut row = |variant: &str, graph: &str, values: &[f64]| {
        let joined: Vec<String> = values.iter().map(|v| fmt_sig(*v)).collect();
        writeln!(out, "{:<4}{:<12}{}", variant, graph, joined.join(" ")).unwrap();
    };
    row("R1", "complete", &r1_complete.values);
    row("R1", "dangling", &r1_dangling.values);
    row("R2", "complete", &r2_complete.values);
    row("R2", "dangling", &r2_dangling.values);
    writeln!(out).unwrap();
    writeln!(
        out,
        "the normalized variant cannot tell the graphs apart; the non-normalized one \
         separates them by expected visit counts"
    )
    .unwrap();
    Ok(out)
}

fn cmd_walk(
    graph: &Path,
    c: f64,
    walks: usize,
    seed: u64,
    max_steps: usize,
    from: Option<usize>,
    to: Option<usize>,
) -> Result<String, CmdError> {
    use std::fmt::Write as _;
    let g = load_graph(graph)?;
    let cfg = WalkConfig { walks_per_node: walks, seed, max_steps };
    let mut out = String::new();
    match (from, to) {
        (Some(from), Some(to)) => {
            let est =
                random_walk::hitting_probability(&g, c, to_index(from)?, to_index(to)?, &cfg)?;
            writeln!(out, "# truncated={}", est.truncated).unwrap();
            writeln!(out, "probability,stderr").unwrap();
            writeln!(out, "{},{}", fmt_sig(est.probability), fmt_sig(est.stderr)).unwrap();
        }
        _ => {
            let est = random_walk::estimate_r2(&g, c, &cfg)?;
            writeln!(out, "# truncated={}", est.truncated).unwrap();
            writeln!(out, "node,mean,stderr").unwrap();
            for i in 0..est.mean.len() {
                writeln!(out, "{},{},{}", i + 1, fmt_sig(est.mean[i]), fmt_sig(est.stderr[i]))
                    .unwrap();
            }
        }
    }
    Ok(out)
}

/// Minimal standalone SVG 1.1 line chart: one polyline per recorded node
/// on linear axes labeled with the damping range.
fn svg_chart(rec: &SweepRecord) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const ML: f64 = 70.0;
    const MR: f64 = 110.0;
    const MT: f64 = 20.0;
    const MB: f64 = 46.0;
    const PALETTE: [&str; 10] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf",
    ];
    let c_lo = rec.c_grid[0];
    let c_hi = *rec.c_grid.last().unwrap();
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for row in &rec.values {
        for &v in row {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !(y_max > y_min) {
        // Flat curves still need a nonzero vertical scale.
        y_max = y_min + 1.0;
    }
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let x = |c: f64| ML + (c - c_lo) / (c_hi - c_lo) * pw;
    let y = |v: f64| MT + (1.0 - (v - y_min) / (y_max - y_min)) * ph;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        MT + ph,
        ML + pw
    ));
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        MT + ph
    ));
    s.push_str(&format!(
        "<text x=\"{ML}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{c_lo:.3}</text>\n",
        H - 26.0
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{c_hi:.3}</text>\n",
        ML + pw,
        H - 26.0
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">c</text>\n",
        ML + pw / 2.0,
        H - 8.0
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{y_min:.4}</text>\n",
        ML - 6.0,
        MT + ph
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{y_max:.4}</text>\n",
        ML - 6.0,
        MT + 10.0
    ));
    for (m, node) in rec.nodes.iter().enumerate() {
        let color = PALETTE[m % PALETTE.len()];
        let points: Vec<String> = rec
            .c_grid
            .iter()
            .enumerate()
            .map(|(k, &c)| format!("{:.2},{:.2}", x(c), y(rec.values[k][m])))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">node {}</text>\n",
            W - MR + 8.0,
            MT + 14.0 * (m + 1) as f64,
            node + 1
        ));
    }
    s.push_str("</svg>\n");
    s
}
