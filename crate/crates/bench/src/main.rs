use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hyperspar_bench::experiment::{self, tune_tree_block, Constants, ExperimentConfig, Method};
use hyperspar_bench::report::{self, Format};
use hyperspar_bench::{data, WeightKind};
use hyperspar_core::balanced::BalanceConfig;
use hyperspar_core::graph::graph_error;
use hyperspar_core::hypergraph::{balanced_rho, fast_rho, hyper_sparsify, HyperSamplerConfig, HyperVariant, DEFAULT_BETA};
use hyperspar_core::mincut::{exact_mincut, stream_mincut, MinCutPipelineConfig};
use hyperspar_core::offline::{er_sparsify, OfflineSampleConfig};
use hyperspar_core::online::{OnlineConfig, OnlineSampler, SketchMode, DEFAULT_ALPHA};
use hyperspar_core::robust::{self as rb, play_game, EnergyReferee, RobustConfig, RobustGraphWrapper, RobustHyperConfig, RobustHyperWrapper, SpectralReferee};
use hyperspar_core::sliding_window::{CoresetRoutine, QueryMode, SlidingWindow};
use hyperspar_core::{io as hio, Error, Graph64, Hypergraph64, Rate};

#[derive(Parser, Debug)]
#[command(name = "hyperspar", version, about = "Streaming spectral sparsification of graphs and hypergraphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 5)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0.5)]
    eps: f64,
    /// Target stored-edge counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    budget: Vec<usize>,
    /// Input file; standard input when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random graph (or hypergraph with --rank > 2).
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Integer weights in 1..=10 instead of continuous U(1, 10).
        #[arg(long)]
        integer: bool,
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Sparsify an edge list.
    Sparsify {
        #[arg(long, value_enum, default_value_t = SparsifyMethod::Streaming)]
        method: SparsifyMethod,
    },
    /// Sparsify a hyperedge list with the online sampler.
    Hypersparsify {
        #[arg(long, value_enum, default_value_t = VariantArg::Fast)]
        variant: VariantArg,
        /// Sampling rate; derived from --eps when omitted.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Approximate the global minimum cut of an edge list.
    Mincut {
        #[arg(long, default_value_t = 4.0)]
        near_factor: f64,
    },
    /// Sliding-window queries over a hyperedge stream.
    Window {
        /// Window lengths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        window: Vec<u64>,
        #[arg(long, default_value_t = 32)]
        block: usize,
        /// Keep every item instead of sampling.
        #[arg(long)]
        identity: bool,
        /// Return whole levels instead of filtering by index.
        #[arg(long)]
        level_union: bool,
    },
    /// Play the adaptive-adversary game against the robust wrapper; writes a JSON-lines transcript.
    Robust {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = AdversaryArg::Adaptive)]
        adversary: AdversaryArg,
    },
    /// Budget-matched comparison of the online, merge-and-reduce and streaming methods.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 50_000)]
    m: usize,
    /// Read --input as a SNAP pair file instead of generating a graph.
    #[arg(long)]
    snap: bool,
    #[arg(long)]
    integer: bool,
    #[arg(long, value_enum, default_value_t = TableArg::Synthetic)]
    table: TableArg,
    #[arg(long)]
    c_ol: Option<f64>,
    #[arg(long)]
    c_off: Option<f64>,
    #[arg(long)]
    c_ol_str: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["online".to_string(), "merge_reduce".to_string(), "streaming".to_string()])]
    methods: Vec<String>,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    #[arg(long, default_value_t = 200)]
    tolerance: usize,
    /// Per-method, per-budget means.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// `series,x,y` lines of budget against mean error.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SparsifyMethod {
    Online,
    Offline,
    Streaming,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Fast,
    Balanced,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AdversaryArg {
    Adaptive,
    Oblivious,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableArg {
    Synthetic,
    Facebook,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>, Failure> {
    match path {
        Some(p) => {
            let f = File::open(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufReader::new(f)))
        }
        None => Ok(Box::new(BufReader::new(io::stdin()))),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn read_graph(g: &Global) -> Result<Graph64, Failure> {
    let graph: Graph64 = hio::read_edge_list(open_input(g.input.as_deref())?)?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph.into());
    }
    Ok(graph)
}

fn read_hypergraph(g: &Global) -> Result<Hypergraph64, Failure> {
    let h: Hypergraph64 = hio::read_hyperedge_list(open_input(g.input.as_deref())?)?;
    if h.is_empty() {
        return Err(Error::EmptyGraph.into());
    }
    Ok(h)
}

fn check_eps(eps: f64) -> Outcome {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::Config(format!("--eps must lie in (0, 1), got {eps}")))
    }
}

fn single_budget(g: &Global) -> Result<Option<usize>, Failure> {
    match g.budget.as_slice() {
        [] => Ok(None),
        [0] => Err(Failure::Config("--budget must be positive".into())),
        [b] => Ok(Some(*b)),
        _ => Err(Failure::Config("this command takes a single --budget".into())),
    }
}

fn write_records<R: Serialize>(rows: &[R], g: &Global) -> Outcome {
    let mut out = open_output(g.output.as_deref())?;
    report::write_rows(rows, g.format.into(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn probes(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
}

fn cmd_gen(g: &Global, n: usize, m: usize, integer: bool, rank: usize) -> Outcome {
    if n < 2 || m == 0 {
        return Err(Failure::Config("need n >= 2 and m >= 1".into()));
    }
    let mut out = open_output(g.output.as_deref())?;
    if rank > 2 {
        if rank > n {
            return Err(Failure::Config("--rank exceeds --n".into()));
        }
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(g.seed);
        let edges = (0..m).map(|_| rb::random_hyperedge::<f64>(&mut rng, n, rank));
        let h = Hypergraph64::from_edges(n, edges.collect::<Vec<_>>())?;
        hio::write_hyperedge_list(&h, &mut out)?;
    } else {
        let kind = if integer { WeightKind::Integer } else { WeightKind::Uniform };
        hio::write_edge_list(&data::gen_synthetic_with(n, m, g.seed, kind), &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_sparsify(g: &Global, method: SparsifyMethod) -> Outcome {
    check_eps(g.eps)?;
    let budget = single_budget(g)?;
    let graph = read_graph(g)?;
    let (n, m) = (graph.n(), graph.len());
    let (h, stored) = match method {
        SparsifyMethod::Online => {
            let mut s = OnlineSampler::new(n, OnlineConfig::for_accuracy(g.eps, m, DEFAULT_ALPHA, g.seed), SketchMode::SelfSketch);
            for e in graph.edges() {
                s.process_edge(e);
            }
            let h = s.finalize();
            let k = h.len();
            (h, k)
        }
        SparsifyMethod::Offline => {
            let cfg = match budget {
                Some(b) => OfflineSampleConfig::for_target_size(b, n, g.seed),
                None => OfflineSampleConfig::new(4.0 * (n.max(2) as f64).ln() / (g.eps * g.eps), g.seed),
            };
            let h = er_sparsify(&graph, &cfg)?;
            let k = h.len();
            (h, k)
        }
        SparsifyMethod::Streaming => match budget {
            Some(b) => {
                let c = OnlineConfig::<f64>::for_accuracy(g.eps, m, DEFAULT_ALPHA, 0).c;
                let Rate::Finite(c) = c else { unreachable!("finite accuracy") };
                let t = tune_tree_block(&graph, Method::Streaming, c, b, 200, 3, g.seed);
                if !t.feasible {
                    eprintln!("budget {b} not reached; closest mean peak {:.0}", t.probe_mean);
                }
                let block = t.parameter as usize;
                experiment::run_streaming(&graph, c, block, experiment::reducer_rate(block, n), b, g.seed)
            }
            None => {
                let cfg = MinCutPipelineConfig::for_accuracy(n, m, g.eps, g.seed).stream;
                let out = hyperspar_core::merge_reduce::stream_sparsify(n, graph.edges().iter().copied(), &cfg);
                (out.graph, out.peak_stored)
            }
        },
    };
    let mut out = open_output(g.output.as_deref())?;
    hio::write_edge_list(&h, &mut out)?;
    out.flush()?;
    let err = graph_error(&graph, &h).map_or(f64::INFINITY, |e| e);
    eprintln!("n={n} m={m} kept={} stored_peak={stored} error={err:.4}", h.len());
    Ok(())
}

fn cmd_hypersparsify(g: &Global, variant: VariantArg, rho: Option<f64>) -> Outcome {
    check_eps(g.eps)?;
    let h = read_hypergraph(g)?;
    let (n, r, m) = (h.n(), h.rank(), h.len());
    let pairs: usize = h.edges().iter().map(|e| e.pair_count()).sum();
    let (variant, default_rho) = match variant {
        VariantArg::Fast => (HyperVariant::Fast, fast_rho(DEFAULT_BETA, r, m, 0.1, g.eps)),
        VariantArg::Balanced => (HyperVariant::Balanced(BalanceConfig::default()), balanced_rho(DEFAULT_BETA, r, m, g.eps)),
    };
    let rho = rho.unwrap_or(default_rho);
    if !(rho > 0.0) {
        return Err(Failure::Config("--rho must be positive".into()));
    }
    let out_h = hyper_sparsify(&h, HyperSamplerConfig::new(variant, Rate::Finite(rho), pairs, g.seed))?;
    let mut out = open_output(g.output.as_deref())?;
    hio::write_hyperedge_list(&out_h, &mut out)?;
    out.flush()?;
    let err = rb::energy_error(&h, &out_h, &probes(n, 1000, g.seed));
    eprintln!("n={n} rank={r} m={m} rho={rho:.3} kept={} energy_error={err:.4}", out_h.len());
    Ok(())
}

#[derive(Serialize)]
struct MincutRow {
    estimate: f64,
    exact: f64,
    relative_error: f64,
    candidates: usize,
    sparsifier_edges: usize,
}

fn cmd_mincut(g: &Global, near_factor: f64) -> Outcome {
    check_eps(g.eps)?;
    if near_factor < 1.0 {
        return Err(Failure::Config("--near-factor must be at least 1".into()));
    }
    let graph = read_graph(g)?;
    let mut cfg = MinCutPipelineConfig::for_accuracy(graph.n(), graph.len(), g.eps, g.seed);
    cfg.near_factor = near_factor;
    let est = stream_mincut(graph.n(), graph.edges().iter().copied(), &cfg)?;
    let exact = exact_mincut(&graph)?.value;
    let row = MincutRow {
        estimate: est.value,
        exact,
        relative_error: if exact > 0.0 { (est.value - exact).abs() / exact } else { est.value },
        candidates: est.candidates,
        sparsifier_edges: est.sparsifier.len(),
    };
    write_records(&[row], g)
}

#[derive(Serialize)]
struct WindowRow {
    window: u64,
    returned: usize,
    exact: usize,
    stored: usize,
    energy_error: f64,
}

fn cmd_window(g: &Global, windows: &[u64], block: usize, identity: bool, level_union: bool) -> Outcome {
    check_eps(g.eps)?;
    if block == 0 || windows.contains(&0) {
        return Err(Failure::Config("--block and every --window must be positive".into()));
    }
    let h = read_hypergraph(g)?;
    let routine = if identity {
        CoresetRoutine::Identity
    } else {
        let rho = fast_rho(DEFAULT_BETA, h.rank(), h.len(), 0.1, g.eps);
        let pairs = h.edges().iter().map(|e| e.pair_count()).sum();
        CoresetRoutine::Online(HyperSamplerConfig::new(HyperVariant::Fast, Rate::Finite(rho), pairs, g.seed))
    };
    let mut sw = SlidingWindow::new(h.n(), block, routine);
    for e in h.edges() {
        sw.push(e.clone())?;
    }
    let mode = if level_union { QueryMode::LevelUnion } else { QueryMode::Filtered };
    let xs = probes(h.n(), 200, g.seed);
    let rows: Vec<WindowRow> = windows
        .iter()
        .map(|&w| {
            let start = h.len().saturating_sub(w as usize);
            let exact = Hypergraph64::from_edges(h.n(), h.edges()[start..].iter().cloned()).expect("in range");
            let got = sw.query_with(w, mode);
            WindowRow { window: w, returned: got.len(), exact: exact.len(), stored: sw.stored(), energy_error: rb::energy_error(&exact, &got, &xs) }
        })
        .collect();
    write_records(&rows, g)
}

fn cmd_robust(g: &Global, n: usize, rounds: usize, rank: usize, adversary: AdversaryArg) -> Outcome {
    check_eps(g.eps)?;
    if n < 2 || rank < 2 || rank > n {
        return Err(Failure::Config("need n >= 2 and 2 <= rank <= n".into()));
    }
    let mut out = open_output(g.output.as_deref())?;
    let (switches, valid) = if rank == 2 {
        let mut w = RobustGraphWrapper::new(n, &RobustConfig::for_accuracy(n, rounds, g.eps, g.seed));
        let mut referee = SpectralReferee::new(n);
        let t = match adversary {
            AdversaryArg::Adaptive => play_game(&mut rb::MinExposedWeight::new(g.seed), &mut w, &mut referee, Graph64::new(n), rounds, g.eps)?,
            AdversaryArg::Oblivious => play_game(&mut rb::ObliviousEdges::new(n, g.seed), &mut w, &mut referee, Graph64::new(n), rounds, g.eps)?,
        };
        t.write_jsonl(&mut out)?;
        (t.switch_count, t.all_valid())
    } else {
        let mut w = RobustHyperWrapper::new(n, &RobustHyperConfig::for_accuracy(n, rounds, rank, g.eps, g.seed));
        let mut referee = EnergyReferee::new(n, 200, g.seed);
        let t = match adversary {
            AdversaryArg::Adaptive => play_game(&mut rb::MinExposedHyperWeight::new(rank, g.seed), &mut w, &mut referee, Hypergraph64::new(n), rounds, g.eps)?,
            AdversaryArg::Oblivious => play_game(&mut rb::ObliviousHyperedges::new(n, rank, g.seed), &mut w, &mut referee, Hypergraph64::new(n), rounds, g.eps)?,
        };
        t.write_jsonl(&mut out)?;
        (t.switch_count, t.all_valid())
    };
    out.flush()?;
    eprintln!("rounds={rounds} switches={switches} all_valid={valid}");
    Ok(())
}

fn cmd_bench(g: &Global, a: &BenchArgs) -> Outcome {
    let methods = a.methods.iter().map(|s| s.parse::<Method>()).collect::<Result<Vec<_>, _>>().map_err(Failure::Config)?;
    let table: &[(usize, Constants)] = match a.table {
        TableArg::Synthetic => &experiment::SYNTHETIC_TABLE,
        TableArg::Facebook => &experiment::FACEBOOK_TABLE,
    };
    let budgets = if g.budget.is_empty() { table.iter().map(|(b, _)| *b).collect() } else { g.budget.clone() };
    let mut cfg = ExperimentConfig::from_table(budgets, table);
    for c in &mut cfg.constants {
        c.c_ol = a.c_ol.unwrap_or(c.c_ol);
        c.c_off = a.c_off.unwrap_or(c.c_off);
        c.c_ol_str = a.c_ol_str.unwrap_or(c.c_ol_str);
    }
    cfg.methods = methods;
    cfg.trials = g.trials;
    cfg.batch_size = a.batch_size;
    cfg.tolerance = a.tolerance;
    cfg.seed = g.seed;
    cfg.validate().map_err(Failure::Config)?;

    let graph = if a.snap {
        let path = g.input.as_deref().ok_or_else(|| Failure::Config("--snap needs --input".into()))?;
        data::load_snap_path(path, g.seed)?
    } else {
        if a.n < 2 || a.m == 0 {
            return Err(Failure::Config("need --n >= 2 and --m >= 1".into()));
        }
        let kind = if a.integer { WeightKind::Integer } else { WeightKind::Uniform };
        data::gen_synthetic_with(a.n, a.m, g.seed, kind)
    };
    let rep = experiment::run_experiment(&graph, &cfg).map_err(Failure::Config)?;

    let format: Format = g.format.into();
    let mut out = open_output(g.output.as_deref())?;
    report::write_trials(&rep, format, &mut out)?;
    out.flush()?;
    if let Some(p) = &a.summary {
        let mut w = open_output(Some(p))?;
        report::write_summary(&rep, format, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.plot_data {
        let mut w = open_output(Some(p))?;
        report::write_plot_data(&rep.summary, &mut w)?;
        w.flush()?;
    }
    eprintln!("n={} m={}", graph.n(), graph.len());
    report::write_table(&rep, io::stderr())?;
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    if g.trials == 0 {
        return Err(Failure::Config("--trials must be at least 1".into()));
    }
    match &cli.command {
        Command::Gen { n, m, integer, rank } => cmd_gen(g, *n, *m, *integer, *rank),
        Command::Sparsify { method } => cmd_sparsify(g, *method),
        Command::Hypersparsify { variant, rho } => cmd_hypersparsify(g, *variant, *rho),
        Command::Mincut { near_factor } => cmd_mincut(g, *near_factor),
        Command::Window { window, block, identity, level_union } => cmd_window(g, window, *block, *identity, *level_union),
        Command::Robust { n, rounds, rank, adversary } => cmd_robust(g, *n, *rounds, *rank, *adversary),
        Command::Bench(a) => cmd_bench(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
