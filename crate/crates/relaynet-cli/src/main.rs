//! `relaynet` — command-line front-end for relay-network analysis.
//!
//! Subcommands: `validate`, `cutset`, `simulate`, `sweep`, `schedule`,
//! `gap`. Reports go to stdout, diagnostics to stderr. Exit codes: 0
//! success, 1 usage error, 2 parse/validation error, 3 computation cap
//! exceeded. Given the same arguments the output is byte-identical across
//! runs and thread counts.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use relaynet::coding::{self, RunConfig, TypicalityConfig};
use relaynet::cuts::{self, CutFormula, DistSearchConfig};
use relaynet::error::{Error, Result};
use relaynet::gaussian::{self, GaussianParams};
use relaynet::info::InputDistribution;
use relaynet::network::Network;
use relaynet::schedule::{self, MessageFeasibility, ScheduleMode};

#[derive(Parser)]
#[command(name = "relaynet", version, about = "Relay-network bounds, coding simulation, schedules, and SNR scaling")]
struct Cli {
    /// Worker threads (default: logical cores; env RELAYNET_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network file and print a topology summary.
    Validate { file: String },
    /// Enumerate all cuts and report cut values and the min cut.
    Cutset {
        file: String,
        /// Input distribution: `uniform` or `file:<path>`.
        #[arg(long, default_value = "uniform")]
        dist: String,
        /// Search product distributions for the best bound.
        #[arg(long)]
        optimize: bool,
        /// Simplex grid resolution for --optimize.
        #[arg(long, default_value_t = 16)]
        grid: u32,
        /// Cut-value formula (default: the network mode's own).
        #[arg(long, value_enum)]
        formula: Option<FormulaArg>,
    },
    /// Monte-Carlo random-coding experiment at one rate.
    Simulate {
        file: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TypicalityArg::Iid)]
        typicality: TypicalityArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Record distinguishability-set statistics per cut.
        #[arg(long)]
        cut_stats: bool,
    },
    /// Monte-Carlo experiments over a list of rates.
    Sweep {
        file: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated rates in bits per use.
        #[arg(long)]
        rates: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Batch or pipelined block-transmission schedule.
    Schedule {
        file: String,
        #[arg(long)]
        blocks: u32,
        #[arg(long, value_enum)]
        mode: ScheduleModeArg,
        /// Append delay metrics and forward-window analysis.
        #[arg(long)]
        analyze_window: bool,
        /// Emit machine-readable records instead of the table.
        #[arg(long)]
        machine: bool,
    },
    /// Decode-and-forward SNR-scaling report.
    Gap {
        file: String,
        #[arg(long)]
        power: f64,
        #[arg(long)]
        noise: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaArg {
    General,
    Deterministic,
    Aref,
}

impl From<FormulaArg> for CutFormula {
    fn from(f: FormulaArg) -> CutFormula {
        match f {
            FormulaArg::General => CutFormula::General,
            FormulaArg::Deterministic => CutFormula::Deterministic,
            FormulaArg::Aref => CutFormula::Aref,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TypicalityArg {
    Iid,
    Strict,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleModeArg {
    Batch,
    Pipelined,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("E_USAGE: {first}");
            return ExitCode::from(1);
        }
    };

    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("E_USAGE: {msg}");
            return ExitCode::from(1);
        }
    };

    match run_with_threads(threads, &cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> std::result::Result<Option<usize>, String> {
    let chosen = match flag {
        Some(t) => Some(t),
        None => match std::env::var("RELAYNET_THREADS") {
            Ok(s) => Some(
                s.parse::<usize>()
                    .map_err(|_| format!("RELAYNET_THREADS must be a positive integer, got `{s}`"))?,
            ),
            Err(_) => None,
        },
    };
    if chosen == Some(0) {
        return Err("thread count must be at least 1".into());
    }
    Ok(chosen)
}

#[cfg(feature = "parallel")]
fn run_with_threads(threads: Option<usize>, cmd: &Command) -> Result<String> {
    match threads {
        None => dispatch(cmd),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(cmd))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(_threads: Option<usize>, cmd: &Command) -> Result<String> {
    dispatch(cmd)
}

fn load_network(path: &str) -> Result<Network> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {path}: {e}")))?;
    Network::parse(&text)
}

fn load_distribution(net: &Network, spec: &str) -> Result<InputDistribution> {
    if spec == "uniform" {
        Ok(InputDistribution::uniform(net))
    } else if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {path}: {e}")))?;
        InputDistribution::parse_doc(net, &text)
    } else {
        Err(Error::InvalidInput(format!(
            "--dist must be `uniform` or `file:<path>`, got `{spec}`"
        )))
    }
}

fn dispatch(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Validate { file } => validate(file),
        Command::Cutset {
            file,
            dist,
            optimize,
            grid,
            formula,
        } => cutset(file, dist, *optimize, *grid, *formula),
        Command::Simulate {
            file,
            n,
            rate,
            trials,
            seed,
            typicality,
            delta,
            cut_stats,
        } => simulate(file, *n, *rate, *trials, *seed, *typicality, *delta, *cut_stats),
        Command::Sweep {
            file,
            n,
            rates,
            trials,
            seed,
        } => sweep(file, *n, rates, *trials, *seed),
        Command::Schedule {
            file,
            blocks,
            mode,
            analyze_window,
            machine,
        } => schedule_cmd(file, *blocks, *mode, *analyze_window, *machine),
        Command::Gap { file, power, noise } => gap(file, *power, *noise),
    }
}

fn validate(file: &str) -> Result<String> {
    let net = load_network(file)?;
    let lay = net.layering()?;
    let mut out = format!(
        "{} nodes, {} edges, acyclic, L={}\n",
        net.node_count(),
        net.edge_count(),
        lay.longest
    );
    let dests: Vec<String> = net.destinations().iter().map(|t| t.to_string()).collect();
    let _ = writeln!(
        out,
        "mode={} source={} dests={{{}}} layered={} steiner={}",
        net.mode().as_str(),
        net.source(),
        dests.join(","),
        lay.is_layered,
        net.steiner_reachability()
    );
    Ok(out)
}

fn cutset(
    file: &str,
    dist_spec: &str,
    optimize: bool,
    grid: u32,
    formula: Option<FormulaArg>,
) -> Result<String> {
    let net = load_network(file)?;
    let formula = match formula {
        Some(f) => f.into(),
        None => CutFormula::default_for(net.mode())?,
    };
    let dist = if optimize {
        let cfg = DistSearchConfig {
            grid_steps: grid,
            ..DistSearchConfig::default()
        };
        cuts::optimize_distribution(&net, &cfg)?.distribution
    } else {
        load_distribution(&net, dist_spec)?
    };
    let (doc, _) = cuts::report_doc(&net, &dist, formula, cuts::DEFAULT_NODE_CAP)?;
    let mut out = format!(
        "file={file}\nmode={} formula={} dist={}\n",
        net.mode().as_str(),
        formula.as_str(),
        if optimize { "optimized" } else { dist_spec }
    );
    out.push_str(&doc);
    if optimize {
        out.push_str(&dist.render());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    file: &str,
    n: usize,
    rate: f64,
    trials: u64,
    seed: u64,
    typicality: TypicalityArg,
    delta: f64,
    cut_stats: bool,
) -> Result<String> {
    let net = load_network(file)?;
    let dist = InputDistribution::uniform(&net);
    let mut cfg = RunConfig::new(n, rate, trials, seed);
    cfg.typicality = match typicality {
        TypicalityArg::Iid => {
            let mut t = TypicalityConfig::iid();
            t.delta = delta;
            t
        }
        TypicalityArg::Strict => TypicalityConfig::strict(delta)?,
    };
    cfg.cut_stats = cut_stats;
    let result = coding::run_experiment(&net, &dist, &cfg)?;
    Ok(format!("file={file}\n{}", result.render()))
}

fn sweep(file: &str, n: usize, rates_spec: &str, trials: u64, seed: u64) -> Result<String> {
    let net = load_network(file)?;
    let dist = InputDistribution::uniform(&net);
    let mut rates = Vec::new();
    for part in rates_spec.split(',') {
        let r: f64 = part
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("invalid rate `{part}`")))?;
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidInput(format!("rates must be nonnegative, got {r}")));
        }
        rates.push(r);
    }
    if rates.is_empty() {
        return Err(Error::InvalidInput("at least one rate required".into()));
    }
    rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    let cfg = RunConfig::new(n, rates[0], trials, seed);
    let results = coding::rate_sweep(&net, &dist, &cfg, &rates)?;
    Ok(format!("file={file}\n{}", coding::render_sweep(&results)))
}

fn schedule_cmd(
    file: &str,
    blocks: u32,
    mode: ScheduleModeArg,
    analyze_window: bool,
    machine: bool,
) -> Result<String> {
    let net = load_network(file)?;
    let mode = match mode {
        ScheduleModeArg::Batch => ScheduleMode::Batch,
        ScheduleModeArg::Pipelined => ScheduleMode::Pipelined,
    };
    if analyze_window && mode == ScheduleMode::Batch {
        return Err(Error::InvalidInput(
            "--analyze-window requires --mode pipelined".into(),
        ));
    }
    let sched = schedule::build_schedule(&net, blocks, mode)?;
    let mut out = if machine {
        schedule::render_machine(&sched)
    } else {
        schedule::render_table(&sched)
    };
    if analyze_window {
        let report = schedule::delay_report(&net, &sched)?;
        let _ = writeln!(out, "end_to_end_blocks={}", report.end_to_end_blocks);
        let _ = writeln!(out, "encoding_last_block={}", report.encoding_last_block);
        for (t, feasibilities) in &report.windows {
            let _ = writeln!(out, "window dest={t}");
            for f in feasibilities {
                match f {
                    MessageFeasibility::Decodable { message, block } => {
                        let _ = writeln!(out, "w{message} decodable block={block}");
                    }
                    MessageFeasibility::Blocked {
                        message,
                        block,
                        by_node,
                        by_block,
                        deps,
                    } => {
                        let parts: Vec<String> = deps.iter().map(|d| format!("w{d}")).collect();
                        let _ = writeln!(
                            out,
                            "w{message} blocked block={block} by node={by_node} block={by_block} deps={{{}}}",
                            parts.join(",")
                        );
                    }
                }
            }
        }
    }
    Ok(out)
}

fn gap(file: &str, power: f64, noise: f64) -> Result<String> {
    let net = load_network(file)?;
    let params = GaussianParams::new(power, noise)?;
    let report = gaussian::gap(&net, &params)?;
    Ok(format!("file={file}\n{}", report.render(&params)))
}
