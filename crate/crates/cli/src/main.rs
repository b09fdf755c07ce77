//! `uirbpm`: counting, sampling and closing blossoming trees, and the
//! experiments built on them.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use uirbpm::bgw::SpineTree;
use uirbpm::closure::{close_ball, close_finite, CloseBallOptions};
use uirbpm::experiments::{self, sample_rng, sample_seed, ExperimentReport};
use uirbpm::gf::{count_plane_maps, count_rooted_maps};
use uirbpm::map::export;
use uirbpm::sampler::{sample_map_fast, sample_tree_fast, SamplerContext};
use uirbpm::tree::{enumerate_balls, enumerate_trees_guarded};
use uirbpm::{BlossomTree, Error, PlanarMap};

#[derive(Parser)]
#[command(name = "uirbpm", version, about = "Blossoming trees and regular bipartite planar maps")]
struct Cli {
    /// Vertex degree.
    #[arg(long, global = true, default_value_t = 3)]
    d: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Work budget: enumeration size guard, or stems per side for limit balls.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Jsonl,
    Dot,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Table of tree and map counts, as CSV.
    Count {
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Every tree with n black vertices.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Uniform trees with n black vertices.
    SampleTree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Use the exact recursive sampler instead of the cycle-lemma one.
        #[arg(long)]
        exact: bool,
    },
    /// Uniform plane maps with n black vertices.
    SampleMap {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Close a tree given in bracket notation (or read from stdin).
    Close {
        #[arg(long)]
        tree: Option<String>,
    },
    /// Balls of the infinite limit map.
    SampleUirbpm {
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    VerifyBijection {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
    },
    /// Frequency of one tree ball in uniform trees against its exact and
    /// limit probabilities.
    VerifyConvergence {
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Index into the sorted list of balls of radius k.
        #[arg(long, default_value_t = 0)]
        ball: usize,
        /// Comma separated n:samples pairs.
        #[arg(long, default_value = "10:10000,100:10000,1000:10000,10000:0")]
        grid: String,
    },
    WalkStats {
        #[arg(long, default_value_t = 50)]
        levels: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 1 << 14)]
        subtree_budget: u64,
    },
    /// Simple random walks on limit balls (exploratory).
    Srw {
        #[arg(long, default_value_t = 6)]
        radius: usize,
        #[arg(long, default_value_t = 1000)]
        steps: u64,
        #[arg(long, default_value_t = 100)]
        walkers: u64,
        /// Walk on the triple edge instead, as a control.
        #[arg(long)]
        sanity: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn output(cli: &Cli) -> io::Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::Resource { what: format!("io: {e}"), seed: None }
}

fn map_bytes(map: &PlanarMap, format: Format) -> Result<Vec<u8>, Error> {
    match format {
        Format::Dot => export(map, "dot"),
        Format::Json | Format::Jsonl => export(map, "json"),
        Format::Csv | Format::Text => Err(Error::UnknownFormat("maps are exported as json, jsonl or dot".into())),
    }
}

fn report(cli: &Cli, mut rep: ExperimentReport, started: Instant) -> Result<bool, Error> {
    rep.wall_clock_ms = Some(started.elapsed().as_millis() as u64);
    let mut out = output(cli).map_err(io_err)?;
    writeln!(out, "{}", rep.to_json()).map_err(io_err)?;
    for c in &rep.checks {
        eprintln!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(rep.pass)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let d = cli.d;
    let started = Instant::now();
    let guard = cli.budget.map_or(experiments::ENUMERATION_GUARD, |b| b as usize);
    match &cli.command {
        Command::Count { n_max } => {
            let ctx = SamplerContext::new(d, *n_max)?;
            let mut out = output(cli).map_err(io_err)?;
            writeln!(out, "d,n,trees,plane_maps,rooted_maps").map_err(io_err)?;
            for n in 1..=*n_max {
                let trees = ctx.slot_dp(d - 1, n - 1) * d;
                writeln!(out, "{d},{n},{trees},{},{}", count_plane_maps(d, n)?, count_rooted_maps(d, n)?).map_err(io_err)?;
            }
            Ok(true)
        }
        Command::Enumerate { n } => {
            let trees = enumerate_trees_guarded(d, *n, guard)?;
            let mut out = output(cli).map_err(io_err)?;
            for t in trees {
                write_tree(&mut out, &t, d, cli.format)?;
            }
            Ok(true)
        }
        Command::SampleTree { n, count, exact } => {
            let ctx = if *exact { Some(SamplerContext::new(d, *n)?) } else { None };
            let mut out = output(cli).map_err(io_err)?;
            for i in 0..*count {
                let mut rng = sample_rng(cli.seed, i);
                let t = match &ctx {
                    Some(ctx) => ctx.sample_tree(*n, &mut rng)?,
                    None => sample_tree_fast(d, *n, &mut rng)?,
                };
                write_tree(&mut out, &t, d, cli.format)?;
            }
            Ok(true)
        }
        Command::SampleMap { n, count } => {
            let mut out = output(cli).map_err(io_err)?;
            for i in 0..*count {
                let m = sample_map_fast(d, *n, &mut sample_rng(cli.seed, i))?;
                out.write_all(&map_bytes(&m, cli.format.unwrap_or(Format::Jsonl))?).map_err(io_err)?;
                writeln!(out).map_err(io_err)?;
            }
            Ok(true)
        }
        Command::Close { tree } => {
            let s = match tree {
                Some(s) => s.clone(),
                None => {
                    let mut s = String::new();
                    io::stdin().read_to_string(&mut s).map_err(io_err)?;
                    s
                }
            };
            let t = BlossomTree::parse(s.trim())?;
            let m = close_finite(&t)?;
            let mut out = output(cli).map_err(io_err)?;
            out.write_all(&map_bytes(&m, cli.format.unwrap_or(Format::Json))?).map_err(io_err)?;
            writeln!(out).map_err(io_err)?;
            Ok(true)
        }
        Command::SampleUirbpm { radius, count } => {
            let mut opts = CloseBallOptions::default();
            if let Some(b) = cli.budget {
                opts.max_window = b;
            }
            let format = cli.format.unwrap_or(Format::Jsonl);
            let mut out = output(cli).map_err(io_err)?;
            for i in 0..*count {
                let mut tree = SpineTree::new(d, sample_seed(cli.seed, i))?;
                let (ball, _) = close_ball(&mut tree, *radius, &opts)?;
                match format {
                    Format::Dot => out.write_all(ball.ball.to_dot().as_bytes()),
                    Format::Json | Format::Jsonl => writeln!(out, "{}", serde_json::to_string(&ball.to_json())?),
                    _ => return Err(Error::UnknownFormat("balls are exported as jsonl or dot".into())),
                }
                .map_err(io_err)?;
            }
            Ok(true)
        }
        Command::VerifyBijection { n_max } => report(cli, experiments::verify_bijection(d, *n_max)?, started),
        Command::VerifyConvergence { k, ball, grid } => {
            let balls = enumerate_balls(d, *k);
            let chosen = balls
                .get(*ball)
                .ok_or_else(|| Error::Domain(format!("ball index {ball} out of range ({} balls)", balls.len())))?;
            let grid = parse_grid(grid)?;
            report(cli, experiments::verify_convergence(d, chosen, &grid, cli.seed)?, started)
        }
        Command::WalkStats { levels, samples, subtree_budget } => {
            report(cli, experiments::walk_stats_experiment(d, *levels, *samples, cli.seed, *subtree_budget)?, started)
        }
        Command::Srw { radius, steps, walkers, sanity } => {
            let rep = if *sanity {
                experiments::recurrence_sanity(*steps, cli.seed)?
            } else {
                let mut opts = CloseBallOptions::default();
                if let Some(b) = cli.budget {
                    opts.max_window = b;
                }
                experiments::recurrence_experiment(d, *radius, *steps, *walkers, cli.seed, &opts)?
            };
            report(cli, rep, started)
        }
    }
}

fn write_tree(out: &mut dyn Write, t: &BlossomTree, d: usize, format: Option<Format>) -> Result<(), Error> {
    match format.unwrap_or(Format::Text) {
        Format::Text => writeln!(out, "{t}"),
        Format::Json | Format::Jsonl => writeln!(out, "{}", serde_json::to_string(&t.to_json(d))?),
        Format::Dot => {
            let m = close_finite(t)?;
            out.write_all(m.to_dot().as_bytes())
        }
        Format::Csv => return Err(Error::UnknownFormat("trees are written as text, jsonl or dot".into())),
    }
    .map_err(io_err)
}

fn parse_grid(s: &str) -> Result<Vec<(usize, u64)>, Error> {
    s.split(',')
        .map(|p| {
            let (n, k) = p.split_once(':').unwrap_or((p, "0"));
            match (n.trim().parse(), k.trim().parse()) {
                (Ok(n), Ok(k)) => Ok((n, k)),
                _ => Err(Error::Domain(format!("bad grid entry {p:?}, expected n:samples"))),
            }
        })
        .collect()
}
