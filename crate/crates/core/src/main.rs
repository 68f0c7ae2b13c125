use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tricomm::metrics::{nmi_joint, nmi_per_color};
use tricomm::optimizer::detect;
use tricomm::oracle::{exact_min_q, DEFAULT_LIMIT};
use tricomm::sweep::{generator_config, run_sweep, Preset, SweepConfig};
use tricomm::synth::generate;
use tricomm::{mdl, Color, OptimizerConfig64, Partition, Quality64, TripartiteHypergraph};

#[derive(Parser)]
#[command(
    name = "tricomm",
    version,
    about = "Community detection in tripartite hypergraphs"
)]
struct Cli {
    /// Random seed for generation and detection.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for restarts and sweep cells.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition hypergraph and its truth partition.
    Generate {
        #[command(flatten)]
        preset: PresetArgs,
        #[arg(long)]
        p_dense: f64,
        #[arg(long, default_value = "hypergraph.txt")]
        out: PathBuf,
        #[arg(long, default_value = "truth.json")]
        truth: PathBuf,
    },
    /// Detect communities.
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        /// Partition JSON destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print description lengths and counters as JSON.
        #[arg(long)]
        report: bool,
    },
    /// Print the description length of a partition.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
    /// Compare two partitions by normalized mutual information.
    Nmi {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// One color, or `all` for the pooled node set; every color when omitted.
        #[arg(long, value_enum)]
        color: Option<ColorArg>,
    },
    /// Exhaustively minimize the description length of a tiny hypergraph.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy sweep over p_dense values, written as CSV.
    Sweep {
        #[command(flatten)]
        preset: PresetArgs,
        /// Comma-separated p_dense values.
        #[arg(long, value_delimiter = ',', required = true)]
        p_dense: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetKind {
    #[value(name = "one2one")]
    OneToOne,
    #[value(name = "many2many")]
    ManyToMany,
}

#[derive(Clone, Copy, ValueEnum)]
enum ColorArg {
    Red,
    Green,
    Blue,
    All,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long, value_enum, default_value = "one2one")]
    preset: PresetKind,
    /// Communities per color: one count, or three comma-separated counts.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    communities: Vec<usize>,
    /// Number of dense community triples (many2many only).
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long, default_value_t = 10)]
    nodes_per_comm: usize,
    /// Defaults to 0.001 * p_dense.
    #[arg(long)]
    p_sparse: Option<f64>,
}

impl PresetArgs {
    fn preset(&self) -> Result<Preset> {
        let counts: [usize; 3] = match self.communities.as_slice() {
            &[c] => [c; 3],
            &[r, g, b] => [r, g, b],
            other => bail!(
                "--communities takes one or three counts, got {}",
                other.len()
            ),
        };
        Ok(match self.preset {
            PresetKind::OneToOne => {
                if counts[0] != counts[1] || counts[1] != counts[2] {
                    bail!("one2one needs equal community counts per color");
                }
                Preset::OneToOne {
                    communities: counts[0],
                }
            }
            PresetKind::ManyToMany => Preset::ManyToMany {
                communities: counts,
                triples: self
                    .triples
                    .context("--triples is required for the many2many preset")?,
            },
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn load_graph(path: &Path) -> Result<TripartiteHypergraph> {
    TripartiteHypergraph::read(open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn write_partition(partition: &Partition, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => partition.write(create(p)?)?,
        None => partition.write(io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs == 0 {
        bail!("--jobs must be positive");
    }
    let note = |msg: String| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Generate {
            preset,
            p_dense,
            out,
            truth,
        } => {
            let config = generator_config(
                &preset.preset()?,
                preset.nodes_per_comm,
                p_dense,
                preset.p_sparse,
                cli.seed,
            )?;
            let (graph, planted) = generate(&config)?;
            graph.write(create(&out)?)?;
            planted.write(create(&truth)?)?;
            note(format!(
                "wrote {} hyperedges over {:?} nodes",
                graph.total_weight(),
                graph.node_counts()
            ));
        }
        Command::Detect {
            input,
            restarts,
            epsilon,
            out,
            report,
        } => {
            let graph = load_graph(&input)?;
            let config = OptimizerConfig64::default()
                .with_seed(cli.seed)
                .with_restarts(restarts)
                .with_epsilon(epsilon);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.jobs)
                .build()?;
            let result = pool.install(|| detect(&graph, &config))?;
            write_partition(&result.partition, out.as_deref())?;
            if report {
                let doc = json!({
                    "q": result.q,
                    "l_index": result.l_index,
                    "l_recover": result.l_recover,
                    "communities": result.partition.community_counts(),
                    "outer_iterations": result.outer_iterations,
                    "total_sweeps": result.total_sweeps,
                    "total_moves": result.total_moves,
                    "seed_used": result.seed_used,
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            }
        }
        Command::Score { input, partition } => {
            let graph = load_graph(&input)?;
            let p = Partition::read_for(open(&partition)?, &graph)?;
            let q: Quality64 = mdl::quality(&graph, &p)?;
            let mut out = io::stdout().lock();
            writeln!(out, "q {:.6}", q.q)?;
            writeln!(out, "l_index {:.6}", q.l_index)?;
            writeln!(out, "l_recover {:.6}", q.l_recover)?;
        }
        Command::Nmi { truth, pred, color } => {
            let t = Partition::read(open(&truth)?)?;
            let p = Partition::read(open(&pred)?)?;
            let per_color = nmi_per_color::<f64>(&t, &p)?;
            let mut out = io::stdout().lock();
            match color {
                None => {
                    for c in Color::ALL {
                        writeln!(out, "{} {:.6}", c.name(), per_color[c.index()])?;
                    }
                }
                Some(ColorArg::All) => writeln!(out, "{:.6}", nmi_joint::<f64>(&t, &p)?)?,
                Some(ColorArg::Red) => writeln!(out, "{:.6}", per_color[0])?,
                Some(ColorArg::Green) => writeln!(out, "{:.6}", per_color[1])?,
                Some(ColorArg::Blue) => writeln!(out, "{:.6}", per_color[2])?,
            }
        }
        Command::Oracle { input, limit, out } => {
            let graph = load_graph(&input)?;
            let (partition, q) = exact_min_q::<f64>(&graph, limit)?;
            match out {
                Some(path) => {
                    partition.write(create(&path)?)?;
                    println!("q {q:.6}");
                }
                None => {
                    println!("q {q:.6}");
                    partition.write(io::stdout().lock())?;
                }
            }
        }
        Command::Sweep {
            preset,
            p_dense,
            runs,
            restarts,
            out,
        } => {
            let config = SweepConfig {
                preset: preset.preset()?,
                nodes_per_comm: preset.nodes_per_comm,
                p_dense,
                p_sparse: preset.p_sparse,
                runs,
                seed: cli.seed,
                restarts,
                jobs: cli.jobs,
            };
            let rows = run_sweep(&config, create(&out)?)?;
            note(format!("wrote {} runs to {}", rows.len(), out.display()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
