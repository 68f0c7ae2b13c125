//! Accuracy-versus-density experiments over planted hypergraphs.
//!
//! Every cell `(p_dense index, run)` generates a hypergraph, detects
//! communities and scores them against the planted truth. Cell seeds are
//! `seed ^ mix64((p_index << 32) | run)`, so any cell can be rerun alone.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::nmi_per_color;
use crate::optimizer::{detect, mix64, OptimizerConfig};
use crate::synth::{generate, GeneratorConfig};

pub const CSV_HEADER: &str = "p_dense,run,nmi_red,nmi_green,nmi_blue,q,seconds";

#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    OneToOne {
        communities: usize,
    },
    ManyToMany {
        communities: [usize; 3],
        triples: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub preset: Preset,
    pub nodes_per_comm: usize,
    pub p_dense: Vec<f64>,
    /// Defaults to `0.001 * p_dense` per cell.
    pub p_sparse: Option<f64>,
    pub runs: usize,
    pub seed: u64,
    pub restarts: usize,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p_dense: f64,
    pub run: usize,
    pub nmi: [f64; 3],
    pub q: f64,
    pub communities: [usize; 3],
    pub seconds: f64,
}

pub fn cell_seed(seed: u64, p_index: usize, run: usize) -> u64 {
    seed ^ mix64(((p_index as u64) << 32) | run as u64)
}

pub fn generator_config(
    preset: &Preset,
    nodes_per_comm: usize,
    p_dense: f64,
    p_sparse: Option<f64>,
    seed: u64,
) -> Result<GeneratorConfig> {
    match *preset {
        Preset::OneToOne { communities } => Ok(GeneratorConfig::one_to_one(
            communities,
            nodes_per_comm,
            p_dense,
            p_sparse,
            seed,
        )),
        Preset::ManyToMany {
            communities,
            triples,
        } => GeneratorConfig::many_to_many(
            communities,
            triples,
            nodes_per_comm,
            p_dense,
            p_sparse,
            seed,
        ),
    }
}

/// Runs one cell of the sweep.
pub fn run_cell(config: &SweepConfig, p_index: usize, run: usize) -> Result<SweepRow> {
    let p_dense = config.p_dense[p_index];
    let seed = cell_seed(config.seed, p_index, run);
    let gen = generator_config(
        &config.preset,
        config.nodes_per_comm,
        p_dense,
        config.p_sparse,
        seed,
    )?;
    let start = Instant::now();
    let (graph, truth) = generate(&gen)?;
    let opt = OptimizerConfig::<f64>::default()
        .with_seed(seed)
        .with_restarts(config.restarts);
    let result = detect(&graph, &opt)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(SweepRow {
        p_dense,
        run,
        nmi: nmi_per_color(&truth, &result.partition)?,
        q: result.q,
        communities: result.partition.community_counts(),
        seconds,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn write_row<W: Write>(out: &mut W, p: f64, run: &str, vals: [f64; 5]) -> Result<()> {
    writeln!(
        out,
        "{p:.6},{run},{:.6},{:.6},{:.6},{:.6},{:.6}",
        vals[0], vals[1], vals[2], vals[3], vals[4]
    )?;
    Ok(())
}

/// Runs the whole sweep, writing CSV as results arrive.
///
/// After the data rows of each `p_dense` value come two aggregate rows whose
/// `run` column reads `mean` and `std` (sample standard deviation).
pub fn run_sweep<W: Write>(config: &SweepConfig, mut out: W) -> Result<Vec<SweepRow>> {
    if config.runs == 0 || config.jobs == 0 || config.p_dense.is_empty() {
        return Err(Error::Config(
            "runs, jobs and the p_dense list must be nonempty".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    writeln!(out, "{CSV_HEADER}")?;
    out.flush()?;
    let mut all = Vec::new();
    for p_index in 0..config.p_dense.len() {
        let mut rows = Vec::with_capacity(config.runs);
        let runs: Vec<usize> = (0..config.runs).collect();
        for chunk in runs.chunks(config.jobs) {
            let done: Vec<Result<SweepRow>> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&run| run_cell(config, p_index, run))
                    .collect()
            });
            for row in done {
                let row = row?;
                write_row(
                    &mut out,
                    row.p_dense,
                    &row.run.to_string(),
                    [row.nmi[0], row.nmi[1], row.nmi[2], row.q, row.seconds],
                )?;
                out.flush()?;
                rows.push(row);
            }
        }
        let column =
            |f: &dyn Fn(&SweepRow) -> f64| mean_std(&rows.iter().map(f).collect::<Vec<_>>());
        let stats = [
            column(&|r| r.nmi[0]),
            column(&|r| r.nmi[1]),
            column(&|r| r.nmi[2]),
            column(&|r| r.q),
            column(&|r| r.seconds),
        ];
        let p = config.p_dense[p_index];
        write_row(&mut out, p, "mean", stats.map(|s| s.0))?;
        write_row(&mut out, p, "std", stats.map(|s| s.1))?;
        out.flush()?;
        all.extend(rows);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn easy(runs: usize, p: Vec<f64>) -> SweepConfig {
        SweepConfig {
            preset: Preset::OneToOne { communities: 3 },
            nodes_per_comm: 6,
            p_dense: p,
            p_sparse: Some(0.0),
            runs,
            seed: 42,
            restarts: 1,
            jobs: 1,
        }
    }

    #[test]
    fn row_count_contract() {
        let mut buf = Vec::new();
        let rows = run_sweep(&easy(3, vec![0.8, 0.6]), &mut buf).unwrap();
        assert_eq!(rows.len(), 6);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * (3 + 2));
        assert!(lines[4].starts_with("0.800000,mean,"));
        assert!(lines[5].starts_with("0.800000,std,"));
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn parallel_cells_match_sequential() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let seq = run_sweep(&easy(4, vec![0.7]), &mut a).unwrap();
        let mut par_cfg = easy(4, vec![0.7]);
        par_cfg.jobs = 3;
        let par = run_sweep(&par_cfg, &mut b).unwrap();
        for (x, y) in seq.iter().zip(&par) {
            assert_eq!((x.run, x.nmi, x.q), (y.run, y.nmi, y.q));
        }
    }

    #[test]
    fn seeds_differ_per_cell() {
        assert_ne!(cell_seed(1, 0, 1), cell_seed(1, 1, 0));
        assert_ne!(cell_seed(1, 0, 0), cell_seed(2, 0, 0));
    }

    #[test]
    fn statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }
}
