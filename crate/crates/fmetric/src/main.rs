//! Command line front end for the experiment harness.

use clap::{Args, Parser, Subcommand};
use fmetric::harness::{
    bench_spec, default_seeds, fit_exponent, run_experiment, ExperimentSpec, HarnessError,
    QueryDist, RunArtifacts, Task, DEFAULT_MASTER_SEED,
};
use fmetric::metric::Generator;
use fmetric::spanner::Strategy;
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fmetric",
    about = "Distance-query experiments: spanners, decompositions, nearest neighbors",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep spanner constructions and record edge and query counts
    Spanner(SweepArgs),
    /// Sweep randomized nearest-neighbor searches
    Ann(SweepArgs),
    /// Sweep well-separated pair decompositions
    Wspd(SweepArgs),
    /// Run a canned suite: strategies, scaling, eps, or annscale
    Bench(BenchArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Point generator: uniform, normal, clustered, or exp
    #[arg(long, default_value = "uniform")]
    generator: String,
    /// Dimensions, comma list or inclusive range a..b[:step]
    #[arg(long, default_value = "2")]
    dim: String,
    /// Point counts, comma list or inclusive range a..b[:step]
    #[arg(long, default_value = "100")]
    n: String,
    /// Eps values, comma list
    #[arg(long, default_value = "0.1")]
    eps: String,
    /// Strategies (spanner) or backends (wspd), comma list
    #[arg(long)]
    strategy: Option<String>,
    /// Instance seeds, comma list; default is 10 seeds from FMETRIC_SEED
    #[arg(long)]
    seeds: Option<String>,
    /// Search permutations per instance (ann only)
    #[arg(long, default_value_t = 10)]
    perms: u64,
    /// Query point distribution (ann only): uniform or normal
    #[arg(long, default_value = "uniform")]
    query_dist: String,
    /// Output path prefix; default is the task name
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit plot data and a rendered SVG
    #[arg(long)]
    emit_svg: bool,
    /// Dump final bound matrices of blind spanner runs
    #[arg(long)]
    dump_bounds: bool,
    /// Size cap for spanner and wspd runs
    #[arg(long, default_value_t = 1000)]
    max_n: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite name: strategies, scaling, eps, or annscale
    suite: String,
    /// Directory for the suite's output files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::InvalidSpec(_)
                | HarnessError::UnknownPlotKind(_)
                | HarnessError::DegenerateSeries(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Spanner(a) => report(run_experiment(&build_spec(Task::Spanner, &a)?)),
        Cmd::Ann(a) => report(run_experiment(&build_spec(Task::Ann, &a)?)),
        Cmd::Wspd(a) => report(run_experiment(&build_spec(Task::Wspd, &a)?)),
        Cmd::Bench(a) => {
            let spec = bench_spec(&a.suite, &a.out_dir)?;
            let art = run_experiment(&spec)?;
            report(Ok(art.clone()))?;
            if a.suite == "scaling" {
                print_exponents(&art)?;
            }
            Ok(())
        }
    }
}

fn report(art: Result<RunArtifacts, HarnessError>) -> Result<(), HarnessError> {
    let art = art?;
    println!("wrote {} ({} rows)", art.raw.display(), art.raw_rows);
    println!("wrote {}", art.agg.display());
    if let Some(p) = &art.records {
        println!("wrote {}", p.display());
    }
    if let Some(p) = &art.bounds {
        println!("wrote {}", p.display());
    }
    if let Some(plot) = &art.plot {
        println!("wrote {} ({} series)", plot.data.display(), plot.series);
        if let Some(svg) = &plot.svg {
            println!("wrote {}", svg.display());
        }
    }
    Ok(())
}

/// Fits ln(mean_edges) against ln(n) per (dim, strategy) of a scaling run.
fn print_exponents(art: &RunArtifacts) -> Result<(), HarnessError> {
    let mut rdr = csv::Reader::from_path(&art.agg)?;
    let mut series: HashMap<(String, String), Vec<(f64, f64)>> = HashMap::new();
    let mut order = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let key = (rec[2].to_string(), rec[5].to_string());
        let n: f64 = rec[3].parse().unwrap_or(f64::NAN);
        let edges: f64 = rec[6].parse().unwrap_or(f64::NAN);
        if !series.contains_key(&key) {
            order.push(key.clone());
        }
        series.entry(key).or_default().push((n, edges));
    }
    for key in order {
        let alpha = fit_exponent(&series[&key])?;
        println!("dim {} {}: alpha = {:.3}", key.0, key.1, alpha);
    }
    Ok(())
}

fn build_spec(task: Task, a: &SweepArgs) -> Result<ExperimentSpec, HarnessError> {
    let invalid = |m: String| HarnessError::InvalidSpec(m);
    let generator: Generator = a
        .generator
        .parse()
        .map_err(|e| invalid(format!("{e}")))?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(task.to_string()));
    let mut spec = ExperimentSpec::new(task, generator, out);
    spec.dims = parse_usize_list(&a.dim)?;
    spec.ns = parse_usize_list(&a.n)?;
    spec.epss = parse_f64_list(&a.eps)?;
    if let Some(s) = &a.strategy {
        spec.strategies = s
            .split(',')
            .map(|t| t.trim().parse::<Strategy>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(format!("{e}")))?;
    }
    spec.seeds = match &a.seeds {
        Some(s) => parse_u64_list(s)?,
        None => {
            let master = std::env::var("FMETRIC_SEED")
                .ok()
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| invalid(format!("FMETRIC_SEED is not a u64: {v:?}")))
                })
                .transpose()?
                .unwrap_or(DEFAULT_MASTER_SEED);
            default_seeds(master)
        }
    };
    spec.perms = a.perms;
    spec.query_dist = a.query_dist.parse::<QueryDist>()?;
    spec.emit_svg = a.emit_svg;
    spec.dump_bounds = a.dump_bounds;
    spec.max_n = a.max_n;
    Ok(spec)
}

/// Accepts `5,20,100` or an inclusive range `100..700:100` (step optional).
fn parse_usize_list(s: &str) -> Result<Vec<usize>, HarnessError> {
    let invalid = || HarnessError::InvalidSpec(format!("cannot parse size list {s:?}"));
    if let Some((range, step)) = split_range(s) {
        let (a, b) = range;
        let step = step.unwrap_or(1);
        if step == 0 || b < a {
            return Err(invalid());
        }
        return Ok((a..=b).step_by(step).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| invalid()))
        .collect()
}

fn split_range(s: &str) -> Option<((usize, usize), Option<usize>)> {
    let (range, step) = match s.split_once(':') {
        Some((r, st)) => (r, Some(st.trim().parse::<usize>().ok()?)),
        None => (s, None),
    };
    let (a, b) = range.split_once("..")?;
    Some(((a.trim().parse().ok()?, b.trim().parse().ok()?), step))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::InvalidSpec(format!("cannot parse eps list {s:?}")))
        })
        .collect()
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, HarnessError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| HarnessError::InvalidSpec(format!("cannot parse seed list {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists_and_ranges_parse() {
        assert_eq!(parse_usize_list("5,20,100").unwrap(), vec![5, 20, 100]);
        assert_eq!(
            parse_usize_list("100..700:200").unwrap(),
            vec![100, 300, 500, 700]
        );
        assert_eq!(parse_usize_list("3..5").unwrap(), vec![3, 4, 5]);
        assert!(parse_usize_list("a,b").is_err());
        assert!(parse_usize_list("9..3").is_err());
        assert!(parse_usize_list("1..9:0").is_err());
    }

    #[test]
    fn cli_shape_is_wellformed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
