//! Experiment runner: sweeps over generators, sizes, and strategies, writes
//! raw and aggregated CSVs, fits log-log exponents, and emits plot data.
//!
//! Everything is keyed by seeds, so rerunning a spec reproduces its output
//! byte for byte. Wall-clock timing is recorded only when FMETRIC_TIMING=1;
//! the default of 0 keeps the files reproducible across machines.

use crate::ann::{ann_search, record_line, AnnInstance};
use crate::bounds::BoundMatrix;
use crate::metric::{generate_pointset, DistanceOracle, Generator, PointSet};
use crate::spanner::{build_spanner, Strategy, StrategyKind};
use crate::wspd::{build_wspd, WspdBackend};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

/// Master seed used when the caller does not supply any.
pub const DEFAULT_MASTER_SEED: u64 = 1729;

/// Default number of instance seeds per configuration.
pub const DEFAULT_INSTANCES: usize = 10;

/// Default number of search permutations per instance.
pub const DEFAULT_PERMS: u64 = 10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("unknown plot kind {0:?}")]
    UnknownPlotKind(String),
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Metric(#[from] crate::metric::MetricError),
    #[error(transparent)]
    Spanner(#[from] crate::spanner::SpannerError),
    #[error(transparent)]
    Wspd(#[from] crate::wspd::WspdError),
    #[error(transparent)]
    Ann(#[from] crate::ann::AnnError),
    #[error(transparent)]
    Bounds(#[from] crate::bounds::BoundsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Spanner,
    Ann,
    Wspd,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Spanner => "spanner",
            Task::Ann => "ann",
            Task::Wspd => "wspd",
        })
    }
}

impl FromStr for Task {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spanner" => Ok(Task::Spanner),
            "ann" => Ok(Task::Ann),
            "wspd" => Ok(Task::Wspd),
            other => Err(HarnessError::InvalidSpec(format!("unknown task {other:?}"))),
        }
    }
}

/// Where ANN query points come from: uniform on [-10,10]^d sits inside the
/// generated sets, normal with scale 100 mostly lands outside them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryDist {
    Uniform,
    Normal,
}

impl fmt::Display for QueryDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryDist::Uniform => "uniform",
            QueryDist::Normal => "normal",
        })
    }
}

impl FromStr for QueryDist {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(QueryDist::Uniform),
            "normal" => Ok(QueryDist::Normal),
            other => Err(HarnessError::InvalidSpec(format!(
                "unknown query distribution {other:?}"
            ))),
        }
    }
}

/// One full sweep. Point sets are keyed by (generator, dim, n, seed), so
/// every eps and strategy in the spec sees the same instances.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub task: Task,
    pub generator: Generator,
    pub dims: Vec<usize>,
    pub ns: Vec<usize>,
    pub epss: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    pub perms: u64,
    pub query_dist: QueryDist,
    pub out: PathBuf,
    pub max_n: usize,
    pub dump_bounds: bool,
    pub emit_svg: bool,
}

impl ExperimentSpec {
    pub fn new(task: Task, generator: Generator, out: PathBuf) -> Self {
        let strategies = match task {
            Task::Spanner => vec![Strategy::new(StrategyKind::BlindGreedy)],
            Task::Wspd => vec![
                Strategy::new(StrategyKind::WspdQuadtree),
                Strategy::new(StrategyKind::WspdCovertree),
            ],
            Task::Ann => Vec::new(),
        };
        ExperimentSpec {
            task,
            generator,
            dims: vec![2],
            ns: vec![100],
            epss: vec![0.1],
            strategies,
            seeds: default_seeds(DEFAULT_MASTER_SEED),
            perms: DEFAULT_PERMS,
            query_dist: QueryDist::Uniform,
            out,
            max_n: 1000,
            dump_bounds: false,
            emit_svg: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidSpec(m));
        if self.dims.is_empty() || self.ns.is_empty() || self.epss.is_empty() {
            return bad("dims, ns, and epss must be non-empty".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.dims.iter().any(|&d| d == 0) {
            return bad("dimensions must be at least 1".into());
        }
        if self.ns.iter().any(|&n| n == 0) {
            return bad("point counts must be at least 1".into());
        }
        if self.epss.iter().any(|e| !e.is_finite()) {
            return bad("eps values must be finite".into());
        }
        match self.task {
            Task::Spanner | Task::Wspd => {
                if self.strategies.is_empty() {
                    return bad("at least one strategy is required".into());
                }
                if let Some(e) = self.epss.iter().find(|&&e| e <= 0.0) {
                    return bad(format!("{} runs need eps > 0, got {e}", self.task));
                }
                if let Some(&n) = self.ns.iter().find(|&&n| n > self.max_n) {
                    return bad(format!(
                        "n = {n} exceeds the cap of {}; one blind run pays about \
                         {} distance queries with quadratic arithmetic per reveal \
                         (raise --max-n to force it)",
                        self.max_n,
                        n * (n - 1) / 2
                    ));
                }
            }
            Task::Ann => {
                if let Some(e) = self.epss.iter().find(|&&e| e < 0.0) {
                    return bad(format!("ann runs need eps >= 0, got {e}"));
                }
                if self.perms == 0 {
                    return bad("ann runs need at least one permutation".into());
                }
                for &dim in &self.dims {
                    for &eps in &self.epss {
                        let cap = if dim == 2 && eps <= 0.01 { 30000 } else { 10000 };
                        if let Some(&n) = self.ns.iter().find(|&&n| n > cap) {
                            return bad(format!(
                                "n = {n} exceeds the ann cap of {cap} for dim {dim}, \
                                 eps {eps}"
                            ));
                        }
                    }
                }
            }
        }
        if self.task == Task::Wspd {
            if let Some(s) = self
                .strategies
                .iter()
                .find(|s| backend_of(**s).is_none())
            {
                return bad(format!("{s} is not a wspd backend"));
            }
        }
        if self.task == Task::Spanner {
            let has_wspd = self.strategies.iter().any(|s| backend_of(*s).is_some());
            if has_wspd {
                if let Some(e) = self.epss.iter().find(|&&e| e > 1.0) {
                    return bad(format!(
                        "wspd-backed spanners need eps in (0, 1], got {e}"
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn default_seeds(master: u64) -> Vec<u64> {
    (master..master + DEFAULT_INSTANCES as u64).collect()
}

fn backend_of(s: Strategy) -> Option<WspdBackend> {
    match s.kind() {
        StrategyKind::WspdQuadtree => Some(WspdBackend::Quadtree),
        StrategyKind::WspdCovertree => Some(WspdBackend::CoverTree),
        _ => None,
    }
}

// Seed derivation: every random stream hangs off the instance seed through
// splitmix64 so streams stay independent and reproducible.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3;
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

const APPROX_SALT: u64 = 0xA117;
const QUERY_SALT: u64 = 0x9E31;
const PERM_SALT: u64 = 0x5EED;
const RUN_SALT: u64 = 0x0B5E;

fn gen_id(g: Generator) -> u64 {
    Generator::ALL.iter().position(|&x| x == g).unwrap() as u64
}

#[derive(Debug, Clone)]
struct ResultRow {
    dim: usize,
    n: usize,
    eps: f64,
    strategy: String,
    seed: u64,
    perm: u64,
    edges: u64,
    queries: u64,
    runtime_ms: u64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub raw: PathBuf,
    pub agg: PathBuf,
    pub records: Option<PathBuf>,
    pub bounds: Option<PathBuf>,
    pub plot: Option<PlotArtifacts>,
    pub raw_rows: usize,
}

fn out_path(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    name.push_str(suffix);
    base.with_file_name(name)
}

fn sample_query(dist: QueryDist, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| match dist {
            QueryDist::Uniform => rng.random_range(-10.0..10.0),
            QueryDist::Normal => {
                let z: f64 = StandardNormal.sample(&mut rng);
                100.0 * z
            }
        })
        .collect()
}

/// Runs the sweep and writes `<out>_raw.csv` plus `<out>_agg.csv`; ann runs
/// add `<out>.records`, bound dumps go to `<out>.bounds`. Loops are strictly
/// nested in spec order, so output order is part of the contract.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunArtifacts, HarnessError> {
    spec.validate()?;
    let timing = std::env::var("FMETRIC_TIMING").ok().as_deref() == Some("1");
    let mut rows: Vec<ResultRow> = Vec::new();
    let mut records = String::new();
    let mut bounds_dump = String::new();

    for &dim in &spec.dims {
        for &n in &spec.ns {
            for &seed in &spec.seeds {
                let ps_seed = mix(&[gen_id(spec.generator), dim as u64, n as u64, seed]);
                let ps = generate_pointset(spec.generator, dim, n, ps_seed)?;
                match spec.task {
                    Task::Spanner => run_spanner_cell(
                        spec, &ps, dim, n, seed, ps_seed, timing, &mut rows,
                        &mut bounds_dump,
                    )?,
                    Task::Wspd => {
                        run_wspd_cell(spec, &ps, dim, n, seed, ps_seed, timing, &mut rows)?
                    }
                    Task::Ann => run_ann_cell(
                        spec, &ps, dim, n, seed, ps_seed, timing, &mut rows, &mut records,
                    )?,
                }
            }
        }
    }

    let raw = out_path(&spec.out, "_raw.csv");
    let agg = out_path(&spec.out, "_agg.csv");
    if let Some(dir) = raw.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_raw_csv(&raw, spec, &rows)?;
    write_agg_csv(&agg, spec, &rows)?;

    let records_path = if spec.task == Task::Ann {
        let p = out_path(&spec.out, ".records");
        std::fs::write(&p, records)?;
        Some(p)
    } else {
        None
    };
    let bounds_path = if spec.dump_bounds && spec.task == Task::Spanner {
        let p = out_path(&spec.out, ".bounds");
        std::fs::write(&p, bounds_dump)?;
        Some(p)
    } else {
        None
    };

    let plot = if spec.emit_svg {
        let kind = default_plot_kind(spec);
        Some(emit_plot_data(&agg, kind, &spec.out, true)?)
    } else {
        None
    };

    Ok(RunArtifacts {
        raw,
        agg,
        records: records_path,
        bounds: bounds_path,
        plot,
        raw_rows: rows.len(),
    })
}

fn default_plot_kind(spec: &ExperimentSpec) -> PlotKind {
    match spec.task {
        Task::Ann => PlotKind::QueriesOverLogN,
        _ if spec.ns.len() < 2 && spec.epss.len() > 1 => PlotKind::EdgesVsEps,
        _ => PlotKind::EdgesVsN,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_spanner_cell(
    spec: &ExperimentSpec,
    ps: &PointSet,
    dim: usize,
    n: usize,
    seed: u64,
    ps_seed: u64,
    timing: bool,
    rows: &mut Vec<ResultRow>,
    bounds_dump: &mut String,
) -> Result<(), HarnessError> {
    for &eps in &spec.epss {
        for (si, &strategy) in spec.strategies.iter().enumerate() {
            let mut oracle = DistanceOracle::new(ps.clone(), mix(&[ps_seed, APPROX_SALT]));
            let run_seed = mix(&[ps_seed, RUN_SALT, eps.to_bits(), si as u64]);
            let t0 = Instant::now();
            let spanner = build_spanner(&mut oracle, eps, strategy, run_seed)?;
            let runtime_ms = if timing { t0.elapsed().as_millis() as u64 } else { 0 };
            if spec.dump_bounds && strategy.is_blind() {
                // blind edges are the reveals in order, so the final bound
                // state is reproducible from the edge list alone
                let mut m = BoundMatrix::new(n)?;
                for &(i, j, w) in &spanner.edges {
                    m.update_bounds(i, j, w)?;
                }
                bounds_dump.push_str(&format!(
                    "# {} {} {} {} {} {}\n",
                    spec.generator, dim, n, eps, strategy, seed
                ));
                bounds_dump.push_str(&m.dump());
            }
            rows.push(ResultRow {
                dim,
                n,
                eps,
                strategy: strategy.to_string(),
                seed,
                perm: 0,
                edges: spanner.edges.len() as u64,
                queries: spanner.queries_used,
                runtime_ms,
            });
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_wspd_cell(
    spec: &ExperimentSpec,
    ps: &PointSet,
    dim: usize,
    n: usize,
    seed: u64,
    ps_seed: u64,
    timing: bool,
    rows: &mut Vec<ResultRow>,
) -> Result<(), HarnessError> {
    for &eps in &spec.epss {
        // the wspd task measures the decomposition behind an eps spanner,
        // so the separation is the spanner mapping s = 16/eps
        let s = 16.0 / eps;
        for &strategy in &spec.strategies {
            let backend = backend_of(strategy).expect("validated wspd backend");
            let mut oracle = DistanceOracle::new(ps.clone(), mix(&[ps_seed, APPROX_SALT]));
            let t0 = Instant::now();
            let wspd = build_wspd(&mut oracle, s, backend)?;
            let runtime_ms = if timing { t0.elapsed().as_millis() as u64 } else { 0 };
            rows.push(ResultRow {
                dim,
                n,
                eps,
                strategy: strategy.to_string(),
                seed,
                perm: 0,
                edges: wspd.pairs.len() as u64,
                queries: wspd.queries_used,
                runtime_ms,
            });
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_ann_cell(
    spec: &ExperimentSpec,
    ps: &PointSet,
    dim: usize,
    n: usize,
    seed: u64,
    ps_seed: u64,
    timing: bool,
    rows: &mut Vec<ResultRow>,
    records: &mut String,
) -> Result<(), HarnessError> {
    let q = sample_query(spec.query_dist, dim, mix(&[ps_seed, QUERY_SALT]));
    for &eps in &spec.epss {
        let inst = AnnInstance::new(ps.clone(), q.clone(), eps)?;
        for perm in 0..spec.perms {
            let perm_seed = mix(&[ps_seed, PERM_SALT, eps.to_bits(), perm]);
            let t0 = Instant::now();
            let r = ann_search(&inst, perm_seed);
            let runtime_ms = if timing { t0.elapsed().as_millis() as u64 } else { 0 };
            records.push_str(&record_line(&inst, &r));
            records.push('\n');
            rows.push(ResultRow {
                dim,
                n,
                eps,
                strategy: "ann".into(),
                seed,
                perm,
                edges: 0,
                queries: r.queries_used,
                runtime_ms,
            });
        }
    }
    Ok(())
}

fn write_raw_csv(
    path: &Path,
    spec: &ExperimentSpec,
    rows: &[ResultRow],
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "task", "generator", "dim", "n", "eps", "strategy", "seed", "perm", "edges",
        "queries", "runtime_ms",
    ])?;
    for r in rows {
        w.write_record([
            spec.task.to_string(),
            spec.generator.to_string(),
            r.dim.to_string(),
            r.n.to_string(),
            r.eps.to_string(),
            r.strategy.clone(),
            r.seed.to_string(),
            r.perm.to_string(),
            r.edges.to_string(),
            r.queries.to_string(),
            r.runtime_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_agg_csv(
    path: &Path,
    spec: &ExperimentSpec,
    rows: &[ResultRow],
) -> Result<(), HarnessError> {
    // group by (dim, n, eps, strategy) in first-appearance order; folding in
    // row order keeps the statistics bit-reproducible
    let mut order: Vec<(usize, usize, u64, String)> = Vec::new();
    let mut groups: HashMap<(usize, usize, u64, String), Vec<&ResultRow>> = HashMap::new();
    for r in rows {
        let key = (r.dim, r.n, r.eps.to_bits(), r.strategy.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "task", "generator", "dim", "n", "eps", "strategy", "mean_edges", "std_edges",
        "mean_queries", "std_queries", "mean_runtime_ms", "std_runtime_ms", "runs",
    ])?;
    for key in &order {
        let g = &groups[key];
        let (me, se) = mean_std(g.iter().map(|r| r.edges as f64));
        let (mq, sq) = mean_std(g.iter().map(|r| r.queries as f64));
        let (mt, st) = mean_std(g.iter().map(|r| r.runtime_ms as f64));
        w.write_record([
            spec.task.to_string(),
            spec.generator.to_string(),
            key.0.to_string(),
            key.1.to_string(),
            f64::from_bits(key.2).to_string(),
            key.3.clone(),
            me.to_string(),
            se.to_string(),
            mq.to_string(),
            sq.to_string(),
            mt.to_string(),
            st.to_string(),
            g.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and sample standard deviation, folded in iteration order. A single
/// observation has std 0.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = values.clone().count();
    if k == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let ss = values.map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (k - 1) as f64).sqrt())
}

/// Least-squares slope of ln(edges) against ln(n). Needs two distinct n
/// values and positive measurements.
pub fn fit_exponent(series: &[(f64, f64)]) -> Result<f64, HarnessError> {
    if series.len() < 2 {
        return Err(HarnessError::DegenerateSeries(
            "need at least two points".into(),
        ));
    }
    if series.iter().any(|&(n, e)| n <= 0.0 || e <= 0.0) {
        return Err(HarnessError::DegenerateSeries(
            "n and edges must be positive".into(),
        ));
    }
    let first = series[0].0;
    if series.iter().all(|&(n, _)| n == first) {
        return Err(HarnessError::DegenerateSeries(
            "need at least two distinct n values".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    EdgesVsN,
    RatioVsN,
    QueriesOverLogN,
    EdgesVsEps,
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlotKind::EdgesVsN => "edges_vs_n",
            PlotKind::RatioVsN => "ratio_vs_n",
            PlotKind::QueriesOverLogN => "queries_over_log_n",
            PlotKind::EdgesVsEps => "edges_vs_eps",
        })
    }
}

impl FromStr for PlotKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edges_vs_n" => Ok(PlotKind::EdgesVsN),
            "ratio_vs_n" => Ok(PlotKind::RatioVsN),
            "queries_over_log_n" => Ok(PlotKind::QueriesOverLogN),
            "edges_vs_eps" => Ok(PlotKind::EdgesVsEps),
            other => Err(HarnessError::UnknownPlotKind(other.into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotArtifacts {
    pub data: PathBuf,
    pub svg: Option<PathBuf>,
    pub series: usize,
    pub points: usize,
}

/// Turns an aggregate CSV into `series x y` lines (and optionally a small
/// self-contained SVG). An empty CSV produces empty output with a warning.
pub fn emit_plot_data(
    agg_csv: &Path,
    kind: PlotKind,
    out_base: &Path,
    svg: bool,
) -> Result<PlotArtifacts, HarnessError> {
    let mut rdr = csv::Reader::from_path(agg_csv)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize, HarnessError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            HarnessError::InvalidSpec(format!(
                "{} lacks aggregate column {name:?}",
                agg_csv.display()
            ))
        })
    };
    let (c_gen, c_dim, c_n, c_eps, c_strat) = (
        col("generator")?,
        col("dim")?,
        col("n")?,
        col("eps")?,
        col("strategy")?,
    );
    let c_edges = col("mean_edges")?;
    let c_queries = col("mean_queries")?;

    let mut order: Vec<String> = Vec::new();
    let mut series: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        let n: f64 = get(c_n).parse().unwrap_or(f64::NAN);
        let eps = get(c_eps);
        let edges: f64 = get(c_edges).parse().unwrap_or(f64::NAN);
        let queries: f64 = get(c_queries).parse().unwrap_or(f64::NAN);
        let (label, x, y) = match kind {
            PlotKind::EdgesVsN => (
                format!("{}-d{}-e{}-{}", get(c_gen), get(c_dim), eps, get(c_strat)),
                n,
                edges,
            ),
            PlotKind::RatioVsN => (
                format!("{}-d{}-e{}-{}", get(c_gen), get(c_dim), eps, get(c_strat)),
                n,
                edges / n,
            ),
            PlotKind::QueriesOverLogN => (
                format!("{}-d{}-e{}-{}", get(c_gen), get(c_dim), eps, get(c_strat)),
                n,
                queries / n.log2(),
            ),
            PlotKind::EdgesVsEps => (
                format!("{}-d{}-n{}-{}", get(c_gen), get(c_dim), get(c_n), get(c_strat)),
                eps.parse().unwrap_or(f64::NAN),
                edges,
            ),
        };
        if !series.contains_key(&label) {
            order.push(label.clone());
        }
        series.entry(label).or_default().push((x, y));
    }

    let data_path = out_path(out_base, &format!("_{kind}.txt"));
    let mut text = String::new();
    let mut points = 0;
    for label in &order {
        let mut pts = series[label].clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (x, y) in pts {
            text.push_str(&format!("{label} {x} {y}\n"));
            points += 1;
        }
    }
    if order.is_empty() {
        eprintln!("warning: {} has no data rows, plot is empty", agg_csv.display());
    }
    std::fs::write(&data_path, text)?;

    let svg_path = if svg {
        let ordered: Vec<(String, Vec<(f64, f64)>)> = order
            .iter()
            .map(|l| {
                let mut pts = series[l].clone();
                pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                (l.clone(), pts)
            })
            .collect();
        let p = out_path(out_base, &format!("_{kind}.svg"));
        std::fs::write(&p, render_svg(kind, &ordered))?;
        Some(p)
    } else {
        None
    };

    Ok(PlotArtifacts {
        data: data_path,
        svg: svg_path,
        series: order.len(),
        points,
    })
}

fn axis_labels(kind: PlotKind) -> (&'static str, &'static str, bool) {
    // (x label, y label, log-scale x)
    match kind {
        PlotKind::EdgesVsN => ("n", "edges", true),
        PlotKind::RatioVsN => ("n", "edges / n", true),
        PlotKind::QueriesOverLogN => ("n", "queries / log2(n)", true),
        PlotKind::EdgesVsEps => ("eps", "edges", false),
    }
}

fn render_svg(kind: PlotKind, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const ML: f64 = 80.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 55.0;
    const PALETTE: [&str; 10] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
        "#7f7f7f", "#17becf", "#bcbd22",
    ];
    let (xl, yl, logx) = axis_labels(kind);
    let tx = |v: f64| if logx { v.log10() } else { v };

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (_, pts) in series {
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                xs.push(tx(x));
                ys.push(y);
            }
        }
    }
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |v: f64| ML + (tx(v) - x0) / (x1 - x0) * (W - ML - MR);
    let py = |v: f64| H - MB - (v - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    s.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    for t in 0..=3 {
        let f = t as f64 / 3.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let xpix = ML + f * (W - ML - MR);
        let ypix = H - MB - f * (H - MT - MB);
        let xlabel = if logx { fmt_tick(10f64.powf(xv)) } else { fmt_tick(xv) };
        s.push_str(&format!(
            "<text x=\"{xpix}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>\n",
            H - MB + 18.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            ML - 6.0,
            ypix + 4.0,
            fmt_tick(yv)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xl}</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 12.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{yl}</text>\n",
        MT + (H - MT - MB) / 2.0
    ));
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
        let ly = MT + 14.0 * (i as f64 + 1.0);
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            W - MR - 190.0,
            ly - 9.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{ly}\">{label}</text>\n",
            W - MR - 176.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn span(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1000.0 || a < 0.01 {
        format!("{v:.1e}")
    } else if a >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Canned desk-scale sweeps behind `fmetric bench`.
pub fn bench_spec(suite: &str, out_dir: &Path) -> Result<ExperimentSpec, HarnessError> {
    let out = out_dir.join(format!("bench_{suite}"));
    let seeds5: Vec<u64> = (DEFAULT_MASTER_SEED..DEFAULT_MASTER_SEED + 5).collect();
    match suite {
        // strategy comparison on normal points, all strategies at one size
        "strategies" => {
            let mut spec = ExperimentSpec::new(Task::Spanner, Generator::Normal, out);
            spec.ns = vec![100, 200, 400];
            spec.epss = vec![0.1];
            spec.strategies = Strategy::ALL.to_vec();
            spec.seeds = seeds5;
            Ok(spec)
        }
        // exponent fits for greedy against blind greedy, takes tens of minutes
        "scaling" => {
            let mut spec = ExperimentSpec::new(Task::Spanner, Generator::Uniform, out);
            spec.dims = vec![2, 3, 4];
            spec.ns = (1..=7).map(|k| k * 100).collect();
            spec.epss = vec![0.1];
            spec.strategies = vec![
                Strategy::new(StrategyKind::GreedyBaseline),
                Strategy::new(StrategyKind::BlindGreedy),
            ];
            spec.seeds = seeds5;
            Ok(spec)
        }
        // edge counts against eps at a fixed size
        "eps" => {
            let mut spec = ExperimentSpec::new(Task::Spanner, Generator::Uniform, out);
            spec.ns = vec![400];
            spec.epss = vec![1.0 / 32.0, 0.125, 0.5, 1.0, 2.0];
            spec.strategies = vec![
                Strategy::new(StrategyKind::GreedyBaseline),
                Strategy::new(StrategyKind::BlindGreedy),
            ];
            spec.seeds = seeds5[..3].to_vec();
            Ok(spec)
        }
        // query growth against n for the incremental search
        "annscale" => {
            let mut spec = ExperimentSpec::new(Task::Ann, Generator::Uniform, out);
            spec.ns = vec![100, 1000, 10000];
            spec.epss = vec![0.01];
            Ok(spec)
        }
        other => Err(HarnessError::InvalidSpec(format!(
            "unknown bench suite {other:?} (expected strategies, scaling, eps, or annscale)"
        ))),
    }
}
