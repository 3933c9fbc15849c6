//! Point sets, seeded generators, and the counting distance oracle.
//!
//! Every algorithm in this crate is billed by the number of exact distance
//! evaluations it requests. The oracle is the single place where that
//! accounting happens; everything else either goes through it or is
//! explicitly free (coordinates, the approximate table, ground-truth checks
//! in tests).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Points per cluster used by the `clustered` generator.
pub const CLUSTER_SIZE: usize = 50;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("point count must be positive")]
    ZeroPoints,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Synthetic point-set families. All of them draw every random value from a
/// `ChaCha8Rng` seeded explicitly, so a `(generator, dim, n, seed)` tuple
/// regenerates bit-identical coordinates on any platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// i.i.d. coordinates uniform on [0,1).
    Uniform,
    /// i.i.d. standard normal coordinates.
    Normal,
    /// ceil(n/50) cluster centers uniform on [0,10000)^dim, then unit
    /// normal noise around the center of point index / 50.
    Clustered,
    /// Coordinates 2^xi with xi uniform on [1,25); spans many scales.
    Exp,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::Uniform,
        Generator::Normal,
        Generator::Clustered,
        Generator::Exp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Uniform => "uniform",
            Generator::Normal => "normal",
            Generator::Clustered => "clustered",
            Generator::Exp => "exp",
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, MetricError> {
        match s {
            "uniform" => Ok(Generator::Uniform),
            "normal" => Ok(Generator::Normal),
            "clustered" => Ok(Generator::Clustered),
            "exp" => Ok(Generator::Exp),
            other => Err(MetricError::UnknownGenerator(other.to_string())),
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An ordered finite set of points in R^dim with the Euclidean metric.
///
/// Coordinates are stored row-major (`points[i*dim..(i+1)*dim]` is point i).
/// Direct coordinate access and [`PointSet::distance`] are free of charge in
/// the query-count model; counted evaluations go through [`DistanceOracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<f64>,
    label: String,
    seed: u64,
}

impl PointSet {
    /// Wraps explicit coordinates. `points.len()` must be a positive
    /// multiple of `dim`.
    pub fn from_coords(dim: usize, points: Vec<f64>, label: &str) -> Result<Self, MetricError> {
        if dim == 0 {
            return Err(MetricError::ZeroDimension);
        }
        if points.is_empty() || points.len() % dim != 0 {
            return Err(MetricError::DimensionMismatch {
                expected: dim,
                got: points.len() % dim,
            });
        }
        Ok(PointSet {
            dim,
            points,
            label: label.to_string(),
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Euclidean distance between points i and j. Uncounted; algorithms that
    /// must pay for distances call [`DistanceOracle::exact`] instead.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let p = self.point(i);
        let q = self.point(j);
        let mut s = 0.0;
        for d in 0..self.dim {
            let t = p[d] - q[d];
            s += t * t;
        }
        s.sqrt()
    }

    /// Euclidean distance from an external query point to point i.
    pub fn distance_to(&self, q: &[f64], i: usize) -> Result<f64, MetricError> {
        if q.len() != self.dim {
            return Err(MetricError::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        let p = self.point(i);
        let mut s = 0.0;
        for d in 0..self.dim {
            let t = p[d] - q[d];
            s += t * t;
        }
        Ok(s.sqrt())
    }

    /// Plain-text form: a `dim n` header line, then one point per line with
    /// space-separated coordinates at 17 significant digits (lossless for
    /// f64).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.dim, self.n()));
        for i in 0..self.n() {
            let p = self.point(i);
            for (d, c) in p.iter().enumerate() {
                if d > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{:.16e}", c));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MetricError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(MetricError::Parse {
            line: 1,
            msg: "empty input".to_string(),
        })?;
        let mut it = header.split_whitespace();
        let parse_head = |tok: Option<&str>| -> Result<usize, MetricError> {
            tok.and_then(|t| t.parse().ok()).ok_or(MetricError::Parse {
                line: 1,
                msg: "header must be `dim n`".to_string(),
            })
        };
        let dim = parse_head(it.next())?;
        let n = parse_head(it.next())?;
        if dim == 0 {
            return Err(MetricError::ZeroDimension);
        }
        if n == 0 {
            return Err(MetricError::ZeroPoints);
        }
        let mut points = Vec::with_capacity(n * dim);
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| MetricError::Parse {
                    line: lineno + 1,
                    msg: format!("bad coordinate `{tok}`"),
                })?;
                points.push(v);
            }
        }
        if points.len() != n * dim {
            return Err(MetricError::Parse {
                line: 1,
                msg: format!(
                    "expected {} coordinates, found {}",
                    n * dim,
                    points.len()
                ),
            });
        }
        Ok(PointSet {
            dim,
            points,
            label: "file".to_string(),
            seed: 0,
        })
    }
}

/// Draws a point set from one of the generator families. Rejects zero
/// dimension or zero points.
pub fn generate_pointset(
    kind: Generator,
    dim: usize,
    n: usize,
    seed: u64,
) -> Result<PointSet, MetricError> {
    if dim == 0 {
        return Err(MetricError::ZeroDimension);
    }
    if n == 0 {
        return Err(MetricError::ZeroPoints);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n * dim);
    match kind {
        Generator::Uniform => {
            for _ in 0..n * dim {
                points.push(rng.random::<f64>());
            }
        }
        Generator::Normal => {
            for _ in 0..n * dim {
                points.push(StandardNormal.sample(&mut rng));
            }
        }
        Generator::Clustered => {
            // Centers are drawn first, then per-point noise, so the stream
            // layout is fixed for a given (dim, n).
            let n_centers = n.div_ceil(CLUSTER_SIZE);
            let mut centers = Vec::with_capacity(n_centers * dim);
            for _ in 0..n_centers * dim {
                centers.push(10_000.0 * rng.random::<f64>());
            }
            for i in 0..n {
                let c = i / CLUSTER_SIZE;
                for d in 0..dim {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    points.push(centers[c * dim + d] + noise);
                }
            }
        }
        Generator::Exp => {
            for _ in 0..n * dim {
                let xi = 1.0 + 24.0 * rng.random::<f64>();
                points.push(2f64.powf(xi));
            }
        }
    }
    Ok(PointSet {
        dim,
        points,
        label: kind.name().to_string(),
        seed,
    })
}

/// Counted access to the metric of a [`PointSet`], plus the free
/// 2-approximation side channel.
///
/// `exact` bills one query per evaluation with i != j; there is no symmetry
/// or repeat caching here, callers own any caching they want. The
/// approximate table A[i][j] = u * d(i,j) with u frozen uniform on [1,2] per
/// unordered pair is free and immutable once materialized.
#[derive(Debug, Clone)]
pub struct DistanceOracle {
    points: PointSet,
    exact_queries: u64,
    query_point_queries: u64,
    approx_seed: u64,
    approx: Option<Vec<f64>>,
    query_factors: Option<Vec<f64>>,
}

impl DistanceOracle {
    pub fn new(points: PointSet, approx_seed: u64) -> Self {
        DistanceOracle {
            points,
            exact_queries: 0,
            query_point_queries: 0,
            approx_seed,
            approx: None,
            query_factors: None,
        }
    }

    /// Installs an explicit approximate table (row-major n*n). Intended for
    /// tests that need hand-planned traversal orders.
    pub fn with_approx_table(points: PointSet, table: Vec<f64>) -> Self {
        assert_eq!(table.len(), points.n() * points.n());
        DistanceOracle {
            points,
            exact_queries: 0,
            query_point_queries: 0,
            approx_seed: 0,
            approx: Some(table),
            query_factors: None,
        }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    /// Exact distance, billed unless i == j.
    pub fn exact(&mut self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.exact_queries += 1;
        self.points.distance(i, j)
    }

    /// Exact distance from an external query point, billed on the separate
    /// query-point counter.
    pub fn query_distance(&mut self, q: &[f64], i: usize) -> Result<f64, MetricError> {
        let d = self.points.distance_to(q, i)?;
        self.query_point_queries += 1;
        Ok(d)
    }

    /// Approximate distance from the frozen table; free of charge.
    pub fn approx(&mut self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.ensure_approx_table();
        let n = self.points.n();
        self.approx.as_ref().unwrap()[i * n + j]
    }

    /// Approximate distance from an external query point, using one frozen
    /// factor per data point; free of charge.
    pub fn approx_query_distance(&mut self, q: &[f64], i: usize) -> Result<f64, MetricError> {
        let d = self.points.distance_to(q, i)?;
        self.ensure_query_factors();
        Ok(self.query_factors.as_ref().unwrap()[i] * d)
    }

    pub fn exact_query_count(&self) -> u64 {
        self.exact_queries
    }

    pub fn query_point_query_count(&self) -> u64 {
        self.query_point_queries
    }

    fn ensure_approx_table(&mut self) {
        if self.approx.is_some() {
            return;
        }
        let n = self.points.n();
        let mut table = vec![0.0; n * n];
        let mut rng = ChaCha8Rng::seed_from_u64(self.approx_seed);
        for i in 0..n {
            for j in i + 1..n {
                let u = 1.0 + rng.random::<f64>();
                let v = u * self.points.distance(i, j);
                table[i * n + j] = v;
                table[j * n + i] = v;
            }
        }
        self.approx = Some(table);
    }

    fn ensure_query_factors(&mut self) {
        if self.query_factors.is_some() {
            return;
        }
        // Distinct stream from the pair table so the two never alias.
        let mut rng = ChaCha8Rng::seed_from_u64(self.approx_seed ^ 0x9E37_79B9_7F4A_7C15);
        let factors = (0..self.points.n())
            .map(|_| 1.0 + rng.random::<f64>())
            .collect();
        self.query_factors = Some(factors);
    }
}

/// Per-phase breakdown of counted queries, for reporting pipelines that mix
/// construction and output costs (e.g. cover-tree decompositions).
#[derive(Debug, Default, Clone)]
pub struct QueryLedger {
    phases: Vec<(String, u64)>,
}

impl QueryLedger {
    pub fn record(&mut self, phase: &str, queries: u64) {
        self.phases.push((phase.to_string(), queries));
    }

    pub fn total(&self) -> u64 {
        self.phases.iter().map(|(_, q)| q).sum()
    }

    pub fn phases(&self) -> &[(String, u64)] {
        &self.phases
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_distance_counts_and_values() {
        let ps = PointSet::from_coords(2, vec![0.0, 0.0, 3.0, 4.0], "hand").unwrap();
        let mut oracle = DistanceOracle::new(ps, 0);
        assert_eq!(oracle.exact(0, 1), 5.0);
        assert_eq!(oracle.exact_query_count(), 1);
        // Self-distance is free.
        assert_eq!(oracle.exact(1, 1), 0.0);
        assert_eq!(oracle.exact_query_count(), 1);
        // No symmetry caching: the mirrored query bills again.
        assert_eq!(oracle.exact(1, 0), 5.0);
        assert_eq!(oracle.exact_query_count(), 2);
    }

    #[test]
    fn metric_axioms_hold_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in Generator::ALL {
            for dim in [2usize, 5] {
                let ps = generate_pointset(kind, dim, 40, 11).unwrap();
                for _ in 0..10_000 {
                    let i = rng.random_range(0..40);
                    let j = rng.random_range(0..40);
                    let k = rng.random_range(0..40);
                    let dij = ps.distance(i, j);
                    assert!(dij >= 0.0);
                    assert_eq!(dij, ps.distance(j, i));
                    if i != j {
                        assert!(dij > 0.0 || ps.point(i) == ps.point(j));
                    }
                    assert!(ps.distance(i, k) <= dij + ps.distance(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        for kind in Generator::ALL {
            let a = generate_pointset(kind, 3, 120, 42).unwrap();
            let b = generate_pointset(kind, 3, 120, 42).unwrap();
            assert_eq!(a, b);
            let c = generate_pointset(kind, 3, 120, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn generator_rejects_degenerate_shapes() {
        assert!(generate_pointset(Generator::Uniform, 0, 5, 1).is_err());
        assert!(generate_pointset(Generator::Uniform, 2, 0, 1).is_err());
    }

    #[test]
    fn clustered_assignment_matches_center_layout() {
        let dim = 2;
        let n = 100;
        let seed = 5;
        let ps = generate_pointset(Generator::Clustered, dim, n, seed).unwrap();
        // Recreate the generator's own center stream: 2 centers for n=100.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_centers = n.div_ceil(CLUSTER_SIZE);
        assert_eq!(n_centers, 2);
        let centers: Vec<f64> = (0..n_centers * dim)
            .map(|_| 10_000.0 * rng.random::<f64>())
            .collect();
        for i in 0..n {
            let c = i / CLUSTER_SIZE;
            let p = ps.point(i);
            let mut s = 0.0;
            for d in 0..dim {
                let t = p[d] - centers[c * dim + d];
                s += t * t;
            }
            // Unit normal noise stays well inside this radius.
            assert!(s.sqrt() < 40.0, "point {i} far from its center");
        }
    }

    #[test]
    fn approx_table_is_frozen_and_enveloped() {
        let ps = generate_pointset(Generator::Uniform, 2, 30, 3).unwrap();
        let mut oracle = DistanceOracle::new(ps.clone(), 99);
        for i in 0..30 {
            for j in 0..30 {
                let a = oracle.approx(i, j);
                let d = ps.distance(i, j);
                assert!(a >= d && a <= 2.0 * d + 1e-12, "A={a} d={d}");
                assert_eq!(a, oracle.approx(i, j));
                assert_eq!(a, oracle.approx(j, i));
            }
        }
        // Approximate access is free.
        assert_eq!(oracle.exact_query_count(), 0);
        // Same approx seed regenerates the same table.
        let mut other = DistanceOracle::new(ps, 99);
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(oracle.approx(i, j), other.approx(i, j));
            }
        }
    }

    #[test]
    fn query_point_distances_count_separately() {
        let ps = PointSet::from_coords(2, vec![0.0, 0.0, 3.0, 4.0], "hand").unwrap();
        let mut oracle = DistanceOracle::new(ps, 0);
        assert_eq!(oracle.query_distance(&[3.0, 0.0], 1).unwrap(), 4.0);
        assert_eq!(oracle.query_point_query_count(), 1);
        assert_eq!(oracle.exact_query_count(), 0);
        assert!(oracle.query_distance(&[1.0], 0).is_err());
        let mut a1 = oracle.approx_query_distance(&[3.0, 0.0], 0).unwrap();
        assert!(a1 >= 3.0 && a1 <= 6.0);
        // Frozen factor: repeated calls agree.
        assert_eq!(a1, oracle.approx_query_distance(&[3.0, 0.0], 0).unwrap());
        a1 = oracle.approx_query_distance(&[0.0, 0.0], 1).unwrap();
        assert!(a1 >= 5.0 && a1 <= 10.0);
        assert_eq!(oracle.query_point_query_count(), 1);
    }

    #[test]
    fn text_round_trip_is_lossless() {
        for kind in Generator::ALL {
            let ps = generate_pointset(kind, 4, 25, 17).unwrap();
            let text = ps.to_text();
            let back = PointSet::from_text(&text).unwrap();
            assert_eq!(back.dim(), ps.dim());
            assert_eq!(back.n(), ps.n());
            for i in 0..ps.n() {
                assert_eq!(back.point(i), ps.point(i), "generator {kind}");
            }
        }
    }

    #[test]
    fn from_text_rejects_malformed_input() {
        assert!(PointSet::from_text("").is_err());
        assert!(PointSet::from_text("2 2\n0 0\n1").is_err());
        assert!(PointSet::from_text("0 3\n").is_err());
        assert!(PointSet::from_text("2 1\n0 zebra\n").is_err());
    }

    #[test]
    fn ledger_totals_phases() {
        let mut ledger = QueryLedger::default();
        ledger.record("build", 10);
        ledger.record("edges", 5);
        assert_eq!(ledger.total(), 15);
        assert_eq!(ledger.phases().len(), 2);
    }
}
