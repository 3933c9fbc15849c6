//! Randomized incremental nearest-neighbor search over a precomputed metric.
//!
//! The setting flips the spanner cost model: all pairwise distances between
//! the stored points are considered already paid for, and only distances
//! from the query point to stored points count. Each computed distance r_i
//! feeds reverse-triangle lower bounds |δ(p_i, p_k) − r_i| on every point
//! not yet reached, and points whose bound already rules them out are
//! skipped without paying.

use crate::metric::{DistanceOracle, PointSet};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnError {
    #[error("query point has dimension {got}, point set has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ann search needs eps >= 0, got {0}")]
    InvalidEps(f64),
}

/// A search instance: stored points (with their implicit, free pairwise
/// distances), the query point, and the slack factor.
#[derive(Debug, Clone)]
pub struct AnnInstance {
    points: PointSet,
    q: Vec<f64>,
    eps: f64,
}

impl AnnInstance {
    pub fn new(points: PointSet, q: Vec<f64>, eps: f64) -> Result<Self, AnnError> {
        if q.len() != points.dim() {
            return Err(AnnError::DimensionMismatch {
                expected: points.dim(),
                got: q.len(),
            });
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(AnnError::InvalidEps(eps));
        }
        Ok(AnnInstance { points, q, eps })
    }

    pub fn n(&self) -> usize {
        self.points.n()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    /// Stored-point distance, free under the search cost model.
    pub fn pairwise(&self, i: usize, j: usize) -> f64 {
        self.points.distance(i, j)
    }

    /// Query-to-point distance; every call is one paid query.
    fn query_distance(&self, i: usize) -> f64 {
        self.points
            .distance_to(&self.q, i)
            .expect("dimension checked at construction")
    }
}

#[derive(Debug, Clone)]
pub struct AnnResult {
    pub candidate: usize,
    pub distance: f64,
    pub queries_used: u64,
    pub permutation_seed: u64,
    /// The (point index, computed distance) pairs in computation order.
    pub query_log: Vec<(usize, f64)>,
}

/// Per-search lower-bound state, indexed by permutation position.
pub struct AnnState {
    perm: Vec<usize>,
    a: Vec<f64>,
}

impl AnnState {
    pub fn new(perm: Vec<usize>) -> Self {
        let a = vec![0.0; perm.len()];
        AnnState { perm, a }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.a
    }

    /// Folds a freshly computed distance r at permutation position `pos`
    /// into the bounds of every later position; earlier ones are decided.
    pub fn update_lower_bounds(&mut self, inst: &AnnInstance, pos: usize, r: f64) {
        let p = self.perm[pos];
        for k in pos + 1..self.perm.len() {
            let c = (inst.pairwise(p, self.perm[k]) - r).abs();
            if c > self.a[k] {
                self.a[k] = c;
            }
        }
    }
}

/// The uniform permutation a given seed produces; exposed so traces can be
/// replayed and checked externally.
pub fn permutation_for_seed(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

pub fn ann_search(inst: &AnnInstance, seed: u64) -> AnnResult {
    ann_search_with_permutation(inst, permutation_for_seed(inst.n(), seed), seed)
}

/// Runs the search along an explicit visiting order. The first point is
/// always paid for; any later point is skipped exactly when its lower bound
/// reaches v/(1+eps), and the candidate is replaced only on a strict
/// improvement, so ties keep the earlier point.
pub fn ann_search_with_permutation(
    inst: &AnnInstance,
    perm: Vec<usize>,
    seed: u64,
) -> AnnResult {
    assert_eq!(perm.len(), inst.n(), "permutation must cover every point");
    let mut state = AnnState::new(perm);
    let first = state.perm[0];
    let r0 = inst.query_distance(first);
    let mut query_log = vec![(first, r0)];
    state.update_lower_bounds(inst, 0, r0);
    let mut candidate = first;
    let mut v = r0;
    for pos in 1..state.perm.len() {
        if state.a[pos] >= v / (1.0 + inst.eps) {
            continue;
        }
        let p = state.perm[pos];
        let r = inst.query_distance(p);
        query_log.push((p, r));
        state.update_lower_bounds(inst, pos, r);
        if r < v {
            candidate = p;
            v = r;
        }
    }
    AnnResult {
        candidate,
        distance: v,
        queries_used: query_log.len() as u64,
        permutation_seed: seed,
        query_log,
    }
}

/// Exact nearest neighbor by scanning all n query distances; ties go to the
/// lowest index. Test oracle and baseline.
pub fn brute_force_nn(inst: &AnnInstance) -> (usize, f64) {
    let mut best = 0;
    let mut bd = inst.query_distance(0);
    for i in 1..inst.n() {
        let d = inst.query_distance(i);
        if d < bd {
            best = i;
            bd = d;
        }
    }
    (best, bd)
}

/// Indices surviving the 2-approximation cut: everything within twice the
/// smallest approximate distance. The true nearest neighbor always survives
/// because its approximation is at most 2δ(q,nn) ≤ 2·min A.
pub fn prefilter_keep(approx: &[f64]) -> Vec<usize> {
    let m = approx.iter().copied().fold(f64::INFINITY, f64::min);
    approx
        .iter()
        .enumerate()
        .filter(|(_, &a)| a <= 2.0 * m)
        .map(|(i, _)| i)
        .collect()
}

/// Drops points whose frozen approximate query distance exceeds twice the
/// minimum, returning the reduced instance and the kept original indices.
/// The approximate distances are free, so the reduction costs no queries.
pub fn prefilter_with_approx(
    inst: &AnnInstance,
    oracle: &mut DistanceOracle,
) -> (AnnInstance, Vec<usize>) {
    let approx: Vec<f64> = (0..inst.n())
        .map(|i| {
            oracle
                .approx_query_distance(&inst.q, i)
                .expect("instance and oracle share the point set")
        })
        .collect();
    let keep = prefilter_keep(&approx);
    let mut coords = Vec::with_capacity(keep.len() * inst.dim());
    for &i in &keep {
        coords.extend_from_slice(inst.points.point(i));
    }
    let points = PointSet::from_coords(inst.dim(), coords, inst.points.label())
        .expect("the kept set is never empty");
    let reduced = AnnInstance::new(points, inst.q.clone(), inst.eps)
        .expect("reduced instance keeps the original query and eps");
    (reduced, keep)
}

/// Post-hoc check of the pruning guarantee: once r_i is computed, any later
/// point whose stored distance to p_i is at least (1 + 1/(1+eps))·r_i or at
/// most (eps/(1+eps))·r_i must have been skipped. The thresholds carry a
/// 1e-12 relative margin so only genuine violations are flagged.
pub fn check_pruning_invariant(inst: &AnnInstance, result: &AnnResult) -> bool {
    let perm = permutation_for_seed(inst.n(), result.permutation_seed);
    let mut position = vec![0usize; inst.n()];
    for (pos, &p) in perm.iter().enumerate() {
        position[p] = pos;
    }
    let eps = inst.eps;
    for (a, &(i, r_i)) in result.query_log.iter().enumerate() {
        for &(j, _) in &result.query_log[a + 1..] {
            if position[j] < position[i] {
                continue;
            }
            let d = inst.pairwise(i, j);
            let far = d > (1.0 + 1.0 / (1.0 + eps)) * r_i * (1.0 + 1e-12);
            let near = d < (eps / (1.0 + eps)) * r_i * (1.0 - 1e-12);
            if far || near {
                return false;
            }
        }
    }
    true
}

/// One harness record: `n dim eps seed queries candidate distance`.
pub fn record_line(inst: &AnnInstance, r: &AnnResult) -> String {
    format!(
        "{} {} {} {} {} {} {:.16e}",
        inst.n(),
        inst.dim(),
        inst.eps(),
        r.permutation_seed,
        r.queries_used,
        r.candidate,
        r.distance
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_pointset, Generator};

    fn hand_instance(coords: Vec<f64>, dim: usize, q: Vec<f64>, eps: f64) -> AnnInstance {
        let ps = PointSet::from_coords(dim, coords, "hand").unwrap();
        AnnInstance::new(ps, q, eps).unwrap()
    }

    #[test]
    fn first_query_can_prune_everything() {
        let inst = hand_instance(vec![0.0, 10.0, 11.0], 1, vec![1.0], 0.0);
        let r = ann_search_with_permutation(&inst, vec![0, 1, 2], 99);
        assert_eq!(r.candidate, 0);
        assert_eq!(r.distance, 1.0);
        assert_eq!(r.queries_used, 1);
        assert_eq!(r.query_log, vec![(0, 1.0)]);
        assert_eq!(r.permutation_seed, 99);
    }

    #[test]
    fn single_point_is_returned_immediately() {
        let inst = hand_instance(vec![4.0, 5.0], 2, vec![0.0, 0.0], 0.1);
        let r = ann_search(&inst, 7);
        assert_eq!(r.candidate, 0);
        assert_eq!(r.queries_used, 1);
        assert_eq!(r.distance, inst.points().distance_to(&[0.0, 0.0], 0).unwrap());
    }

    #[test]
    fn coincident_query_short_circuits() {
        let ps = generate_pointset(Generator::Uniform, 3, 20, 5).unwrap();
        let q = ps.point(8).to_vec();
        let inst = AnnInstance::new(ps, q, 0.1).unwrap();
        let mut perm: Vec<usize> = (0..20).collect();
        perm.swap(0, 8);
        let r = ann_search_with_permutation(&inst, perm, 0);
        assert_eq!(r.candidate, 8);
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.queries_used, 1);
    }

    #[test]
    fn guarantee_holds_and_eps_zero_is_exact() {
        for gen in Generator::ALL {
            for (dim, n) in [(2usize, 10usize), (3, 50)] {
                for eps in [0.0, 0.01, 0.5] {
                    for seed in 0..5u64 {
                        let ps = generate_pointset(gen, dim, n, 1000 + seed).unwrap();
                        let q: Vec<f64> =
                            ps.point(0).iter().map(|x| x * 0.9 + 0.01).collect();
                        let inst = AnnInstance::new(ps, q, eps).unwrap();
                        let r = ann_search(&inst, seed);
                        let (_, exact) = brute_force_nn(&inst);
                        assert!(
                            r.distance <= (1.0 + eps) * exact + 1e-12,
                            "{gen} dim={dim} n={n} eps={eps} seed={seed}"
                        );
                        if eps == 0.0 {
                            assert_eq!(r.distance, exact);
                        }
                        assert_eq!(r.queries_used as usize, r.query_log.len());
                        assert!(r.queries_used as usize <= n);
                        assert_eq!(r.distance, inst.points().distance_to(inst.q(), r.candidate).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn lower_bounds_never_exceed_true_distances() {
        let ps = generate_pointset(Generator::Normal, 2, 10, 3).unwrap();
        let q = vec![0.25, -0.5];
        let inst = AnnInstance::new(ps, q.clone(), 0.1).unwrap();
        let perm = permutation_for_seed(10, 17);
        let mut state = AnnState::new(perm.clone());
        for pos in 0..4 {
            let r = inst.points().distance_to(&q, perm[pos]).unwrap();
            state.update_lower_bounds(&inst, pos, r);
            for k in 0..10 {
                let truth = inst.points().distance_to(&q, perm[k]).unwrap();
                assert!(
                    state.lower_bounds()[k] <= truth * (1.0 + 1e-12) + 1e-300,
                    "bound overshoots at position {k}"
                );
            }
        }
    }

    #[test]
    fn update_rules_on_hand_values() {
        let inst = hand_instance(vec![0.0, 3.0, 7.0], 1, vec![0.0], 0.0);
        let mut state = AnnState::new(vec![0, 1, 2]);
        // r = 0 at the first point turns bounds into plain stored distances
        state.update_lower_bounds(&inst, 0, 0.0);
        assert_eq!(state.lower_bounds(), &[0.0, 3.0, 7.0]);
        // a stored distance equal to r contributes nothing
        let mut state = AnnState::new(vec![1, 0, 2]);
        state.update_lower_bounds(&inst, 0, 3.0);
        assert_eq!(state.lower_bounds()[1], 0.0);
        assert_eq!(state.lower_bounds()[2], 1.0);
    }

    #[test]
    fn pruning_invariant_on_random_runs() {
        let mut runs = 0;
        for gen in [Generator::Uniform, Generator::Clustered] {
            for eps in [0.0, 0.1] {
                for seed in 0..25u64 {
                    let ps = generate_pointset(gen, 2, 40, 300 + seed).unwrap();
                    let q = vec![0.4, 0.6];
                    let inst = AnnInstance::new(ps, q, eps).unwrap();
                    let r = ann_search(&inst, seed);
                    assert!(check_pruning_invariant(&inst, &r), "{gen} eps={eps} {seed}");
                    runs += 1;
                }
            }
        }
        assert_eq!(runs, 100);
    }

    #[test]
    fn candidate_improves_strictly_along_the_log() {
        let ps = generate_pointset(Generator::Uniform, 2, 200, 9).unwrap();
        let inst = AnnInstance::new(ps, vec![0.5, 0.5], 0.01).unwrap();
        let r = ann_search(&inst, 4);
        let mut v = f64::INFINITY;
        let mut last_improver = None;
        for &(p, d) in &r.query_log {
            if d < v {
                assert!(d < v);
                v = d;
                last_improver = Some(p);
            }
        }
        assert_eq!(v, r.distance);
        assert_eq!(last_improver, Some(r.candidate));
    }

    #[test]
    fn same_seed_same_log() {
        let ps = generate_pointset(Generator::Exp, 2, 60, 21).unwrap();
        let inst = AnnInstance::new(ps, vec![100.0, 4000.0], 0.1).unwrap();
        let a = ann_search(&inst, 11);
        let b = ann_search(&inst, 11);
        assert_eq!(a.query_log, b.query_log);
        assert_eq!(a.candidate, b.candidate);
    }

    #[test]
    fn permutations_are_complete_and_deterministic() {
        let p1 = permutation_for_seed(30, 2);
        let p2 = permutation_for_seed(30, 2);
        assert_eq!(p1, p2);
        let mut sorted = p1.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn prefilter_keeps_within_twice_the_minimum() {
        assert_eq!(prefilter_keep(&[3.0, 5.0, 7.0]), vec![0, 1]);
        assert_eq!(prefilter_keep(&[1.0]), vec![0]);
    }

    #[test]
    fn prefilter_retains_the_true_nearest_neighbor() {
        for seed in 0..50u64 {
            let ps = generate_pointset(Generator::Uniform, 2, 80, 500 + seed).unwrap();
            let q = vec![0.3, 0.8];
            let inst = AnnInstance::new(ps.clone(), q.clone(), 0.1).unwrap();
            let mut oracle = DistanceOracle::new(ps, 77 + seed);
            let (reduced, keep) = prefilter_with_approx(&inst, &mut oracle);
            assert_eq!(reduced.n(), keep.len());
            let (nn, exact) = brute_force_nn(&inst);
            assert!(keep.contains(&nn), "seed {seed} dropped the nearest neighbor");
            // searching the reduced set still meets the guarantee
            let r = ann_search(&reduced, seed);
            assert!(r.distance <= (1.0 + 0.1) * exact + 1e-12);
        }
    }

    #[test]
    fn record_line_layout() {
        let inst = hand_instance(vec![0.0, 2.0], 1, vec![0.5], 0.01);
        let r = ann_search_with_permutation(&inst, vec![0, 1], 3);
        assert_eq!(record_line(&inst, &r), "2 1 0.01 3 1 0 5.0000000000000000e-1");
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let ps = generate_pointset(Generator::Uniform, 2, 5, 1).unwrap();
        assert!(matches!(
            AnnInstance::new(ps.clone(), vec![0.0], 0.1),
            Err(AnnError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            AnnInstance::new(ps, vec![0.0, 0.0], -0.5),
            Err(AnnError::InvalidEps(_))
        ));
    }
}
