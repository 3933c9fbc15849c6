//! Per-pair lower/upper distance bounds refined by triangle inequality.
//!
//! A [`BoundMatrix`] tracks, for every unordered pair of points, an interval
//! [a, b] certain to contain the true distance. Revealing one distance
//! tightens the whole matrix: upper bounds close under routing through the
//! new edge, then lower bounds improve through six triangle rearrangements.
//! The upper bounds are exactly the shortest-path distances of the revealed
//! edge graph, which is what makes the update per reveal cheap to reason
//! about and to test.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("bound matrix needs at least one point")]
    ZeroSize,
    #[error("cannot reveal the diagonal pair ({0},{0})")]
    DiagonalReveal(usize),
    #[error(
        "revealed distance {v} for pair ({i},{j}) falls outside current bounds [{lower},{upper}]"
    )]
    InconsistentReveal {
        i: usize,
        j: usize,
        v: f64,
        lower: f64,
        upper: f64,
    },
}

/// Symmetric interval bounds on all pairwise distances of an n-point set.
///
/// Invariants: a and b symmetric with zero diagonal, 0 <= a <= b entrywise,
/// a never decreases and b never increases across updates, and revealed
/// pairs have a = b = their exact distance.
#[derive(Debug, Clone)]
pub struct BoundMatrix {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    known: Vec<bool>,
    revealed: usize,
}

impl BoundMatrix {
    pub fn new(n: usize) -> Result<Self, BoundsError> {
        if n == 0 {
            return Err(BoundsError::ZeroSize);
        }
        let mut b = vec![f64::INFINITY; n * n];
        for i in 0..n {
            b[i * n + i] = 0.0;
        }
        Ok(BoundMatrix {
            n,
            a: vec![0.0; n * n],
            b,
            known: vec![false; n * n],
            revealed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn upper(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.n + j]
    }

    pub fn is_known(&self, i: usize, j: usize) -> bool {
        self.known[i * self.n + j]
    }

    pub fn known_count(&self) -> usize {
        self.revealed
    }

    /// b/a with the conventions: a = b gives 1 (covers revealed pairs and
    /// 0/0), positive/0 gives infinity. Diagonal queries are rejected.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        assert_ne!(i, j, "ratio is defined for distinct points only");
        let a = self.a[i * self.n + j];
        let b = self.b[i * self.n + j];
        if a == b {
            1.0
        } else {
            b / a
        }
    }

    /// A pair still matters to a (1+eps)-spanner while b > (1+eps)·a. The
    /// inequality form handles b = infinity and a = 0 without special cases
    /// and is false for every revealed pair.
    pub fn violating(&self, i: usize, j: usize, eps: f64) -> bool {
        let a = self.a[i * self.n + j];
        let b = self.b[i * self.n + j];
        b > (1.0 + eps) * a
    }

    /// Reveals δ(i,j) = v and propagates.
    ///
    /// Full upper pass first: every b[k][l] is minimized over routes through
    /// the new edge, which keeps b equal to the shortest-path metric of the
    /// revealed graph. Then one simultaneous lower pass applies, per pair
    /// (k,l), the six bounds
    ///   v − b[k][i] − b[l][j],  v − b[k][j] − b[l][i],
    ///   a[j][l] − v − b[i][k],  a[i][l] − v − b[j][k],
    ///   a[j][k] − v − b[i][l],  a[i][k] − v − b[j][l]
    /// reading the refreshed b and the pre-pass a rows of i and j.
    pub fn update_bounds(&mut self, i: usize, j: usize, v: f64) -> Result<(), BoundsError> {
        if i == j {
            return Err(BoundsError::DiagonalReveal(i));
        }
        let n = self.n;
        let ij = i * n + j;
        let lower = self.a[ij];
        let upper = self.b[ij];
        // Consistency slack is scale-relative: at coordinate magnitudes of
        // 2^25 a pure 1e-9 window is below one ulp of the sums involved.
        let scale = 1f64
            .max(v.abs())
            .max(lower)
            .max(if upper.is_finite() { upper } else { 0.0 });
        let tol = 1e-9 * scale;
        if !(v >= 0.0) || v < lower - tol || v > upper + tol {
            return Err(BoundsError::InconsistentReveal {
                i,
                j,
                v,
                lower,
                upper,
            });
        }
        if self.known[ij] && self.a[ij] == v {
            return Ok(());
        }

        self.a[ij] = v;
        self.a[j * n + i] = v;
        self.b[ij] = v;
        self.b[j * n + i] = v;
        if !self.known[ij] {
            self.known[ij] = true;
            self.known[j * n + i] = true;
            self.revealed += 1;
        }

        // Every write below lands in both (k,l) and (l,k) with one shared
        // candidate value, because the mirrored cells would otherwise round
        // differently (the terms regroup under the swap) and drift apart by
        // an ulp.

        // ---- upper pass ----
        // Old rows feed the row-skip test; without them the test would
        // compare refreshed values, which satisfy it vacuously.
        let bi_old: Vec<f64> = self.b[i * n..(i + 1) * n].to_vec();
        let bj_old: Vec<f64> = self.b[j * n..(j + 1) * n].to_vec();
        for l in 0..n {
            let c = v + bj_old[l];
            if c < self.b[i * n + l] {
                self.b[i * n + l] = c;
                self.b[l * n + i] = c;
            }
            let c = v + bi_old[l];
            if c < self.b[j * n + l] {
                self.b[j * n + l] = c;
                self.b[l * n + j] = c;
            }
        }
        let bi: Vec<f64> = self.b[i * n..(i + 1) * n].to_vec();
        let bj: Vec<f64> = self.b[j * n..(j + 1) * n].to_vec();
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            // If the old distances already satisfied the triangle inequality
            // through the new edge in both directions, no route k→i→j→l or
            // k→j→i→l can beat an existing path; path-closure of the old b
            // makes this skip exact, not heuristic.
            if bi_old[k] + v >= bj_old[k] && bj_old[k] + v >= bi_old[k] {
                continue;
            }
            let di = bi[k] + v;
            let dj = bj[k] + v;
            for l in k + 1..n {
                if l == i || l == j {
                    continue;
                }
                let c = (di + bj[l]).min(dj + bi[l]);
                if c < self.b[k * n + l] {
                    self.b[k * n + l] = c;
                    self.b[l * n + k] = c;
                }
            }
        }

        // ---- lower pass ----
        // Simultaneous (single-pass) semantics: the a-reads of rows i and j
        // come from pre-pass copies, so update order is immaterial.
        let ai_old: Vec<f64> = self.a[i * n..(i + 1) * n].to_vec();
        let aj_old: Vec<f64> = self.a[j * n..(j + 1) * n].to_vec();
        let rmax_ai = ai_old.iter().cloned().fold(0.0, f64::max);
        let rmax_aj = aj_old.iter().cloned().fold(0.0, f64::max);
        let bi: Vec<f64> = self.b[i * n..(i + 1) * n].to_vec();
        let bj: Vec<f64> = self.b[j * n..(j + 1) * n].to_vec();
        for k in 0..n {
            let bki = bi[k];
            let bkj = bj[k];
            let aik = ai_old[k];
            let ajk = aj_old[k];
            // Every candidate in row k is bounded by one of these scalars
            // exceeding its threshold; lower bounds start at 0, so a row
            // where no candidate can be positive cannot improve.
            let can_improve = v > bki
                || v > bkj
                || aik > v
                || ajk > v
                || rmax_aj > v + bki
                || rmax_ai > v + bkj;
            if !can_improve {
                continue;
            }
            let m1 = (v - bki).max(aik - v);
            let m2 = (v - bkj).max(ajk - v);
            let d1 = v + bki;
            let d2 = v + bkj;
            for l in k + 1..n {
                let c = (m1 - bj[l])
                    .max(m2 - bi[l])
                    .max(aj_old[l] - d1)
                    .max(ai_old[l] - d2);
                if c > self.a[k * n + l] {
                    // Clamp keeps a <= b even when float rounding pushes a
                    // candidate an ulp past a tight upper bound.
                    let c = c.min(self.b[k * n + l]);
                    if c > self.a[k * n + l] {
                        self.a[k * n + l] = c;
                        self.a[l * n + k] = c;
                    }
                }
            }
        }
        Ok(())
    }

    /// Text matrix of (a,b) intervals, one row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.n));
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(' ');
                }
                out.push_str(&format!(
                    "({},{})",
                    self.a[i * self.n + j],
                    self.b[i * self.n + j]
                ));
            }
            out.push('\n');
        }
        out
    }
}
