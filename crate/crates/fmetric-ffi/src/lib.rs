//! C ABI over the core library: opaque handles, status codes, no panics
//! across the boundary. The matching declarations live in include/fmetric.h;
//! keep the two in sync when the surface changes.

use fmetric::ann::{ann_search, AnnInstance};
use fmetric::metric::{generate_pointset, DistanceOracle, Generator, PointSet};
use fmetric::spanner::{build_spanner, verify_stretch, Spanner, Strategy};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status of every fallible call. Anything but Ok leaves outputs untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Internal = 4,
}

pub struct FmPointSet(PointSet);

pub struct FmSpanner(Spanner);

fn guarded(f: impl FnOnce() -> FmStatus) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => FmStatus::Internal,
    }
}

/// Generates a point set; kind selects uniform (0), normal (1),
/// clustered (2), or exp (3).
///
/// # Safety
/// `out` must be a valid pointer; on Ok it receives an owned handle that
/// must be released with [`fm_pointset_free`].
#[no_mangle]
pub unsafe extern "C" fn fm_pointset_generate(
    kind: i32,
    dim: usize,
    n: usize,
    seed: u64,
    out: *mut *mut FmPointSet,
) -> FmStatus {
    if out.is_null() {
        return FmStatus::NullPointer;
    }
    guarded(|| {
        let Some(&gen) = usize::try_from(kind)
            .ok()
            .and_then(|k| Generator::ALL.get(k))
        else {
            return FmStatus::InvalidArgument;
        };
        match generate_pointset(gen, dim, n, seed) {
            Ok(ps) => {
                *out = Box::into_raw(Box::new(FmPointSet(ps)));
                FmStatus::Ok
            }
            Err(_) => FmStatus::InvalidArgument,
        }
    })
}

/// Wraps caller-provided row-major coordinates (n rows of dim values).
///
/// # Safety
/// `coords` must point to n*dim readable doubles and `out` must be valid;
/// the handle returned on Ok owns a copy of the data.
#[no_mangle]
pub unsafe extern "C" fn fm_pointset_from_coords(
    dim: usize,
    n: usize,
    coords: *const f64,
    out: *mut *mut FmPointSet,
) -> FmStatus {
    if coords.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    if dim == 0 || n == 0 {
        return FmStatus::InvalidArgument;
    }
    let data = std::slice::from_raw_parts(coords, n * dim).to_vec();
    guarded(|| match PointSet::from_coords(dim, data, "capi") {
        Ok(ps) => {
            *out = Box::into_raw(Box::new(FmPointSet(ps)));
            FmStatus::Ok
        }
        Err(_) => FmStatus::InvalidArgument,
    })
}

/// # Safety
/// `ps` must be a live handle from this library and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_pointset_n(ps: *const FmPointSet, out: *mut usize) -> FmStatus {
    if ps.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    *out = (&(*ps).0).n();
    FmStatus::Ok
}

/// # Safety
/// `ps` must be a live handle from this library and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_pointset_dim(ps: *const FmPointSet, out: *mut usize) -> FmStatus {
    if ps.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    *out = (&(*ps).0).dim();
    FmStatus::Ok
}

/// # Safety
/// `ps` must be a handle from this library, not yet freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fm_pointset_free(ps: *mut FmPointSet) {
    if !ps.is_null() {
        drop(Box::from_raw(ps));
    }
}

/// Builds a spanner over the point set. The strategy index follows the
/// canonical ordering: blind_greedy (0), blind_random (1),
/// blind_random_connect_first (2), blind_random_lower_bound_first (3),
/// quasi_sorted_greedy (4), quasi_sorted_shaker (5), greedy_baseline (6),
/// wspd_quadtree (7), wspd_covertree (8).
///
/// # Safety
/// `ps` must be a live handle and `out` valid; on Ok the caller owns the
/// spanner handle and must release it with [`fm_spanner_free`].
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_build(
    ps: *const FmPointSet,
    eps: f64,
    strategy: i32,
    seed: u64,
    approx_seed: u64,
    out: *mut *mut FmSpanner,
) -> FmStatus {
    if ps.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    let points = &(*ps).0;
    guarded(|| {
        let Some(&strategy) = usize::try_from(strategy)
            .ok()
            .and_then(|s| Strategy::ALL.get(s))
        else {
            return FmStatus::InvalidArgument;
        };
        let mut oracle = DistanceOracle::new(points.clone(), approx_seed);
        match build_spanner(&mut oracle, eps, strategy, seed) {
            Ok(sp) => {
                *out = Box::into_raw(Box::new(FmSpanner(sp)));
                FmStatus::Ok
            }
            Err(_) => FmStatus::InvalidArgument,
        }
    })
}

/// # Safety
/// `sp` must be a live handle from this library and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_edge_count(
    sp: *const FmSpanner,
    out: *mut usize,
) -> FmStatus {
    if sp.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    *out = (&(*sp).0.edges).len();
    FmStatus::Ok
}

/// # Safety
/// `sp` must be a live handle from this library and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_queries(sp: *const FmSpanner, out: *mut u64) -> FmStatus {
    if sp.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    *out = (*sp).0.queries_used;
    FmStatus::Ok
}

/// Copies edge `idx` out as endpoints and exact weight.
///
/// # Safety
/// `sp` must be a live handle; the three outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_edge(
    sp: *const FmSpanner,
    idx: usize,
    out_i: *mut usize,
    out_j: *mut usize,
    out_w: *mut f64,
) -> FmStatus {
    if sp.is_null() || out_i.is_null() || out_j.is_null() || out_w.is_null() {
        return FmStatus::NullPointer;
    }
    let Some(&(i, j, w)) = (&(*sp).0.edges).get(idx) else {
        return FmStatus::OutOfRange;
    };
    *out_i = i;
    *out_j = j;
    *out_w = w;
    FmStatus::Ok
}

/// Worst stretch of the spanner over the point set it was built from
/// (infinity when disconnected).
///
/// # Safety
/// Both handles must be live and `out` valid; `ps` must be the point set
/// the spanner was built over (sizes are checked, contents are trusted).
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_max_stretch(
    sp: *const FmSpanner,
    ps: *const FmPointSet,
    out: *mut f64,
) -> FmStatus {
    if sp.is_null() || ps.is_null() || out.is_null() {
        return FmStatus::NullPointer;
    }
    let spanner = &(*sp).0;
    let points = &(*ps).0;
    if spanner.n != points.n() {
        return FmStatus::InvalidArgument;
    }
    guarded(|| {
        *out = verify_stretch(spanner, points);
        FmStatus::Ok
    })
}

/// # Safety
/// `sp` must be a handle from this library, not yet freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fm_spanner_free(sp: *mut FmSpanner) {
    if !sp.is_null() {
        drop(Box::from_raw(sp));
    }
}

/// Runs one randomized (1+eps) nearest-neighbor search for the query point.
///
/// # Safety
/// `ps` must be a live handle, `q` must point to `q_len` readable doubles,
/// and the three outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fm_ann_search(
    ps: *const FmPointSet,
    q: *const f64,
    q_len: usize,
    eps: f64,
    seed: u64,
    out_index: *mut usize,
    out_distance: *mut f64,
    out_queries: *mut u64,
) -> FmStatus {
    if ps.is_null() || q.is_null() || out_index.is_null() || out_distance.is_null()
        || out_queries.is_null()
    {
        return FmStatus::NullPointer;
    }
    let points = (&(*ps).0).clone();
    let query = std::slice::from_raw_parts(q, q_len).to_vec();
    guarded(|| {
        let inst = match AnnInstance::new(points, query, eps) {
            Ok(inst) => inst,
            Err(_) => return FmStatus::InvalidArgument,
        };
        let r = ann_search(&inst, seed);
        *out_index = r.candidate;
        *out_distance = r.distance;
        *out_queries = r.queries_used;
        FmStatus::Ok
    })
}
