//! Exercises the C surface exactly as a foreign caller would: raw pointers
//! in, status codes out.

use fmetric_ffi::*;
use std::ptr;

fn generate(kind: i32, dim: usize, n: usize, seed: u64) -> *mut FmPointSet {
    let mut ps = ptr::null_mut();
    let st = unsafe { fm_pointset_generate(kind, dim, n, seed, &mut ps) };
    assert_eq!(st, FmStatus::Ok);
    assert!(!ps.is_null());
    ps
}

#[test]
fn pointset_lifecycle_and_metadata() {
    let ps = generate(0, 3, 25, 42);
    let mut n = 0usize;
    let mut dim = 0usize;
    unsafe {
        assert_eq!(fm_pointset_n(ps, &mut n), FmStatus::Ok);
        assert_eq!(fm_pointset_dim(ps, &mut dim), FmStatus::Ok);
        fm_pointset_free(ps);
    }
    assert_eq!((n, dim), (25, 3));
}

#[test]
fn coords_round_trip_through_a_spanner() {
    let coords = [0.0, 0.0, 3.0, 0.0, 3.0, 4.0];
    let mut ps = ptr::null_mut();
    unsafe {
        assert_eq!(
            fm_pointset_from_coords(2, 3, coords.as_ptr(), &mut ps),
            FmStatus::Ok
        );
        let mut sp = ptr::null_mut();
        assert_eq!(fm_spanner_build(ps, 0.5, 0, 7, 7, &mut sp), FmStatus::Ok);
        let mut edges = 0usize;
        let mut queries = 0u64;
        assert_eq!(fm_spanner_edge_count(sp, &mut edges), FmStatus::Ok);
        assert_eq!(fm_spanner_queries(sp, &mut queries), FmStatus::Ok);
        assert_eq!(edges as u64, queries, "blind spanners pay one query per edge");
        let (mut i, mut j, mut w) = (0usize, 0usize, 0f64);
        assert_eq!(fm_spanner_edge(sp, 0, &mut i, &mut j, &mut w), FmStatus::Ok);
        assert!(i < 3 && j < 3 && w > 0.0);
        assert_eq!(
            fm_spanner_edge(sp, edges, &mut i, &mut j, &mut w),
            FmStatus::OutOfRange
        );
        let mut stretch = f64::NAN;
        assert_eq!(fm_spanner_max_stretch(sp, ps, &mut stretch), FmStatus::Ok);
        assert!(stretch <= 1.5 * (1.0 + 1e-9), "stretch {stretch}");
        fm_spanner_free(sp);
        fm_pointset_free(ps);
    }
}

#[test]
fn every_strategy_index_builds() {
    let ps = generate(1, 2, 12, 5);
    for strategy in 0..9 {
        let mut sp = ptr::null_mut();
        let st = unsafe { fm_spanner_build(ps, 0.5, strategy, 3, 4, &mut sp) };
        assert_eq!(st, FmStatus::Ok, "strategy {strategy}");
        let mut stretch = f64::NAN;
        unsafe {
            assert_eq!(fm_spanner_max_stretch(sp, ps, &mut stretch), FmStatus::Ok);
            fm_spanner_free(sp);
        }
        assert!(stretch <= 1.5 * (1.0 + 1e-9), "strategy {strategy}: {stretch}");
    }
    unsafe { fm_pointset_free(ps) };
}

#[test]
fn ann_search_finds_the_planted_neighbor() {
    let coords = [0.0, 10.0, 11.0];
    let mut ps = ptr::null_mut();
    unsafe {
        assert_eq!(
            fm_pointset_from_coords(1, 3, coords.as_ptr(), &mut ps),
            FmStatus::Ok
        );
        let q = [1.0];
        let (mut idx, mut dist, mut queries) = (usize::MAX, f64::NAN, 0u64);
        let st = fm_ann_search(ps, q.as_ptr(), 1, 0.0, 9, &mut idx, &mut dist, &mut queries);
        assert_eq!(st, FmStatus::Ok);
        assert_eq!(idx, 0);
        assert_eq!(dist, 1.0);
        assert!(queries >= 1 && queries <= 3);
        fm_pointset_free(ps);
    }
}

#[test]
fn bad_arguments_come_back_as_statuses() {
    let mut ps = ptr::null_mut();
    unsafe {
        assert_eq!(
            fm_pointset_generate(0, 2, 10, 1, ptr::null_mut()),
            FmStatus::NullPointer
        );
        assert_eq!(
            fm_pointset_generate(9, 2, 10, 1, &mut ps),
            FmStatus::InvalidArgument
        );
        assert_eq!(
            fm_pointset_generate(-1, 2, 10, 1, &mut ps),
            FmStatus::InvalidArgument
        );
        assert_eq!(
            fm_pointset_from_coords(2, 0, [0.0].as_ptr(), &mut ps),
            FmStatus::InvalidArgument
        );
        let mut n = 0usize;
        assert_eq!(fm_pointset_n(ptr::null(), &mut n), FmStatus::NullPointer);

        let ps = generate(0, 2, 8, 3);
        let mut sp = ptr::null_mut();
        // eps must be positive for spanner construction
        assert_eq!(
            fm_spanner_build(ps, 0.0, 0, 1, 1, &mut sp),
            FmStatus::InvalidArgument
        );
        // wspd spanners additionally need eps <= 1
        assert_eq!(
            fm_spanner_build(ps, 2.0, 7, 1, 1, &mut sp),
            FmStatus::InvalidArgument
        );
        assert_eq!(
            fm_spanner_build(ps, 0.5, 99, 1, 1, &mut sp),
            FmStatus::InvalidArgument
        );
        // ann rejects a query of the wrong dimension
        let q = [1.0];
        let (mut idx, mut dist, mut queries) = (0usize, 0f64, 0u64);
        assert_eq!(
            fm_ann_search(ps, q.as_ptr(), 1, 0.0, 1, &mut idx, &mut dist, &mut queries),
            FmStatus::InvalidArgument
        );
        // mismatched handles are refused rather than trusted
        let other = generate(0, 2, 9, 4);
        assert_eq!(fm_spanner_build(ps, 0.5, 0, 1, 1, &mut sp), FmStatus::Ok);
        let mut stretch = 0f64;
        assert_eq!(
            fm_spanner_max_stretch(sp, other, &mut stretch),
            FmStatus::InvalidArgument
        );
        fm_spanner_free(sp);
        fm_pointset_free(other);
        fm_pointset_free(ps);
        fm_pointset_free(ptr::null_mut());
        fm_spanner_free(ptr::null_mut());
    }
}
