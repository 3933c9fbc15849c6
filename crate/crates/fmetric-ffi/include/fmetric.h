/* C interface to the fmetric library. Link against libfmetric_ffi.
 * Kept in sync with src/lib.rs by hand.
 */

#ifndef FMETRIC_H
#define FMETRIC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum FmStatus {
  FM_OK = 0,
  FM_NULL_POINTER = 1,
  FM_INVALID_ARGUMENT = 2,
  FM_OUT_OF_RANGE = 3,
  FM_INTERNAL = 4,
} FmStatus;

/* Point generators for fm_pointset_generate. */
enum {
  FM_GENERATOR_UNIFORM = 0,
  FM_GENERATOR_NORMAL = 1,
  FM_GENERATOR_CLUSTERED = 2,
  FM_GENERATOR_EXP = 3,
};

/* Spanner strategies for fm_spanner_build. */
enum {
  FM_STRATEGY_BLIND_GREEDY = 0,
  FM_STRATEGY_BLIND_RANDOM = 1,
  FM_STRATEGY_BLIND_RANDOM_CONNECT_FIRST = 2,
  FM_STRATEGY_BLIND_RANDOM_LOWER_BOUND_FIRST = 3,
  FM_STRATEGY_QUASI_SORTED_GREEDY = 4,
  FM_STRATEGY_QUASI_SORTED_SHAKER = 5,
  FM_STRATEGY_GREEDY_BASELINE = 6,
  FM_STRATEGY_WSPD_QUADTREE = 7,
  FM_STRATEGY_WSPD_COVERTREE = 8,
};

/* Opaque handles; release with the matching *_free. */
typedef struct FmPointSet FmPointSet;
typedef struct FmSpanner FmSpanner;

FmStatus fm_pointset_generate(int32_t kind, size_t dim, size_t n, uint64_t seed,
                              FmPointSet **out);
FmStatus fm_pointset_from_coords(size_t dim, size_t n, const double *coords,
                                 FmPointSet **out);
FmStatus fm_pointset_n(const FmPointSet *ps, size_t *out);
FmStatus fm_pointset_dim(const FmPointSet *ps, size_t *out);
void fm_pointset_free(FmPointSet *ps);

FmStatus fm_spanner_build(const FmPointSet *ps, double eps, int32_t strategy,
                          uint64_t seed, uint64_t approx_seed, FmSpanner **out);
FmStatus fm_spanner_edge_count(const FmSpanner *sp, size_t *out);
FmStatus fm_spanner_queries(const FmSpanner *sp, uint64_t *out);
FmStatus fm_spanner_edge(const FmSpanner *sp, size_t idx, size_t *out_i,
                         size_t *out_j, double *out_w);
FmStatus fm_spanner_max_stretch(const FmSpanner *sp, const FmPointSet *ps,
                                double *out);
void fm_spanner_free(FmSpanner *sp);

FmStatus fm_ann_search(const FmPointSet *ps, const double *q, size_t q_len,
                       double eps, uint64_t seed, size_t *out_index,
                       double *out_distance, uint64_t *out_queries);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FMETRIC_H */
