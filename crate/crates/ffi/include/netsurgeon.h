/* SPDX-License-Identifier: Apache-2.0 */

#ifndef NETSURGEON_H
#define NETSURGEON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_UTF8 = 2,
  NS_STATUS_PARSE = 3,
  NS_STATUS_INVALID_NETWORK = 4,
  NS_STATUS_UNKNOWN_LABEL = 5,
  NS_STATUS_SPECTRAL_CONDITION = 6,
  NS_STATUS_PRECONDITION = 7,
  NS_STATUS_ILLEGAL_INTERVENTION = 8,
  NS_STATUS_ENUMERATION_CAP = 9,
  NS_STATUS_BUFFER_TOO_SMALL = 10,
  NS_STATUS_IO = 11,
  NS_STATUS_SINGULAR = 12,
  NS_STATUS_INTERNAL = 13,
  NS_STATUS_PANIC = 14,
} NsStatus;

/**
 * Direction of one link change; values of the `change` field.
 */
typedef enum NsChange {
  NS_CHANGE_ADD = 1,
  NS_CHANGE_REMOVE = -1,
} NsChange;

/**
 * Key-group search strategy; values of the `search` argument.
 */
typedef enum NsSearch {
  NS_SEARCH_EXHAUSTIVE = 0,
  NS_SEARCH_GREEDY = 1,
} NsSearch;

/**
 * Opaque certified game handle.
 */
typedef struct NsGame NsGame;

/**
 * Opaque network handle.
 */
typedef struct NsNetwork NsNetwork;

/**
 * One entry of a structural intervention, by node index.
 */
typedef struct NsLinkChange {
  size_t i;
  size_t j;
  /**
   * `NS_CHANGE_ADD` or `NS_CHANGE_REMOVE`.
   */
  int32_t change;
} NsLinkChange;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or an empty string.
 * Valid until the next call into this library on the same thread.
 */
const char *ns_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/**
 * Parses an edge list. On success `*out_network` owns a new network.
 */
enum NsStatus ns_network_parse(const char *edge_list, struct NsNetwork **out_network);

void ns_network_free(struct NsNetwork *network);

/**
 * Number of nodes, or 0 for a null handle.
 */
size_t ns_network_node_count(const struct NsNetwork *network);

/**
 * Label of node `i`, owned by the network handle; null when out of range.
 */
const char *ns_network_label(const struct NsNetwork *network, size_t i);

enum NsStatus ns_network_index_of(const struct NsNetwork *network,
                                  const char *label,
                                  size_t *out_index);

enum NsStatus ns_spectral_radius(const struct NsNetwork *network, double *out_radius);

/**
 * Certifies a game on `network`. `theta` may be null for unit
 * characteristics; otherwise it holds `theta_len` entries, one per node.
 */
enum NsStatus ns_game_new(const struct NsNetwork *network,
                          const double *theta,
                          size_t theta_len,
                          double delta,
                          struct NsGame **out_game);

void ns_game_free(struct NsGame *game);

/**
 * Largest adjacency eigenvalue found during certification.
 */
enum NsStatus ns_game_lambda_max(const struct NsGame *game, double *out_lambda);

/**
 * Katz-Bonacich centralities into `out_b` (at least n entries).
 */
enum NsStatus ns_centrality(const struct NsGame *game, double *out_b, size_t len);

/**
 * Closed-walk counts `m_ii` into `out_m` (at least n entries).
 */
enum NsStatus ns_self_loops(const struct NsGame *game, double *out_m, size_t len);

/**
 * Aggregate loss from removing the group `nodes`.
 */
enum NsStatus ns_intercentrality(const struct NsGame *game,
                                 const size_t *nodes,
                                 size_t count,
                                 double *out_value);

/**
 * Equilibrium change from a set of link changes. `out_delta_x` receives
 * per-node changes (at least n entries, may be null when `len` is 0);
 * `out_delta_aggregate` receives their sum.
 */
enum NsStatus ns_structural_effect(const struct NsGame *game,
                                   const struct NsLinkChange *changes,
                                   size_t count,
                                   double *out_delta_x,
                                   size_t len,
                                   double *out_delta_aggregate);

/**
 * Best group of size `k`. Writes its members (ascending) to `out_nodes`
 * and its intercentrality to `out_value`.
 */
enum NsStatus ns_key_group(const struct NsGame *game,
                           size_t k,
                           int32_t search,
                           size_t *out_nodes,
                           size_t len,
                           double *out_value);

/**
 * Value of toggling link `(i, j)`: the potential-link index when the link
 * is absent and the existing-link index when present. The aggregate
 * changes by `delta * value` on addition and `-delta * value` on removal.
 */
enum NsStatus ns_link_value(const struct NsGame *game, size_t i, size_t j, double *out_value);

/**
 * Bridge index for linking node `i` of `first` to node `j` of `second`.
 */
enum NsStatus ns_bridge_index(const struct NsGame *first,
                              const struct NsGame *second,
                              size_t i,
                              size_t j,
                              double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETSURGEON_H */
