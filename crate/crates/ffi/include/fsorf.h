#ifndef FSORF_H
#define FSORF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FsorfStatus {
  FSORF_STATUS_OK = 0,
  FSORF_STATUS_INVALID_ARGUMENT = 1,
  FSORF_STATUS_NULL_POINTER = 2,
  FSORF_STATUS_INDEX_OUT_OF_RANGE = 3,
  FSORF_STATUS_QUADRATURE_FAILURE = 4,
  FSORF_STATUS_SINGULAR_CHAIN = 5,
  FSORF_STATUS_NOT_CONVERGED = 6,
  FSORF_STATUS_PANIC = 7,
} FsorfStatus;

typedef enum FsorfProtocol {
  FSORF_PROTOCOL_P_PERSISTENCE = 0,
  FSORF_PROTOCOL_EQUAL_PRIORITY = 1,
} FsorfProtocol;

typedef enum FsorfArbitration {
  FSORF_ARBITRATION_FORFEIT = 0,
  FSORF_ARBITRATION_PER_CONTENDER = 1,
} FsorfArbitration;

// Solved network; opaque to C.
typedef struct FsorfNetwork FsorfNetwork;

// Finished simulation run; opaque to C.
typedef struct FsorfSimulation FsorfSimulation;

// FSO link budget, all quantities linear (watts, metres).
typedef struct FsorfFsoParams {
  double wavelength_m;
  double lo_power_w;
  double shot_noise_var;
  double responsivity_a_per_w;
  double detector_diameter_m;
  double tx_power_w;
  double divergence_rad;
  double jitter_std_m;
  double link_distance_m;
  double cn2;
  double weather_atten_db_per_km;
  double avg_symbol_energy;
} FsorfFsoParams;

typedef struct FsorfRfParams {
  double carrier_hz;
  double bandwidth_hz;
  double tx_power_w;
  double tx_gain_dbi;
  double rx_gain_dbi;
  double noise_psd_dbm_per_mhz;
  double noise_figure_db;
  double oxygen_atten_db_per_km;
  double rain_atten_db_per_km;
  double nakagami_m;
  double link_distance_m;
  double avg_symbol_energy;
} FsorfRfParams;

typedef struct FsorfFading {
  double alpha;
  double beta;
  double xi;
} FsorfFading;

// Network operating point. `p` is ignored under equal priority and by
// [`fsorf_optimize_p`].
typedef struct FsorfNetworkSpec {
  double a;
  double b;
  double omega;
  double p;
  size_t n_nodes;
  size_t buffer_size;
  size_t omega_ratio;
  enum FsorfProtocol protocol;
} FsorfNetworkSpec;

typedef struct FsorfNetworkSummary {
  size_t n_nodes;
  double total_throughput;
  double rf_need_prob;
  double rf_utilization;
} FsorfNetworkSummary;

// Analytical metrics of one node. `queue_delay` is +inf when the node
// holds frames but never delivers; `efficiency` is NaN when `omega` is 0.
typedef struct FsorfNodeMetrics {
  size_t node;
  double p_rf;
  double rf_busy_prob;
  double throughput;
  double avg_buffer;
  double queue_delay;
  double loss_prob;
  double efficiency;
} FsorfNodeMetrics;

typedef struct FsorfOptimization {
  double p_star;
  double total_throughput;
  size_t iterations;
  double bracket_width;
  bool multimodal;
} FsorfOptimization;

typedef struct FsorfSimConfig {
  uint64_t seed;
  uint64_t steps;
  uint64_t warmup;
  enum FsorfArbitration arbitration;
} FsorfSimConfig;

typedef struct FsorfSimSummary {
  size_t n_nodes;
  uint64_t measured_steps;
  double rf_busy_fraction;
  uint64_t rf_grants;
} FsorfSimSummary;

// Counts cover the measured steps only. `mean_delay` is NaN when no
// frame was delivered.
typedef struct FsorfNodeSimStats {
  size_t node;
  uint64_t arrivals;
  uint64_t delivered;
  uint64_t lost;
  uint64_t buffer_start;
  uint64_t buffer_end;
  uint64_t rf_starts;
  double throughput;
  double loss_rate;
  double time_avg_buffer;
  double mean_delay;
} FsorfNodeSimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fsorf_version(void);

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *fsorf_last_error(void);

// Static NUL-terminated name of a status code.
const char *fsorf_status_name(enum FsorfStatus status);

// Fills `out` with the 1 km moderate-fog FSO reference link.
//
// # Safety
// `out` must be null or valid for writes.
enum FsorfStatus fsorf_fso_params_default(struct FsorfFsoParams *out);

// Fills `out` with the 1 km, 60 GHz reference backup link.
//
// # Safety
// `out` must be null or valid for writes.
enum FsorfStatus fsorf_rf_params_default(struct FsorfRfParams *out);

// Linear SNR threshold for `modulation_order`-QAM at bit error rate `ber`.
//
// # Safety
// `out` must be null or valid for writes.
enum FsorfStatus fsorf_switching_threshold(uint32_t modulation_order, double ber, double *out);

// Fading parameters implied by the turbulence and pointing geometry.
//
// # Safety
// `params` must be null or valid for reads, `out` null or valid for writes.
enum FsorfStatus fsorf_fso_fading(const struct FsorfFsoParams *params, struct FsorfFading *out);

// FSO outage probability `a` at linear threshold `gamma_t`. A non-null
// `fading` replaces the parameters derived from the link geometry.
//
// # Safety
// Pointers must be null (only `fading` may be) or valid.
enum FsorfStatus fsorf_fso_outage(const struct FsorfFsoParams *params,
                                  const struct FsorfFading *fading,
                                  double gamma_t,
                                  double *out);

// RF outage probability `b` at linear threshold `gamma_t`.
//
// # Safety
// `params` must be null or valid for reads, `out` null or valid for writes.
enum FsorfStatus fsorf_rf_outage(const struct FsorfRfParams *params, double gamma_t, double *out);

// Solves every node's chain and stores the result in `*out`, which must
// later be released with [`fsorf_network_free`].
//
// # Safety
// `spec` must be null or valid for reads, `out` null or valid for writes.
enum FsorfStatus fsorf_network_solve(const struct FsorfNetworkSpec *spec,
                                     struct FsorfNetwork **out);

// Releases a handle from [`fsorf_network_solve`]. Null is ignored.
//
// # Safety
// `network` must be null or a live handle not freed before.
void fsorf_network_free(struct FsorfNetwork *network);

// # Safety
// `network` must be null or a live handle, `out` null or valid for writes.
enum FsorfStatus fsorf_network_summary(const struct FsorfNetwork *network,
                                       struct FsorfNetworkSummary *out);

// Metrics of node `node` (1 = highest priority).
//
// # Safety
// `network` must be null or a live handle, `out` null or valid for writes.
enum FsorfStatus fsorf_network_node(const struct FsorfNetwork *network,
                                    size_t node,
                                    struct FsorfNodeMetrics *out);

// Copies node `node`'s steady-state distribution into `buf`. Index 0 is
// the empty buffer; `i` frames at RF step `j` sit at
// `(i - 1) * omega_ratio + j + 1`. `*len` holds the capacity on entry
// and the number of states on return; a short buffer yields
// `IndexOutOfRange` with `*len` set to the size needed.
//
// # Safety
// `network` must be null or a live handle, `len` null or valid, and `buf`
// valid for `*len` writes (it may be null when `*len` is 0).
enum FsorfStatus fsorf_network_steady_state(const struct FsorfNetwork *network,
                                            size_t node,
                                            double *buf,
                                            size_t *len);

// Persistence probability maximizing total throughput, searched over
// `[0.001, 1]` to tolerance `tol`.
//
// # Safety
// `spec` must be null or valid for reads, `out` null or valid for writes.
enum FsorfStatus fsorf_optimize_p(const struct FsorfNetworkSpec *spec,
                                  double tol,
                                  struct FsorfOptimization *out);

// Runs the joint Monte-Carlo simulation and stores the result in `*out`,
// which must later be released with [`fsorf_simulation_free`].
//
// # Safety
// `spec` and `sim` must be null or valid for reads, `out` null or valid
// for writes.
enum FsorfStatus fsorf_simulate(const struct FsorfNetworkSpec *spec,
                                const struct FsorfSimConfig *sim,
                                struct FsorfSimulation **out);

// Releases a handle from [`fsorf_simulate`]. Null is ignored.
//
// # Safety
// `simulation` must be null or a live handle not freed before.
void fsorf_simulation_free(struct FsorfSimulation *simulation);

// # Safety
// `simulation` must be null or a live handle, `out` null or valid for
// writes.
enum FsorfStatus fsorf_simulation_summary(const struct FsorfSimulation *simulation,
                                          struct FsorfSimSummary *out);

// # Safety
// `simulation` must be null or a live handle, `out` null or valid for
// writes.
enum FsorfStatus fsorf_simulation_node(const struct FsorfSimulation *simulation,
                                       size_t node,
                                       struct FsorfNodeSimStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSORF_H */
