#ifndef RLNCSIM_H
#define RLNCSIM_H

/* Generated by cbindgen from rlncsim-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RLNC_OK 0

/**
 * A required pointer argument was null.
 */
#define RLNC_ERR_NULL_ARG 1

/**
 * A string argument was not valid UTF-8.
 */
#define RLNC_ERR_UTF8 2

/**
 * Input text failed to parse.
 */
#define RLNC_ERR_PARSE 3

/**
 * Input parsed but violates a model invariant.
 */
#define RLNC_ERR_VALIDATION 4

/**
 * A numeric argument is outside its mathematical domain.
 */
#define RLNC_ERR_DOMAIN 5

/**
 * File I/O failed.
 */
#define RLNC_ERR_IO 6

/**
 * A validated run failed while executing.
 */
#define RLNC_ERR_RUNTIME 7

/**
 * An internal panic was caught at the boundary.
 */
#define RLNC_ERR_PANIC 8

/**
 * Opaque validated experiment: a network plus simulation parameters.
 */
typedef struct RlncExperiment RlncExperiment;

/**
 * Opaque parsed network.
 */
typedef struct RlncNetwork RlncNetwork;

/**
 * Aggregate outcome of a batch of trials.
 */
typedef struct RlncSummary {
  uint64_t trials;
  /**
   * Trials in which every sink decoded all K messages.
   */
  uint64_t successes;
  double frequency;
  double wilson_lo;
  double wilson_hi;
  uint64_t timeouts;
  /**
   * Mean completion time over completed rateless trials; NaN when
   * unavailable.
   */
  double mean_completion_time;
} RlncSummary;

/**
 * Rateless achieved-rate measurement.
 */
typedef struct RlncAchievedRate {
  /**
   * Mean K / completion-time over completed trials.
   */
  double rate;
  double mean_completion_time;
  uint64_t completed;
  uint64_t trials;
} RlncAchievedRate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Most recent error on this thread as a malloc'd string, or null if none.
 * The caller owns the copy; release it with [`rlnc_string_free`].
 */
char *rlnc_last_error_message(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 */
void rlnc_string_free(char *s);

/**
 * Parses a network description into a new handle.
 *
 * # Safety
 * `text` must be a valid nul-terminated string; `out` must be a valid
 * pointer.
 */
int rlnc_network_parse(const char *text, struct RlncNetwork **out);

/**
 * Releases a network handle. Null is a no-op.
 *
 * # Safety
 * `net` must be null or a pointer from [`rlnc_network_parse`], not yet
 * freed.
 */
void rlnc_network_free(struct RlncNetwork *net);

/**
 * # Safety
 * `net` and `out` must be valid pointers.
 */
int rlnc_network_node_count(const struct RlncNetwork *net, size_t *out);

/**
 * Looks up a node id by label.
 *
 * # Safety
 * `net`, `label`, and `out` must be valid pointers.
 */
int rlnc_network_node_id(const struct RlncNetwork *net, const char *label, size_t *out);

/**
 * Canonical text form of the network, as a malloc'd string.
 *
 * # Safety
 * `net` and `out` must be valid pointers.
 */
int rlnc_network_serialize(const struct RlncNetwork *net, char **out);

/**
 * Min-cut capacity between two nodes, as a double (the library computes it
 * exactly; this rounds once at the boundary).
 *
 * # Safety
 * `net` and `out` must be valid pointers.
 */
int rlnc_network_min_cut_capacity(const struct RlncNetwork *net,
                                  size_t source,
                                  size_t sink,
                                  double *out);

/**
 * Multicast capacity: the minimum over `sinks` of the per-sink min cut.
 *
 * # Safety
 * `net` and `out` must be valid; `sinks` must point to `n_sinks` ids.
 */
int rlnc_network_multicast_capacity(const struct RlncNetwork *net,
                                    size_t source,
                                    const size_t *sinks,
                                    size_t n_sinks,
                                    double *out);

/**
 * C - R - R ln(C/R), the asymptotic error exponent, in nats per unit time.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int rlnc_error_exponent(double c, double r, double *out);

/**
 * The same exponent via numeric Chernoff optimization.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int rlnc_chernoff_exponent_numeric(double c, double r, double *out);

/**
 * Poisson-tail lower bound and Chernoff upper bound on the decoding error
 * probability at a finite delta.
 *
 * # Safety
 * `lower` and `upper` must be valid pointers.
 */
int rlnc_poisson_tail_bounds(double c, double r, double delta, double *lower, double *upper);

/**
 * Probability that a random K x K matrix over GF(q) is invertible.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
int rlnc_invertibility_probability(size_t k, uint32_t q, double *out);

/**
 * Builds an experiment from config text plus network text (no file I/O).
 * The config's `network` key is ignored in this form. Trials default to 1
 * if the config does not set them.
 *
 * # Safety
 * All pointers must be valid; strings nul-terminated.
 */
int rlnc_experiment_parse(const char *config_text,
                          const char *network_text,
                          struct RlncExperiment **out);

/**
 * Builds an experiment by reading a config file; the network file is
 * resolved relative to it.
 *
 * # Safety
 * `config_path` must be a valid nul-terminated string; `out` valid.
 */
int rlnc_experiment_load(const char *config_path, struct RlncExperiment **out);

/**
 * Releases an experiment handle. Null is a no-op.
 *
 * # Safety
 * `exp` must be null or an unfreed experiment pointer.
 */
void rlnc_experiment_free(struct RlncExperiment *exp);

/**
 * # Safety
 * `exp` must be a valid experiment pointer.
 */
int rlnc_experiment_set_seed(struct RlncExperiment *exp, uint64_t seed);

/**
 * # Safety
 * `exp` must be a valid experiment pointer.
 */
int rlnc_experiment_set_trials(struct RlncExperiment *exp, uint64_t trials);

/**
 * Runs the configured batch and fills `out` with the aggregate.
 *
 * # Safety
 * `exp` and `out` must be valid pointers.
 */
int rlnc_experiment_run(const struct RlncExperiment *exp, struct RlncSummary *out);

/**
 * Measures K/T over rateless trials; requires `mode rateless`.
 *
 * # Safety
 * `exp` and `out` must be valid pointers.
 */
int rlnc_experiment_achieved_rate(const struct RlncExperiment *exp, struct RlncAchievedRate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RLNCSIM_H */
