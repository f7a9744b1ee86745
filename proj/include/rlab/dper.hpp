#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rlab/matrix.hpp"
#include "rlab/mlp.hpp"
#include "rlab/replay.hpp"

namespace rlab {

class Rng;

// Gaussian summary of a batch's action deviations.
struct GeneratorStats {
  std::vector<double> mu;       // column means, length m
  Matrix sigma;                 // m x m sample covariance (+ jitter)
  std::optional<double> eta;    // divergence score once computed
};

// Reference distribution N(0, variance * I) the deviations are compared
// against; variance is the squared exploration noise scale.
struct KlReference {
  double variance = 0.0;
  std::size_t dim = 0;
};

enum class KlMode {
  Full,  // trace + quadratic - logdet form over the full covariance
  Diag,  // mean-only form ||mu||^2 / (2 variance)
};

// Row k is actor(state_k) - action_k: how far the stored action lies from
// what the current policy would do.
Matrix action_deviation(const MlpParams& actor, const Batch& batch);

// Column means and unbiased covariance (divisor b - 1) of the deviation
// rows, with jitter * I added for numerical headroom. Needs b >= 2.
GeneratorStats generator_stats(const Matrix& deviations, double jitter);

// KL(N(mu, sigma) || N(0, s I)) in closed form:
//   0.5 * (tr(sigma)/s + mu.mu/s - m + m ln s - ln det sigma).
// The log determinant comes from a Cholesky factorization; a factorization
// failure means the covariance is not positive definite.
double kl_score_full(const GeneratorStats& stats, const KlReference& ref);

// Mean-only score ||mu||^2 / (2 s); agrees with the full form whenever the
// sample covariance equals s I.
double kl_score_diag(std::span<const double> mu, const KlReference& ref);

// Everything scored during one actor-batch selection, kept for logging.
struct CandidateSet {
  std::vector<SampleMeta> metas;
  std::vector<GeneratorStats> stats;
  std::vector<double> etas;
  std::size_t chosen = 0;
};

// Index of the smallest score; ties go to the lowest index.
std::size_t argmin_score(std::span<const double> etas);

// Scores pre-drawn candidate batches against the current actor and picks
// the most on-policy one.
CandidateSet score_candidates(const MlpParams& actor,
                              std::span<const Batch> candidates,
                              const KlReference& ref, KlMode mode,
                              double jitter);

struct ActorBatchChoice {
  Batch batch;
  CandidateSet candidates;
};

// Draws k uniform candidate batches of size b, scores them, returns the
// winner plus the full score set.
ActorBatchChoice select_actor_batch(const RingBuffer& buffer,
                                    const MlpParams& actor, std::size_t k,
                                    std::size_t b, const KlReference& ref,
                                    KlMode mode, double jitter, Rng& rng);

// Lower Cholesky factor of a symmetric positive definite matrix.
// Throws NumericError when a pivot is not strictly positive.
Matrix cholesky(const Matrix& a);

}  // namespace rlab
