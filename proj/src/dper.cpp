#include "rlab/dper.hpp"

#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/rng.hpp"

namespace rlab {

Matrix action_deviation(const MlpParams& actor, const Batch& batch) {
  Matrix predicted = mlp_forward(actor, batch.states);
  if (!predicted.same_shape(batch.actions))
    throw ContractViolation("action_deviation: actor output width mismatch");
  Matrix dev = predicted;
  for (std::size_t i = 0; i < dev.size(); ++i)
    dev.values[i] -= batch.actions.values[i];
  return dev;
}

GeneratorStats generator_stats(const Matrix& deviations, double jitter) {
  std::size_t b = deviations.rows;
  std::size_t m = deviations.cols;
  if (b < 2)
    throw InsufficientData("generator_stats: need at least 2 rows");
  if (jitter < 0.0)
    throw ContractViolation("generator_stats: jitter must be >= 0");

  GeneratorStats s;
  Matrix mean = column_means(deviations);
  s.mu.assign(mean.values.begin(), mean.values.end());

  s.sigma = Matrix(m, m);
  for (std::size_t k = 0; k < b; ++k) {
    const double* row = deviations.row(k);
    for (std::size_t i = 0; i < m; ++i) {
      double ci = row[i] - s.mu[i];
      for (std::size_t j = i; j < m; ++j)
        s.sigma.at(i, j) += ci * (row[j] - s.mu[j]);
    }
  }
  double inv = 1.0 / static_cast<double>(b - 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double v = s.sigma.at(i, j) * inv;
      s.sigma.at(i, j) = v;
      s.sigma.at(j, i) = v;
    }
    s.sigma.at(i, i) += jitter;
  }
  return s;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw ContractViolation("cholesky: matrix not square");
  std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (!(sum > 0.0))
          throw NumericError("cholesky: matrix not positive definite");
        l.at(i, i) = std::sqrt(sum);
      } else {
        l.at(i, j) = sum / l.at(j, j);
      }
    }
  }
  return l;
}

double kl_score_full(const GeneratorStats& stats, const KlReference& ref) {
  std::size_t m = stats.mu.size();
  if (ref.dim != m || stats.sigma.rows != m || stats.sigma.cols != m)
    throw ContractViolation("kl_score_full: dimension mismatch");
  if (!(ref.variance > 0.0))
    throw ContractViolation("kl_score_full: reference variance must be > 0");

  Matrix l = cholesky(stats.sigma);
  double logdet = 0.0;
  double trace = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    logdet += 2.0 * std::log(l.at(i, i));
    trace += stats.sigma.at(i, i);
    quad += stats.mu[i] * stats.mu[i];
  }
  double s = ref.variance;
  double md = static_cast<double>(m);
  return 0.5 * (trace / s + quad / s - md + md * std::log(s) - logdet);
}

double kl_score_diag(std::span<const double> mu, const KlReference& ref) {
  if (ref.dim != mu.size())
    throw ContractViolation("kl_score_diag: dimension mismatch");
  if (!(ref.variance > 0.0))
    throw ContractViolation("kl_score_diag: reference variance must be > 0");
  double quad = 0.0;
  for (double v : mu) quad += v * v;
  return quad / (2.0 * ref.variance);
}

std::size_t argmin_score(std::span<const double> etas) {
  if (etas.empty()) throw ContractViolation("argmin_score: empty score list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < etas.size(); ++i) {
    if (etas[i] < etas[best]) best = i;
  }
  return best;
}

CandidateSet score_candidates(const MlpParams& actor,
                              std::span<const Batch> candidates,
                              const KlReference& ref, KlMode mode,
                              double jitter) {
  if (candidates.empty())
    throw ContractViolation("score_candidates: no candidates");
  CandidateSet set;
  set.stats.reserve(candidates.size());
  set.etas.reserve(candidates.size());
  for (const Batch& batch : candidates) {
    Matrix dev = action_deviation(actor, batch);
    GeneratorStats stats = generator_stats(dev, jitter);
    double eta = mode == KlMode::Full ? kl_score_full(stats, ref)
                                      : kl_score_diag(stats.mu, ref);
    stats.eta = eta;
    set.etas.push_back(eta);
    set.stats.push_back(std::move(stats));
  }
  set.chosen = argmin_score(set.etas);
  return set;
}

ActorBatchChoice select_actor_batch(const RingBuffer& buffer,
                                    const MlpParams& actor, std::size_t k,
                                    std::size_t b, const KlReference& ref,
                                    KlMode mode, double jitter, Rng& rng) {
  if (k == 0) throw ContractViolation("select_actor_batch: k must be >= 1");
  std::vector<Batch> batches;
  std::vector<SampleMeta> metas;
  batches.reserve(k);
  metas.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    SampleResult drawn = sample_uniform(buffer, b, rng);
    batches.push_back(std::move(drawn.batch));
    metas.push_back(std::move(drawn.meta));
  }
  CandidateSet set = score_candidates(actor, batches, ref, mode, jitter);
  set.metas = std::move(metas);
  ActorBatchChoice choice;
  choice.batch = std::move(batches[set.chosen]);
  choice.candidates = std::move(set);
  return choice;
}

}  // namespace rlab
