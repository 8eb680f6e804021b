// Test-only reference computations. Nothing here calls into the code paths
// it is used to check.
#ifndef LER_TESTS_ORACLES_H_
#define LER_TESTS_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ler/embedding.h"
#include "ler/patterns.h"
#include "ler/types.h"

namespace ler::testing {

// Brute-force filter decision: long double cosine of the span mean against
// every class pattern, then the threshold rule on the span's own class.
struct OracleDecision {
  long double similarity;
  bool retained;
};

inline std::vector<OracleDecision> oracle_filter(const std::vector<EntitySpan> &spans,
                                                 const EmbeddingMatrix &m,
                                                 const PatternRegistry &reg, double tau) {
  std::vector<OracleDecision> out;
  for (const auto &span : spans) {
    std::vector<long double> mean(m.dim(), 0.0L);
    for (std::size_t t = span.start_token; t < span.end_token; ++t) {
      for (std::size_t j = 0; j < m.dim(); ++j) mean[j] += m.row(t)[j];
    }
    for (auto &x : mean) x /= static_cast<long double>(span.end_token - span.start_token);
    long double scores[kNumEntityLabels];
    for (std::size_t k = 0; k < kNumEntityLabels; ++k) {
      long double dot = 0, na = 0, nb = 0;
      for (std::size_t j = 0; j < m.dim(); ++j) {
        dot += mean[j] * reg.patterns[k][j];
        na += mean[j] * mean[j];
        nb += static_cast<long double>(reg.patterns[k][j]) * reg.patterns[k][j];
      }
      scores[k] = na > 0 ? dot / std::sqrt(na * nb) : 0.0L;
    }
    const long double s = scores[label_index(span.label)];
    bool zero = true;
    for (long double x : mean) zero = zero && x == 0.0L;
    out.push_back({s, !zero && s >= static_cast<long double>(tau)});
  }
  return out;
}

// Multinomial logistic regression trained by shuffled per-sample SGD with
// Eigen; an independent route to the same decision rule.
struct MlrOracle {
  Eigen::MatrixXd w;  // classes x dim
  Eigen::VectorXd b;

  MlrOracle(const std::vector<Eigen::VectorXd> &x, const std::vector<int> &y, int classes,
            int epochs, double lr, std::uint64_t seed) {
    const int dim = static_cast<int>(x.front().size());
    w = Eigen::MatrixXd::Zero(classes, dim);
    b = Eigen::VectorXd::Zero(classes);
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (int e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        Eigen::VectorXd z = w * x[i] + b;
        z.array() -= z.maxCoeff();
        Eigen::VectorXd p = z.array().exp();
        p /= p.sum();
        p[y[i]] -= 1.0;
        w -= lr * p * x[i].transpose();
        b -= lr * p;
      }
    }
  }

  int predict(const Eigen::VectorXd &h) const {
    Eigen::VectorXd z = w * h + b;
    Eigen::Index best;
    z.maxCoeff(&best);
    return static_cast<int>(best);
  }
};

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t n,
                                         double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(n);
  for (auto &x : v) x = dist(rng);
  return v;
}

}  // namespace ler::testing

#endif  // LER_TESTS_ORACLES_H_
