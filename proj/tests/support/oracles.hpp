#pragma once

// Reference computations written independently of the library code.

#include <cmath>
#include <cstddef>
#include <vector>

#include "dementia/metrics/metrics.hpp"

namespace dementia::test {

// Hand-stepped bias-corrected Adam on a scalar, written out longhand.
inline std::vector<double> scalar_adam_trace(double w, double lr, int steps, double (*grad)(double)) {
  std::vector<double> trace;
  double m = 0.0, v = 0.0;
  for (int t = 1; t <= steps; ++t) {
    const double g = grad(w);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    w -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    trace.push_back(w);
  }
  return trace;
}

inline double quadratic_grad(double w) { return 2.0 * w; }

inline metrics::ConfusionMatrix count_confusion(const std::vector<int>& p, const std::vector<int>& t) {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] == 1 && t[i] == 1;
    tn += p[i] == 0 && t[i] == 0;
    fp += p[i] == 1 && t[i] == 0;
    fn += p[i] == 0 && t[i] == 1;
  }
  return {tp, tn, fp, fn};
}

// O(n^2) Mann-Whitney concordance, ties counted one half.
inline double concordance(const std::vector<double>& s, const std::vector<int>& t) {
  double num = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (t[i] == 1 && t[j] == 0) {
        pairs += 1;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return num / pairs;
}

}  // namespace dementia::test
