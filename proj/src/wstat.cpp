#include "qdecomp/wstat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qdecomp/errors.hpp"

namespace qdecomp {

namespace {

void check_inputs(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw DataError("empty input");
  if (values.size() != weights.size()) throw DataError("values and weights differ in length");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("values must be finite");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DataError("weights must be positive and finite");
  }
}

}  // namespace

Ecdf::Ecdf(std::span<const double> values, std::span<const double> weights) {
  check_inputs(values, weights);
  count_ = values.size();

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  CompensatedSum running;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    running.add(weights[i]);
    if (!points_.empty() && points_.back() == values[i]) {
      cumweights_.back() = running.value();
    } else {
      points_.push_back(values[i]);
      cumweights_.push_back(running.value());
    }
  }
  total_weight_ = running.value();
  for (double& c : cumweights_) c /= total_weight_;
  cumweights_.back() = 1.0;
}

double Ecdf::cdf(double y) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), y);
  if (it == points_.begin()) return 0.0;
  return cumweights_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double Ecdf::quantile(double tau) const {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw DomainError("quantile level must lie in (0, 1], got " + std::to_string(tau));
  }
  if (empty()) throw DataError("quantile of an empty distribution");
  const auto it = std::lower_bound(cumweights_.begin(), cumweights_.end(), tau);
  if (it == cumweights_.end()) return points_.back();
  return points_[static_cast<std::size_t>(it - cumweights_.begin())];
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  check_inputs(values, weights);
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num.add(weights[i] * values[i]);
    den.add(weights[i]);
  }
  return num.value() / den.value();
}

double weighted_variance(std::span<const double> values, std::span<const double> weights) {
  const double mean = weighted_mean(values, weights);
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = values[i] - mean;
    num.add(weights[i] * dev * dev);
    den.add(weights[i]);
  }
  return num.value() / den.value();
}

double checkfn_objective(std::span<const double> y, std::span<const int> d,
                         std::span<const double> w, double tau, QrCoefficients coef) {
  CompensatedSum total;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double fitted = coef.intercept + coef.slope * d[i];
    total.add(w[i] * check_loss(y[i] - fitted, tau));
  }
  return total.value();
}

QrCoefficients checkfn_qr_oracle(std::span<const double> y, std::span<const int> d,
                                 std::span<const double> w, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
  if (y.size() != d.size() || y.size() != w.size()) {
    throw DataError("outcome, treatment and weight lengths differ");
  }
  std::vector<double> control;
  std::vector<double> treated;
  for (std::size_t i = 0; i < y.size(); ++i) {
    (d[i] == 1 ? treated : control).push_back(y[i]);
  }
  if (control.empty() || treated.empty()) {
    throw EstimationError("check-function oracle needs both treatment arms");
  }

  bool have_best = false;
  QrCoefficients best;
  double best_value = 0.0;
  for (double b0 : control) {
    for (double fitted_treated : treated) {
      const QrCoefficients cand{b0, fitted_treated - b0};
      const double value = checkfn_objective(y, d, w, tau, cand);
      const double tol = 1e-12 * std::max(1.0, std::abs(best_value));
      bool better = !have_best || value < best_value - tol;
      if (have_best && std::abs(value - best_value) <= tol) {
        better = cand.intercept < best.intercept ||
                 (cand.intercept == best.intercept &&
                  std::abs(cand.slope) < std::abs(best.slope));
      }
      if (better) {
        best = cand;
        best_value = value;
        have_best = true;
      }
    }
  }
  return best;
}

}  // namespace qdecomp
