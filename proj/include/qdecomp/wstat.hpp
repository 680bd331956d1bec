#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace qdecomp {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Weighted empirical distribution function of one subsample.
//
// Stores the distinct support points in ascending order together with the
// normalized cumulative weight at each point. cdf() is the right-continuous
// step function and quantile() its left-continuous generalized inverse
// inf{y : F(y) >= tau}; no interpolation is done anywhere.
class Ecdf {
 public:
  Ecdf() = default;
  Ecdf(std::span<const double> values, std::span<const double> weights);

  double cdf(double y) const;
  double quantile(double tau) const;

  std::span<const double> points() const { return points_; }
  std::span<const double> cumweights() const { return cumweights_; }
  double total_weight() const { return total_weight_; }
  std::size_t count() const { return count_; }
  bool empty() const { return points_.empty(); }
  double min() const { return points_.front(); }
  double max() const { return points_.back(); }

 private:
  std::vector<double> points_;
  std::vector<double> cumweights_;
  double total_weight_ = 0.0;
  std::size_t count_ = 0;
};

double weighted_mean(std::span<const double> values, std::span<const double> weights);

// Population-style weighted variance sum w (x - mean)^2 / sum w.
double weighted_variance(std::span<const double> values, std::span<const double> weights);

// rho_tau(a) = a (tau - 1{a <= 0})
inline double check_loss(double residual, double tau) {
  return residual * (tau - (residual <= 0.0 ? 1.0 : 0.0));
}

struct QrCoefficients {
  double intercept = 0.0;  // control-arm quantile
  double slope = 0.0;      // quantile treatment effect
};

// Weighted check-function objective of y ~ intercept + slope * d.
double checkfn_objective(std::span<const double> y, std::span<const int> d,
                         std::span<const double> w, double tau, QrCoefficients coef);

// Exact minimizer of the weighted check-function objective for a single
// binary regressor, by exhaustive search over intercepts drawn from the
// control outcomes and fitted treated values drawn from the treated outcomes.
// Ties go to the smallest intercept, then the smallest |slope|. Quadratic in
// the sample size; meant as a reference for small samples.
QrCoefficients checkfn_qr_oracle(std::span<const double> y, std::span<const int> d,
                                 std::span<const double> w, double tau);

}  // namespace qdecomp
