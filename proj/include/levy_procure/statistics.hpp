#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace levy_procure {

// Two-sided 99% normal quantile used for every reported confidence interval.
inline constexpr double kZ99 = 2.576;

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;

  // (value - mean) / std_error; infinite when the estimate has zero spread and differs.
  double z_score(double value) const;
  bool within(double value, double n_se) const;
};

Estimate make_estimate(double mean, double std_error, std::size_t n, std::uint64_t seed);

// Running means and co-moments of a fixed number of per-sample quantities
// (Welford update, Chan et al. merge). Merging in a fixed order is deterministic.
class Moments {
 public:
  explicit Moments(std::size_t dims = 0);

  void add(std::span<const double> sample);
  void merge(const Moments& other);

  std::size_t dims() const { return dims_; }
  std::size_t count() const { return n_; }
  double mean(std::size_t i) const { return mean_[i]; }
  double variance(std::size_t i) const;
  double covariance(std::size_t i, std::size_t j) const;

  Estimate estimate(std::size_t i, std::uint64_t seed) const;
  // Estimate of E[x_i - x_j] with the paired standard error.
  Estimate difference(std::size_t i, std::size_t j, std::uint64_t seed) const;

 private:
  std::size_t dims_;
  std::size_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> comoment_;  // dims x dims, row-major
  std::vector<double> delta_;
};

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace levy_procure
