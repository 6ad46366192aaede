#include "levy_procure/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "levy_procure/errors.hpp"

namespace levy_procure {

double Estimate::z_score(double value) const {
  const double diff = value - mean;
  if (std_error > 0.0) return diff / std_error;
  if (diff == 0.0) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

bool Estimate::within(double value, double n_se) const {
  return std::abs(z_score(value)) <= n_se;
}

Estimate make_estimate(double mean, double std_error, std::size_t n, std::uint64_t seed) {
  return Estimate{mean, std_error, n, mean - kZ99 * std_error, mean + kZ99 * std_error, seed};
}

Moments::Moments(std::size_t dims)
    : dims_(dims), mean_(dims, 0.0), comoment_(dims * dims, 0.0), delta_(dims, 0.0) {}

void Moments::add(std::span<const double> sample) {
  ++n_;
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < dims_; ++i) {
    delta_[i] = sample[i] - mean_[i];
    mean_[i] += delta_[i] * inv_n;
  }
  // C_ij += (x_i - old mean_i)(x_j - new mean_j)
  for (std::size_t i = 0; i < dims_; ++i) {
    for (std::size_t j = 0; j < dims_; ++j) {
      comoment_[i * dims_ + j] += delta_[i] * (sample[j] - mean_[j]);
    }
  }
}

void Moments::merge(const Moments& other) {
  if (other.dims_ != dims_) throw DomainError("Moments::merge: dimension mismatch");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  for (std::size_t i = 0; i < dims_; ++i) delta_[i] = other.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < dims_; ++i) {
    for (std::size_t j = 0; j < dims_; ++j) {
      comoment_[i * dims_ + j] +=
          other.comoment_[i * dims_ + j] + delta_[i] * delta_[j] * na * nb / n;
    }
  }
  for (std::size_t i = 0; i < dims_; ++i) mean_[i] += delta_[i] * nb / n;
  n_ += other.n_;
}

double Moments::variance(std::size_t i) const { return covariance(i, i); }

double Moments::covariance(std::size_t i, std::size_t j) const {
  if (n_ < 2) return 0.0;
  return comoment_[i * dims_ + j] / static_cast<double>(n_ - 1);
}

Estimate Moments::estimate(std::size_t i, std::uint64_t seed) const {
  const double se = n_ > 0 ? std::sqrt(std::max(variance(i), 0.0) / static_cast<double>(n_)) : 0.0;
  return make_estimate(mean_[i], se, n_, seed);
}

Estimate Moments::difference(std::size_t i, std::size_t j, std::uint64_t seed) const {
  const double var = variance(i) + variance(j) - 2.0 * covariance(i, j);
  const double se = n_ > 0 ? std::sqrt(std::max(var, 0.0) / static_cast<double>(n_)) : 0.0;
  return make_estimate(mean_[i] - mean_[j], se, n_, seed);
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman: need two equal series of length >= 2");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace levy_procure
