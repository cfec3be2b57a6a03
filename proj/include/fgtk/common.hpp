#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fgtk {

inline constexpr const char* kVersion = "0.1.0";

// Thrown when an exact enumeration would exceed its hard cell-count guard.
class resource_limit_error : public std::runtime_error {
 public:
  explicit resource_limit_error(const std::string& what) : std::runtime_error(what) {}
};

inline double xlnx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

// Streaming log-sum-exp accumulator. Keeps a running maximum and a rescaled
// sum so that exp() never overflows; adding -inf terms is a no-op.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    }
  }
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

// Kahan compensated summation.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean with jackknife standard error (for the sample mean this reduces to
// the usual sqrt(var / n) estimate, computed in a single compensated pass).
inline MeanSe mean_and_stderr(const std::vector<double>& xs) {
  MeanSe r;
  std::size_t n = xs.size();
  if (n == 0) return r;
  KahanSum s;
  for (double x : xs) s.add(x);
  r.mean = s.value() / static_cast<double>(n);
  if (n < 2) return r;
  KahanSum v;
  for (double x : xs) {
    double d = x - r.mean;
    v.add(d * d);
  }
  r.std_error = std::sqrt(std::max(0.0, v.value()) /
                          (static_cast<double>(n) * static_cast<double>(n - 1)));
  return r;
}

inline unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, total). Each index writes only its own slot, so the
// result is identical for every worker count; the caller reduces in index
// order afterwards.
template <typename Fn>
void parallel_for(std::size_t total, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers);
  if (workers <= 1 || total < 2) {
    for (std::size_t i = 0; i < total; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futs;
  std::size_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    futs.push_back(std::async(std::launch::async, [lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }));
  }
  for (auto& f : futs) f.get();
}

}  // namespace fgtk
