#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fgtk/rng.hpp"

namespace fgtk {

// A point of P([q]): nonnegative entries summing to one. Inputs whose sum is
// within 1e-9 of one are renormalized, anything further off is rejected.
class Simplex {
 public:
  Simplex() = default;
  explicit Simplex(std::vector<double> probs) : p_(std::move(probs)) { normalize(); }

  static Simplex uniform(std::size_t q) {
    return Simplex(std::vector<double>(q, 1.0 / static_cast<double>(q)));
  }
  static Simplex point_mass(std::size_t q, std::size_t z) {
    std::vector<double> v(q, 0.0);
    v.at(z) = 1.0;
    return Simplex(std::move(v));
  }
  // Dirichlet(1, ..., 1), i.e. uniform on the simplex.
  static Simplex random(std::size_t q, RngStream& rng) {
    std::vector<double> v(q);
    double sum = 0.0;
    for (auto& x : v) {
      x = -std::log(1.0 - rng.unit());
      sum += x;
    }
    for (auto& x : v) x /= sum;
    return Simplex(std::move(v));
  }

  std::size_t q() const { return p_.size(); }
  double operator[](std::size_t z) const { return p_[z]; }
  const std::vector<double>& probs() const { return p_; }

  bool operator==(const Simplex& o) const { return p_ == o.p_; }

  double tv_distance(const Simplex& o) const {
    if (o.q() != q()) throw std::invalid_argument("tv_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t z = 0; z < p_.size(); ++z) s += std::abs(p_[z] - o.p_[z]);
    return 0.5 * s;
  }

  double l2_distance(const Simplex& o) const {
    if (o.q() != q()) throw std::invalid_argument("l2_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t z = 0; z < p_.size(); ++z) s += (p_[z] - o.p_[z]) * (p_[z] - o.p_[z]);
    return std::sqrt(s);
  }

  double entropy() const {
    double h = 0.0;
    for (double x : p_)
      if (x > 0.0) h -= x * std::log(x);
    return h;
  }

  std::size_t sample(RngStream& rng) const {
    double u = rng.unit();
    double acc = 0.0;
    for (std::size_t z = 0; z + 1 < p_.size(); ++z) {
      acc += p_[z];
      if (u < acc) return z;
    }
    return p_.size() - 1;
  }

 private:
  void normalize() {
    if (p_.empty()) throw std::invalid_argument("Simplex: q >= 1 required");
    double sum = 0.0;
    for (double x : p_) {
      if (!(x >= 0.0)) throw std::invalid_argument("Simplex: negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("Simplex: entries sum to " + std::to_string(sum));
    for (double& x : p_) x /= sum;
  }

  std::vector<double> p_;
};

}  // namespace fgtk
