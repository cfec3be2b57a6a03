#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fgtk/rng.hpp"
#include "fgtk/simplex.hpp"

namespace fgtk {

// Empirical measure over simplex points representing pi in P^2([q]).
// Uniform weights unless a projection has tagged members (the counterweight
// carries mass alpha).
class Population {
 public:
  Population() = default;
  explicit Population(std::vector<Simplex> members) : members_(std::move(members)) {
    if (members_.size() < 1) throw std::invalid_argument("Population: nonempty required");
    weights_.assign(members_.size(), 1.0 / static_cast<double>(members_.size()));
    build_sampler();
  }
  Population(std::vector<Simplex> members, std::vector<double> weights)
      : members_(std::move(members)), weights_(std::move(weights)) {
    if (members_.empty() || members_.size() != weights_.size())
      throw std::invalid_argument("Population: members/weights mismatch");
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("Population: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("Population: weights must sum to 1");
    for (double& w : weights_) w /= sum;
    build_sampler();
  }

  static Population point_mass(const Simplex& gamma, std::size_t n_members) {
    return Population(std::vector<Simplex>(n_members, gamma));
  }

  void build_sampler() {
    uniform_ = true;
    for (double w : weights_)
      if (std::abs(w - weights_[0]) > 1e-15) {
        uniform_ = false;
        break;
      }
    if (!uniform_) {
      cdf_.resize(weights_.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        acc += weights_[i];
        cdf_[i] = acc;
      }
    }
  }

  std::size_t size() const { return members_.size(); }
  std::size_t q() const { return members_.at(0).q(); }
  const Simplex& member(std::size_t i) const { return members_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<Simplex>& members() const { return members_; }
  const std::vector<double>& weights() const { return weights_; }

  Simplex mean() const {
    std::vector<double> m(q(), 0.0);
    for (std::size_t i = 0; i < members_.size(); ++i)
      for (std::size_t z = 0; z < m.size(); ++z) m[z] += weights_[i] * members_[i][z];
    return Simplex(std::move(m));
  }

  const Simplex& sample(RngStream& rng) const {
    if (uniform_) return members_[rng.uniform_index(members_.size())];
    double u = rng.unit();
    std::size_t i = static_cast<std::size_t>(
        std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    return members_[std::min(i, members_.size() - 1)];
  }

 private:
  std::vector<Simplex> members_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
  bool uniform_ = true;
};

struct MeanProjectionReport {
  double alpha = 0.0;
  Simplex counterweight;
  Simplex mean_before;
  Simplex mean_after;
};

namespace detail {

// l_c(l) = -(1 + l ln l) / ln l, strictly increasing on (0, 1).
inline double ell_c(double ell) { return -(1.0 + ell * std::log(ell)) / std::log(ell); }

// l_circ = l_c^{-1}(psi_min), by bisection.
inline double ell_circ(double psi_min) {
  double lo = 1e-300, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (ell_c(mid) < psi_min ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Mean projection onto P^2_{*,gamma*}: mixes the population with the point
// mass at the counterweight [mean]_c so the mean lands exactly on gamma*.
// alpha and [.]_c follow the piecewise construction: for l = |mean - gamma*|_2,
//   l = 0:          [.]_c = gamma*,                       alpha = 0
//   l in (0, l_o]:  [.]_c = gamma* + (l_c(l)/l)(gamma*-mean), alpha = -l ln l
//   l >= l_o:       [.]_c = gamma* + (psi_min/l)(gamma*-mean), alpha = l/(l+psi_min)
// with l_o = l_c^{-1}(psi_min). Requires gamma* >= psi_min so the
// counterweight stays inside the simplex.
inline std::pair<Population, MeanProjectionReport> project_to_mean(const Population& pi,
                                                                   const Simplex& gamma_star,
                                                                   double psi_min) {
  if (gamma_star.q() != pi.q()) throw std::invalid_argument("project_to_mean: dimension mismatch");
  MeanProjectionReport rep;
  rep.mean_before = pi.mean();
  double ell = rep.mean_before.l2_distance(gamma_star);

  double alpha, scale;
  if (ell <= 0.0) {
    rep.alpha = 0.0;
    rep.counterweight = gamma_star;
    rep.mean_after = rep.mean_before;
    return {pi, rep};
  }
  double ell_o = detail::ell_circ(psi_min);
  if (ell <= ell_o) {
    alpha = -ell * std::log(ell);
    scale = detail::ell_c(ell) / ell;
  } else {
    alpha = ell / (ell + psi_min);
    scale = psi_min / ell;
  }
  std::vector<double> cw(pi.q());
  for (std::size_t z = 0; z < cw.size(); ++z) {
    cw[z] = gamma_star[z] + scale * (gamma_star[z] - rep.mean_before[z]);
    // the construction keeps |[.]_c - gamma*|_inf <= psi_min <= gamma*
    if (cw[z] < 0.0) {
      if (cw[z] < -1e-12) throw std::logic_error("project_to_mean: counterweight left the simplex");
      cw[z] = 0.0;
    }
  }
  rep.alpha = alpha;
  rep.counterweight = Simplex(std::move(cw));

  std::vector<Simplex> members = pi.members();
  std::vector<double> weights = pi.weights();
  for (double& w : weights) w *= 1.0 - alpha;
  members.push_back(rep.counterweight);
  weights.push_back(alpha);
  Population out(std::move(members), std::move(weights));
  rep.mean_after = out.mean();
  return {out, rep};
}

}  // namespace fgtk
