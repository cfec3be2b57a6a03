#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fgtk/bethe.hpp"
#include "fgtk/functionals.hpp"
#include "fgtk/model.hpp"

namespace fgtk {

struct ThresholdConfig {
  PopDynConfig pd;
  std::size_t restarts = 3;
  double bracket_tol = 0.25;  // target width of the d_cond bracket
};

// delta*(d) = B_sup(d) - phi_a(d). Inherits the lower-bound semantics of
// estimate_b_sup: the estimate can undershoot the true Jensen gap, never
// (beyond MC error) overshoot it.
struct LimitEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool lower_bound = true;
};

inline LimitEstimate delta_star(const ModelSpec& model, double d, const ThresholdConfig& cfg) {
  if (d < 0.0 || d > model.d_max()) throw std::invalid_argument("delta_star: d outside [0, d_max]");
  if (d == 0.0) return LimitEstimate{0.0, 0.0, true};
  BetheEstimate b = estimate_b_sup(model, d, cfg.restarts, cfg.pd);
  return LimitEstimate{b.value - phi_annealed(model, d), b.std_error, true};
}

// Alias with a distinct reporting label; same code path, so identical seeds
// give bit-identical results.
inline LimitEstimate relative_entropy_limit(const ModelSpec& model, double d,
                                            const ThresholdConfig& cfg) {
  return delta_star(model, d, cfg);
}

// Limit of (1/n) I(sigma_iid, G_TS): the first term is an exact finite sum
// over atoms x [q]^k under gamma*^k, the second is the B_sup estimate.
inline LimitEstimate mutual_information_limit(const ModelSpec& model, double d,
                                              const ThresholdConfig& cfg) {
  if (d < 0.0 || d > model.d_max())
    throw std::invalid_argument("mutual_information_limit: d outside [0, d_max]");
  if (d == 0.0) return LimitEstimate{0.0, 0.0, true};
  std::size_t q = model.q(), k = model.k();
  KahanSum ex;
  std::vector<std::size_t> tau;
  for (const auto& atom : model.weights().atoms) {
    for (std::size_t idx = 0; idx < atom.psi.table.size(); ++idx) {
      tau_decode(idx, q, k, tau);
      double pr = atom.prob;
      for (std::size_t c : tau) pr *= model.gamma_star()[c];
      ex.add(pr * xlnx(atom.psi.table[idx]));
    }
  }
  double term1 = d / (static_cast<double>(k) * xi_sup_value(model)) * ex.value();
  BetheEstimate b = estimate_b_sup(model, d, cfg.restarts, cfg.pd);
  return LimitEstimate{term1 - b.value, b.std_error, true};
}

// Lipschitz constant of the emitted delta* curve in d:
// |B| contributes (2k-1) ln(psi_max)/k, phi_a contributes |ln Xi_sup|/k.
inline double delta_star_lipschitz(const ModelSpec& model) {
  double k = static_cast<double>(model.k());
  return (2.0 * k - 1.0) * std::log(model.psi_max()) / k +
         std::abs(std::log(xi_sup_value(model))) / k;
}

struct ThresholdPoint {
  double d = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct ThresholdReport {
  std::vector<ThresholdPoint> delta_star_curve;  // sorted by d, includes d = 0
  bool detected = false;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double lipschitz_constant = 0.0;
};

// Bisection on the detector delta*(d) > 3 se over [0, d_max]. B_sup is a
// lower-bound estimate, so only one-sided detection is sound: the result is
// a bracket (or "not detected"), never a point. The initial detection point
// comes from a dyadic scan d_max, d_max/2, ... because the MC error of the
// tilted estimator grows with d and a single probe at d_max can miss a
// threshold the moderate-d probes see clearly. The regimes are intervals,
// so any detected point is a valid upper bracket end.
inline ThresholdReport locate_d_cond(const ModelSpec& model, const ThresholdConfig& cfg) {
  ThresholdReport rep;
  rep.lipschitz_constant = delta_star_lipschitz(model);
  rep.delta_star_curve.push_back({0.0, 0.0, 0.0});

  auto probe = [&](double d) {
    LimitEstimate e = delta_star(model, d, cfg);
    rep.delta_star_curve.push_back({d, e.value, e.std_error});
    return e.value > 3.0 * e.std_error;
  };
  auto finish = [&](bool detected, double lo, double hi) {
    rep.detected = detected;
    rep.bracket_lo = lo;
    rep.bracket_hi = hi;
    std::sort(rep.delta_star_curve.begin(), rep.delta_star_curve.end(),
              [](const ThresholdPoint& a, const ThresholdPoint& b) { return a.d < b.d; });
    return rep;
  };

  double hi = 0.0, lo = 0.0;
  bool found = false;
  for (double d = model.d_max(); d > 0.5 * cfg.bracket_tol; d *= 0.5) {
    if (probe(d)) {
      hi = d;
      found = true;
    } else if (found) {
      lo = d;  // largest undetected point below the detection
      break;
    }
    // an undetected point before any detection is inconclusive (the MC error
    // grows with d); keep scanning downward
  }
  if (!found) return finish(false, 0.0, 0.0);
  while (hi - lo > cfg.bracket_tol) {
    double mid = 0.5 * (lo + hi);
    (probe(mid) ? hi : lo) = mid;
  }
  return finish(true, lo, hi);
}

struct CondensationGapBound {
  double c = 0.0;
  double sup_square_bound = 0.0;  // c sup_{d' <= d} delta*(d')^2
  double quadratic_bound = 0.0;   // solved form of x >= c (delta* + x)^2 at d
};

inline double default_gap_constant(const std::vector<ThresholdPoint>& curve) {
  double sup = 0.0;
  for (const auto& p : curve) sup = std::max(sup, p.value);
  return 1.0 / (4.0 * sup + 1e-6);
}

// Lower bound on phi_a(d) - phi_q_up(d) given a delta* curve up to d and the
// (user-supplied) constant c. The solved quadratic x >= c (delta* + x)^2
// gives x >= delta_t - sqrt(delta_t^2 - delta*^2) with delta_t = 1/(2c) -
// delta*, well-defined exactly when c delta* <= 1/4.
inline CondensationGapBound condensation_gap_bound(const ModelSpec& model, double d,
                                                   const std::vector<ThresholdPoint>& curve,
                                                   double c) {
  (void)model;
  if (!(c > 0.0)) throw std::invalid_argument("condensation_gap_bound: c > 0 required");
  double sup = 0.0;
  double delta_at_d = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& p : curve) {
    if (p.d <= d + 1e-12) sup = std::max(sup, p.value);
    double dist = std::abs(p.d - d);
    if (dist < best_dist) {
      best_dist = dist;
      delta_at_d = p.value;
    }
  }
  if (curve.empty()) throw std::invalid_argument("condensation_gap_bound: empty curve");
  if (c * delta_at_d > 0.25)
    throw std::invalid_argument("condensation_gap_bound: c delta* > 1/4, outside the regime");
  CondensationGapBound out;
  out.c = c;
  out.sup_square_bound = c * sup * sup;
  double dt = 1.0 / (2.0 * c) - delta_at_d;
  out.quadratic_bound = dt - std::sqrt(std::max(0.0, dt * dt - delta_at_d * delta_at_d));
  return out;
}

}  // namespace fgtk
