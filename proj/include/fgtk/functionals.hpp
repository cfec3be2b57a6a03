#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/model.hpp"
#include "fgtk/rng.hpp"
#include "fgtk/simplex.hpp"
#include "fgtk/weights.hpp"

namespace fgtk {

namespace detail {

// sum_tau table(tau) * prod_h gammas[h](tau_h) for a dense [q]^k table.
inline double contract_table(const std::vector<double>& table, std::size_t q, std::size_t k,
                             const std::vector<const Simplex*>& gammas) {
  std::vector<std::size_t> tau(k, 0);
  std::vector<double> prefix(k + 1);  // prefix[h] = prod_{h' < h} gamma_h'(tau_h')
  prefix[0] = 1.0;
  for (std::size_t h = 0; h < k; ++h) prefix[h + 1] = prefix[h] * (*gammas[h])[0];
  KahanSum sum;
  std::size_t idx = 0;
  for (;;) {
    sum.add(table[idx] * prefix[k]);
    // odometer increment, least significant coordinate last
    std::size_t h = k;
    while (h-- > 0) {
      if (++tau[h] < q) break;
      tau[h] = 0;
    }
    ++idx;
    if (idx >= table.size()) break;
    // h is the highest changed coordinate; rebuild prefixes from there
    for (std::size_t h2 = h; h2 < k; ++h2) prefix[h2 + 1] = prefix[h2] * (*gammas[h2])[tau[h2]];
  }
  return sum.value();
}

// message[sigma] = sum_{tau : tau_h = sigma} table(tau) * prod_{h' != h} gammas[h'](tau_h').
inline void factor_message(const std::vector<double>& table, std::size_t q, std::size_t k,
                           std::size_t h, const std::vector<const Simplex*>& gammas,
                           std::vector<double>& message) {
  message.assign(q, 0.0);
  std::vector<std::size_t> tau(k, 0);
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    tau_decode(idx, q, k, tau);
    double w = table[idx];
    for (std::size_t h2 = 0; h2 < k; ++h2)
      if (h2 != h) w *= (*gammas[h2])[tau[h2]];
    message[tau[h]] += w;
  }
}

}  // namespace detail

// Z_F(psi, gamma) = E[psi(sigma)], sigma ~ tensor product of the k marginals.
inline double zf(const WeightFunction& psi, const std::vector<Simplex>& gammas) {
  if (gammas.size() != psi.k) throw std::invalid_argument("zf: need k marginals");
  std::vector<const Simplex*> ptrs;
  for (const auto& g : gammas) {
    if (g.q() != psi.q) throw std::invalid_argument("zf: marginal dimension != q");
    ptrs.push_back(&g);
  }
  return detail::contract_table(psi.table, psi.q, psi.k, ptrs);
}

// Z_FM(psi, h, gamma'): coordinate h drawn from row 1, the others from row 2.
// h is 1-based at this interface.
inline double zfm(const WeightFunction& psi, std::size_t h,
                  const std::vector<Simplex>& gamma_row1, const std::vector<Simplex>& gamma_row2) {
  if (h < 1 || h > psi.k) throw std::invalid_argument("zfm: h out of range");
  if (gamma_row1.size() != psi.k || gamma_row2.size() != psi.k)
    throw std::invalid_argument("zfm: need 2 x k marginals");
  std::vector<const Simplex*> ptrs(psi.k);
  for (std::size_t h2 = 0; h2 < psi.k; ++h2) {
    const Simplex& g = (h2 == h - 1) ? gamma_row1[h2] : gamma_row2[h2];
    if (g.q() != psi.q) throw std::invalid_argument("zfm: marginal dimension != q");
    ptrs[h2] = &g;
  }
  return detail::contract_table(psi.table, psi.q, psi.k, ptrs);
}

// Xi(gamma) = E_psi[Z_F(psi, gamma, ..., gamma)], a degree-k polynomial in gamma.
inline double xi(const ModelSpec& model, const Simplex& gamma) {
  if (gamma.q() != model.q()) throw std::invalid_argument("xi: gamma dimension != q");
  std::vector<const Simplex*> ptrs(model.k(), &gamma);
  return detail::contract_table(model.psi_bar(), model.q(), model.k(), ptrs);
}

// Gradient of Xi at gamma: d/dgamma(z) = sum_h sum_{tau : tau_h = z}
// psi_bar(tau) prod_{h' != h} gamma(tau_h').
inline std::vector<double> xi_gradient(const ModelSpec& model, const Simplex& gamma) {
  std::size_t q = model.q(), k = model.k();
  std::vector<double> grad(q, 0.0);
  std::vector<const Simplex*> ptrs(k, &gamma);
  std::vector<double> msg;
  for (std::size_t h = 0; h < k; ++h) {
    detail::factor_message(model.psi_bar(), q, k, h, ptrs, msg);
    for (std::size_t z = 0; z < q; ++z) grad[z] += msg[z];
  }
  return grad;
}

// Z_V: per-factor messages into a single variable, averaged under gamma_star.
// hs are 1-based. gammas[a] supplies the k marginals of factor a (slot hs[a]
// unused).
inline double zv(const ModelSpec& model, std::size_t d_prime,
                 const std::vector<WeightFunction>& psis, const std::vector<std::size_t>& hs,
                 const std::vector<std::vector<Simplex>>& gammas) {
  if (psis.size() != d_prime || hs.size() != d_prime || gammas.size() != d_prime)
    throw std::invalid_argument("zv: length mismatch");
  if (d_prime == 0) return 1.0;
  std::size_t q = model.q(), k = model.k();
  // log-space product of messages per color, then average under gamma_star
  std::vector<double> log_prod(q, 0.0);
  std::vector<double> msg;
  std::vector<const Simplex*> ptrs(k);
  for (std::size_t a = 0; a < d_prime; ++a) {
    if (hs[a] < 1 || hs[a] > k) throw std::invalid_argument("zv: h out of range");
    if (gammas[a].size() != k) throw std::invalid_argument("zv: need k marginals per factor");
    for (std::size_t h2 = 0; h2 < k; ++h2) ptrs[h2] = &gammas[a][h2];
    detail::factor_message(psis[a].table, q, k, hs[a] - 1, ptrs, msg);
    for (std::size_t z = 0; z < q; ++z) log_prod[z] += std::log(msg[z]);
  }
  LogSumExp lse;
  for (std::size_t z = 0; z < q; ++z)
    if (model.gamma_star()[z] > 0.0) lse.add(std::log(model.gamma_star()[z]) + log_prod[z]);
  return std::exp(lse.value());
}

struct XiSupResult {
  double value = 0.0;
  Simplex maximizer;
};

namespace detail {

// Euclidean projection onto the probability simplex.
inline std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  for (auto& x : v) x = std::max(0.0, x - theta);
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

inline Simplex ascend_from(const ModelSpec& model, Simplex gamma) {
  const double grad_tol = 1e-10;
  double step = 1.0;
  double val = xi(model, gamma);
  for (int it = 0; it < 4000; ++it) {
    std::vector<double> grad = xi_gradient(model, gamma);
    // projected gradient: remove the mean over the active face
    double mean = std::accumulate(grad.begin(), grad.end(), 0.0) / grad.size();
    double pg = 0.0;
    for (std::size_t z = 0; z < grad.size(); ++z) {
      double g = grad[z] - mean;
      if (gamma[z] <= 0.0 && g < 0.0) g = 0.0;  // blocked at the boundary
      pg += g * g;
    }
    if (std::sqrt(pg) < grad_tol) break;
    // step halving until ascent
    bool moved = false;
    for (int half = 0; half < 60; ++half) {
      std::vector<double> cand(gamma.probs());
      for (std::size_t z = 0; z < cand.size(); ++z) cand[z] += step * grad[z];
      Simplex next(project_simplex(std::move(cand)));
      double nv = xi(model, next);
      if (nv > val + 1e-18) {
        gamma = std::move(next);
        val = nv;
        moved = true;
        step *= 1.3;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return gamma;
}

}  // namespace detail

// sup_gamma Xi(gamma) by multi-start projected gradient ascent: vertices,
// barycenter, gamma_star, and random fills up to 32 starts (fixed internal
// seed, so the solver is a deterministic function of the model). Xi is a
// degree-k polynomial on a compact set, possibly non-concave, so all
// candidates are kept and the best is returned. Ties prefer gamma_star when
// it attains the maximum (constant-Xi models have every gamma maximal), then
// the lexicographically smallest maximizer.
inline XiSupResult xi_sup(const ModelSpec& model) {
  std::size_t q = model.q();
  std::vector<Simplex> starts;
  for (std::size_t z = 0; z < q; ++z) starts.push_back(Simplex::point_mass(q, z));
  starts.push_back(Simplex::uniform(q));
  starts.push_back(model.gamma_star());
  RngStream rng(1234, 51);
  while (starts.size() < 32) starts.push_back(Simplex::random(q, rng));

  const double tie_tol = 1e-11;
  double best = -1.0;
  Simplex best_gamma;
  for (const auto& s : starts) {
    Simplex g = detail::ascend_from(model, s);
    double v = xi(model, g);
    bool take = false;
    if (v > best + tie_tol) {
      take = true;
    } else if (v > best - tie_tol &&
               std::lexicographical_compare(g.probs().begin(), g.probs().end(),
                                            best_gamma.probs().begin(), best_gamma.probs().end())) {
      take = true;
    }
    if (take) {
      best = std::max(best, v);
      best_gamma = std::move(g);
    }
  }
  double vstar = xi(model, model.gamma_star());
  if (vstar >= best - 1e-9 * std::max(1.0, std::abs(best))) {
    return XiSupResult{std::max(best, vstar), model.gamma_star()};
  }
  return XiSupResult{best, best_gamma};
}

// Cached value of Xi_sup; the solver is deterministic so caching is safe.
inline double xi_sup_value(const ModelSpec& model) {
  auto cache = model.xi_cache();
  std::lock_guard<std::mutex> lock(cache->m);
  if (!cache->set) {
    cache->value = xi_sup(model).value;
    cache->set = true;
  }
  return cache->value;
}

// BAL check: gamma_star attains the supremum of Xi within tol.
inline bool check_bal(const ModelSpec& model, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("check_bal: tol > 0 required");
  return xi(model, model.gamma_star()) >= xi_sup_value(model) - tol;
}

// phi_a(d) = (d/k) ln Xi_sup.
inline double phi_annealed(const ModelSpec& model, double d) {
  if (d < 0.0 || d > model.d_max()) throw std::invalid_argument("phi_annealed: d outside [0, d_max]");
  if (d == 0.0) return 0.0;
  return d / static_cast<double>(model.k()) * std::log(xi_sup_value(model));
}

}  // namespace fgtk
