#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/nishimori.hpp"
#include "fgtk/oracle.hpp"
#include "fgtk/rng.hpp"

namespace fgtk {

// Conditioning on sigma_U = sigma_check_U. Idempotent; a zero-probability
// event is an error.
inline DenseMeasure pin_measure(const DenseMeasure& mu, const std::vector<std::size_t>& pin_set,
                                const Assignment& sigma_check) {
  if (pin_set.empty()) return mu;
  DenseMeasure out = mu;
  Assignment sigma;
  double norm = 0.0;
  for (std::size_t idx = 0; idx < out.probs.size(); ++idx) {
    sigma_decode(idx, mu.q, mu.n, sigma);
    bool keep = true;
    for (std::size_t i : pin_set) {
      if (i >= mu.n) throw std::invalid_argument("pin_measure: pinned variable out of range");
      if (sigma[i] != sigma_check.at(i)) {
        keep = false;
        break;
      }
    }
    if (!keep) out.probs[idx] = 0.0;
    norm += out.probs[idx];
  }
  if (norm <= 0.0) throw std::invalid_argument("pin_measure: conditioning event has probability 0");
  for (double& p : out.probs) p /= norm;
  return out;
}

namespace detail {

// Entropies of all joint marginals over subsets of size <= max_size, indexed
// by bitmask. One pass over the q^n support per subset.
inline std::vector<double> subset_entropies(const DenseMeasure& mu, std::size_t max_size) {
  if (mu.n > 20) throw resource_limit_error("subset_entropies: n > 20");
  std::vector<double> ent(std::size_t{1} << mu.n, 0.0);
  std::vector<std::size_t> members;
  std::vector<double> marg;
  Assignment sigma;
  for (std::size_t mask = 1; mask < ent.size(); ++mask) {
    std::size_t sz = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (sz > max_size) continue;
    members.clear();
    for (std::size_t i = 0; i < mu.n; ++i)
      if (mask & (std::size_t{1} << i)) members.push_back(i);
    marg.assign(table_size(mu.q, sz), 0.0);
    for (std::size_t idx = 0; idx < mu.probs.size(); ++idx) {
      if (mu.probs[idx] == 0.0) continue;
      sigma_decode(idx, mu.q, mu.n, sigma);
      std::size_t midx = 0;
      for (std::size_t i : members) midx = midx * mu.q + sigma[i];
      marg[midx] += mu.probs[idx];
    }
    double h = 0.0;
    for (double p : marg)
      if (p > 0.0) h -= p * std::log(p);
    ent[mask] = h;
  }
  return ent;
}

template <typename Fn>
void for_each_tuple(std::size_t n, std::size_t ell, Fn&& fn) {
  std::vector<std::size_t> v(ell, 0);
  for (;;) {
    fn(const_cast<const std::vector<std::size_t>&>(v));
    std::size_t h = ell;
    while (h-- > 0) {
      if (++v[h] < n) break;
      v[h] = 0;
    }
    bool done = true;
    for (std::size_t x : v)
      if (x != 0) {
        done = false;
        break;
      }
    if (done) return;
  }
}

}  // namespace detail

// iota_ell(mu) = E_v[ D(mu|_v || tensor_h mu|_{v_h}) ], v uniform on [n]^ell
// (repeated coordinates included). Uses the entropy identity
// iota_o(v) = sum_h H(mu|_{v_h}) - H(mu|_{distinct support of v}), so one
// subset-entropy table serves all n^ell tuples. Exact when n^ell <= 1e6,
// Monte Carlo with a standard error beyond that.
inline MeanSe iota_ell(const DenseMeasure& mu, std::size_t ell, RngStream* rng = nullptr,
                       std::size_t mc_tuples = 100000) {
  if (ell <= 1) return MeanSe{0.0, 0.0};
  double tuples = std::pow(static_cast<double>(mu.n), static_cast<double>(ell));
  std::vector<double> ent = detail::subset_entropies(mu, ell);
  auto iota_of = [&](const std::vector<std::size_t>& v) {
    double s = 0.0;
    std::size_t mask = 0;
    for (std::size_t i : v) {
      s += ent[std::size_t{1} << i];
      mask |= std::size_t{1} << i;
    }
    return s - ent[mask];
  };
  if (tuples <= 1e6) {
    KahanSum sum;
    detail::for_each_tuple(mu.n, ell, [&](const std::vector<std::size_t>& v) { sum.add(iota_of(v)); });
    return MeanSe{sum.value() / tuples, 0.0};
  }
  if (!rng) throw std::invalid_argument("iota_ell: n^ell > 1e6 requires an RNG for MC");
  std::vector<double> vals(mc_tuples);
  std::vector<std::size_t> v(ell);
  for (std::size_t s = 0; s < mc_tuples; ++s) {
    for (auto& x : v) x = rng->uniform_index(mu.n);
    vals[s] = iota_of(v);
  }
  return mean_and_stderr(vals);
}

// nu_ell(mu) = E_v[ TV(mu|_v, tensor_h mu|_{v_h}) ]; needs the actual tuple
// marginals, assembled from cached subset marginals.
inline MeanSe nu_ell(const DenseMeasure& mu, std::size_t ell, RngStream* rng = nullptr,
                     std::size_t mc_tuples = 100000) {
  if (ell <= 1) return MeanSe{0.0, 0.0};
  if (mu.n > 20) throw resource_limit_error("nu_ell: n > 20");
  // subset marginals for |S| <= ell
  std::vector<std::vector<double>> marg(std::size_t{1} << mu.n);
  std::vector<std::vector<std::size_t>> members(std::size_t{1} << mu.n);
  for (std::size_t mask = 1; mask < marg.size(); ++mask) {
    std::size_t sz = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (sz > ell) continue;
    std::vector<std::size_t> mem;
    for (std::size_t i = 0; i < mu.n; ++i)
      if (mask & (std::size_t{1} << i)) mem.push_back(i);
    members[mask] = mem;
    marg[mask] = mu.marginal(mem);
  }
  auto nu_of = [&](const std::vector<std::size_t>& v) {
    std::size_t mask = 0;
    for (std::size_t i : v) mask |= std::size_t{1} << i;
    const auto& base = marg[mask];
    const auto& mem = members[mask];
    // position of each tuple coordinate inside the sorted member list
    std::vector<std::size_t> pos(v.size());
    for (std::size_t h = 0; h < v.size(); ++h)
      for (std::size_t j = 0; j < mem.size(); ++j)
        if (mem[j] == v[h]) pos[h] = j;
    double tv = 0.0;
    std::size_t cells = table_size(mu.q, v.size());
    std::vector<std::size_t> tau;
    std::vector<std::size_t> sub(mem.size());
    for (std::size_t idx = 0; idx < cells; ++idx) {
      tau_decode(idx, mu.q, v.size(), tau);
      // joint value: consistent duplicates read from the subset marginal
      bool consistent = true;
      std::vector<bool> seen(mem.size(), false);
      for (std::size_t h = 0; h < v.size(); ++h) {
        if (seen[pos[h]] && sub[pos[h]] != tau[h]) {
          consistent = false;
          break;
        }
        sub[pos[h]] = tau[h];
        seen[pos[h]] = true;
      }
      double joint = 0.0;
      if (consistent) {
        std::size_t midx = 0;
        for (std::size_t j = 0; j < mem.size(); ++j) midx = midx * mu.q + sub[j];
        joint = base[midx];
      }
      double prod = 1.0;
      for (std::size_t h = 0; h < v.size(); ++h)
        prod *= marg[std::size_t{1} << v[h]][tau[h]];
      tv += std::abs(joint - prod);
    }
    return 0.5 * tv;
  };
  double tuples = std::pow(static_cast<double>(mu.n), static_cast<double>(ell));
  if (tuples <= 1e6) {
    KahanSum sum;
    detail::for_each_tuple(mu.n, ell, [&](const std::vector<std::size_t>& v) { sum.add(nu_of(v)); });
    return MeanSe{sum.value() / tuples, 0.0};
  }
  if (!rng) throw std::invalid_argument("nu_ell: n^ell > 1e6 requires an RNG for MC");
  std::vector<double> vals(mc_tuples);
  std::vector<std::size_t> v(ell);
  for (std::size_t s = 0; s < mc_tuples; ++s) {
    for (auto& x : v) x = rng->uniform_index(mu.n);
    vals[s] = nu_of(v);
  }
  return mean_and_stderr(vals);
}

// Pinning lemma check: theta ~ Unif[0, Theta], i.i.d. Bernoulli(theta/n)
// membership, pin values from sigma ~ mu drawn independently of the set.
// The estimate of E[iota_ell(pinned mu)] must stay below
// binom(ell,2) ln(q)/Theta (+3 se).
struct PinningLemmaReport {
  double lhs = 0.0;
  double std_error = 0.0;
  double rhs = 0.0;
  bool pass() const { return lhs <= rhs + 3.0 * std_error; }
};

namespace detail {

// P[pin set = U] depends only on |U|:
//   (n/Theta) int_0^{Theta/n} x^s (1 - x)^{n-s} dx,
// expanded binomially into an exact finite sum (n <= 12 here).
inline double pin_set_probability(std::size_t n, std::size_t s, double theta_cap) {
  double t = theta_cap / static_cast<double>(n);
  double sum = 0.0;
  double binom = 1.0;
  for (std::size_t j = 0; j <= n - s; ++j) {
    double e = static_cast<double>(s + j + 1);
    double term = binom * std::pow(t, e) / e;
    sum += (j % 2 == 0) ? term : -term;
    binom *= static_cast<double>(n - s - j) / static_cast<double>(j + 1);
  }
  return sum * static_cast<double>(n) / theta_cap;
}

inline std::size_t mu_cdf_draw(const std::vector<double>& cdf, RngStream& r) {
  double u = r.unit() * cdf.back();
  std::size_t idx =
      static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  return std::min(idx, cdf.size() - 1);
}

}  // namespace detail

inline PinningLemmaReport verify_pinning_lemma(const DenseMeasure& mu, std::size_t ell,
                                               double theta_cap, std::size_t samples,
                                               RngStream rng, unsigned workers = 0) {
  if (!(theta_cap > 0.0) || theta_cap > static_cast<double>(mu.n))
    throw std::invalid_argument("verify_pinning_lemma: Theta in (0, n] required");
  std::vector<double> cdf(mu.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += mu.probs[i];
    cdf[i] = acc;
  }
  PinningLemmaReport rep;
  double pairs = 0.5 * static_cast<double>(ell) * static_cast<double>(ell - 1);
  rep.rhs = pairs * std::log(static_cast<double>(mu.q)) / theta_cap;

  if (mu.n <= 12) {
    // exact enumeration of pin subsets, MC only over the pin values
    std::size_t n_sets = std::size_t{1} << mu.n;
    std::vector<double> w(mu.n + 1);
    for (std::size_t s = 0; s <= mu.n; ++s) w[s] = detail::pin_set_probability(mu.n, s, theta_cap);
    std::vector<double> means(n_sets, 0.0), varsum(n_sets, 0.0);
    std::vector<std::size_t> draws(n_sets, 0);
    parallel_for(n_sets, workers, [&](std::size_t mask) {
      std::size_t size = static_cast<std::size_t>(__builtin_popcountll(mask));
      std::vector<std::size_t> pin_set;
      for (std::size_t i = 0; i < mu.n; ++i)
        if (mask & (std::size_t{1} << i)) pin_set.push_back(i);
      std::size_t reps =
          (mask == 0) ? 1
                      : std::max<std::size_t>(
                            1, static_cast<std::size_t>(
                                   std::llround(static_cast<double>(samples) * w[size])));
      RngStream r = rng.substream(0x72, mask);
      Assignment sigma_check;
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t s = 0; s < reps; ++s) {
        sigma_decode(detail::mu_cdf_draw(cdf, r), mu.q, mu.n, sigma_check);
        double v = iota_ell(pin_measure(mu, pin_set, sigma_check), ell).mean;
        m1 += v;
        m2 += v * v;
      }
      means[mask] = m1 / static_cast<double>(reps);
      draws[mask] = reps;
      if (reps > 1)
        varsum[mask] = (m2 - m1 * m1 / static_cast<double>(reps)) / static_cast<double>(reps - 1);
    });
    double lhs = 0.0, var = 0.0;
    for (std::size_t mask = 0; mask < n_sets; ++mask) {
      std::size_t size = static_cast<std::size_t>(__builtin_popcountll(mask));
      lhs += w[size] * means[mask];
      var += w[size] * w[size] * varsum[mask] / static_cast<double>(draws[mask]);
    }
    rep.lhs = lhs;
    rep.std_error = std::sqrt(std::max(0.0, var));
    return rep;
  }

  // plain MC over (theta, U, sigma) for larger n
  std::vector<double> vals(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0x71, s);
    double theta = theta_cap * r.unit();
    std::vector<std::size_t> pin_set;
    for (std::size_t i = 0; i < mu.n; ++i)
      if (r.unit() < theta / static_cast<double>(mu.n)) pin_set.push_back(i);
    Assignment sigma_check;
    sigma_decode(detail::mu_cdf_draw(cdf, r), mu.q, mu.n, sigma_check);
    vals[s] = iota_ell(pin_measure(mu, pin_set, sigma_check), ell).mean;
  });
  MeanSe ms = mean_and_stderr(vals);
  rep.lhs = ms.mean;
  rep.std_error = ms.std_error;
  return rep;
}

// Pinned Nishimori coincidence: pinning G_TS(sigma_hat) at the ground-truth
// values equals (in law, jointly with the graph and pin set) pinning at
// values drawn from the realized Gibbs measure. Exact enumeration over all
// pin sets; returns the largest TV over realizable sets (Theta == 0 leaves
// only the empty set).
inline double verify_pinned_nishimori(const ModelSpec& model, std::size_t n, std::size_t m,
                                      double theta_cap) {
  GraphSpace space(model, n, m);
  std::size_t n_sigma = detail::pow_zt(model.q(), n);
  if (static_cast<double>(n_sigma) * static_cast<double>(space.size()) > 1e7)
    throw resource_limit_error("verify_pinned_nishimori: guard exceeded");
  if (n > 16) throw resource_limit_error("verify_pinned_nishimori: n > 16");

  NishimoriWeights nw = nishimori_weights(model, n, m);
  // joint law P(sigma, G) of (sigma_hat, G_TS(sigma_hat))
  std::vector<double> joint(n_sigma * space.size(), 0.0);
  Assignment sigma(n, 0);
  for (std::size_t s = 0; s < n_sigma; ++s) {
    sigma_decode(s, model.q(), n, sigma);
    double lxi = std::log(xi(model, color_frequencies(sigma, model.q())));
    double lnis = detail::log_sigma_prior(model, sigma) + static_cast<double>(m) * lxi - nw.log_norm;
    space.for_each([&](std::size_t g, const FactorGraph& graph, double log_null) {
      joint[s * space.size() + g] = std::exp(lnis + log_ts_prob(model, sigma, graph, log_null, lxi));
    });
  }

  std::size_t max_mask = (theta_cap > 0.0) ? (std::size_t{1} << n) : 1;
  double worst = 0.0;
  Assignment sv(n, 0);
  for (std::size_t mask = 0; mask < max_mask; ++mask) {
    std::vector<std::size_t> pins;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) pins.push_back(i);
    // distributions over (pin values, graph); pin values keyed by the value
    // tuple on the pinned coordinates
    std::size_t vcells = table_size(model.q(), pins.size());
    std::vector<double> a(vcells * space.size(), 0.0), b(vcells * space.size(), 0.0);
    std::vector<double> graph_marg(space.size(), 0.0);
    for (std::size_t s = 0; s < n_sigma; ++s) {
      sigma_decode(s, model.q(), n, sv);
      std::size_t vidx = 0;
      for (std::size_t i : pins) vidx = vidx * model.q() + sv[i];
      for (std::size_t g = 0; g < space.size(); ++g) {
        a[vidx * space.size() + g] += joint[s * space.size() + g];
        graph_marg[g] += joint[s * space.size() + g];
      }
    }
    space.for_each([&](std::size_t g, const FactorGraph& graph, double) {
      if (graph_marg[g] <= 0.0) return;
      DenseMeasure gibbs = gibbs_measure(model, graph);
      for (std::size_t s = 0; s < n_sigma; ++s) {
        sigma_decode(s, model.q(), n, sv);
        std::size_t vidx = 0;
        for (std::size_t i : pins) vidx = vidx * model.q() + sv[i];
        b[vidx * space.size() + g] += graph_marg[g] * gibbs.probs[s];
      }
    });
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace fgtk
