#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/functionals.hpp"
#include "fgtk/graph.hpp"
#include "fgtk/model.hpp"
#include "fgtk/rng.hpp"

namespace fgtk {

// The Nishimori ground truth reweights sigma_iid by Xi(gamma_sigma)^m, and
// the tilt depends on sigma only through its color frequencies. Enumerating
// the composition classes of n into q parts therefore gives the law exactly;
// everything is kept in log space since Xi^m underflows for large m.

struct NishimoriClass {
  std::vector<std::size_t> counts;  // composition of n into q parts
  double log_weight = 0.0;          // unnormalized: log multinomial class prob + m log Xi
  double log_multinomial = 0.0;     // log of the multinomial coefficient
};

struct NishimoriWeights {
  std::vector<NishimoriClass> classes;
  double log_norm = 0.0;  // log sum of exp(log_weight) = log E[Xi(gamma_iid)^m]
};

namespace detail {

inline std::size_t composition_count(std::size_t n, std::size_t q) {
  // C(n + q - 1, q - 1), saturating
  double v = 1.0;
  for (std::size_t i = 1; i < q; ++i) v *= static_cast<double>(n + i) / static_cast<double>(i);
  return v > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(v + 0.5);
}

template <typename Fn>
void compositions_rec(std::size_t z, std::size_t left, std::size_t q,
                      std::vector<std::size_t>& counts, Fn&& fn) {
  if (z + 1 == q) {
    counts[z] = left;
    fn(const_cast<const std::vector<std::size_t>&>(counts));
    return;
  }
  for (std::size_t c = 0; c <= left; ++c) {
    counts[z] = c;
    compositions_rec(z + 1, left - c, q, counts, fn);
  }
}

// Lexicographic enumeration of the compositions of n into q parts.
template <typename Fn>
void for_each_composition(std::size_t n, std::size_t q, Fn&& fn) {
  std::vector<std::size_t> counts(q, 0);
  compositions_rec(0, n, q, counts, fn);
}

}  // namespace detail

// Class weights of the Nishimori ground truth at (n, m): for each composition
// Gamma, log multinomial(n; Gamma) + sum_z Gamma_z ln gamma*(z) + m ln Xi(Gamma/n).
inline NishimoriWeights nishimori_weights(const ModelSpec& model, std::size_t n, std::size_t m) {
  std::size_t q = model.q();
  if (detail::composition_count(n, q) > 10000000ULL)
    throw resource_limit_error("nishimori_weights: composition count exceeds 1e7 guard");
  NishimoriWeights out;
  LogSumExp lse;
  std::vector<double> freq(q);
  detail::for_each_composition(n, q, [&](const std::vector<std::size_t>& counts) {
    NishimoriClass cls;
    cls.counts = counts;
    double lmult = std::lgamma(static_cast<double>(n) + 1.0);
    double lprob = 0.0;
    for (std::size_t z = 0; z < q; ++z) {
      lmult -= std::lgamma(static_cast<double>(counts[z]) + 1.0);
      if (counts[z] > 0) {
        if (model.gamma_star()[z] <= 0.0) {
          lprob = -std::numeric_limits<double>::infinity();
          break;
        }
        lprob += static_cast<double>(counts[z]) * std::log(model.gamma_star()[z]);
      }
      freq[z] = static_cast<double>(counts[z]) / static_cast<double>(n);
    }
    cls.log_multinomial = lmult;
    if (std::isfinite(lprob)) {
      double lxi = (m > 0) ? static_cast<double>(m) * std::log(xi(model, Simplex(freq))) : 0.0;
      cls.log_weight = lmult + lprob + lxi;
    } else {
      cls.log_weight = -std::numeric_limits<double>::infinity();
    }
    lse.add(cls.log_weight);
    out.classes.push_back(std::move(cls));
  });
  out.log_norm = lse.value();
  return out;
}

// log E[Xi(gamma_iid)^m] = log E[Z_{gamma*}(G_null,m)] - the exact annealed
// normalizer, shared with the free-entropy orderings.
inline double log_annealed_partition(const ModelSpec& model, std::size_t n, std::size_t m) {
  return nishimori_weights(model, n, m).log_norm;
}

// Draws sigma_hat: pick a composition class by its normalized weight, then a
// uniformly random ordering of the class multiset (the conditional law of
// sigma_iid given its frequencies is uniform on the class).
inline Assignment sample_nishimori(const ModelSpec& model, std::size_t n, std::size_t m,
                                   RngStream& rng, const NishimoriWeights* precomputed = nullptr) {
  NishimoriWeights local;
  const NishimoriWeights& w = precomputed ? *precomputed : (local = nishimori_weights(model, n, m));
  std::vector<double> probs(w.classes.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = std::exp(w.classes[i].log_weight - w.log_norm);
  std::size_t cls = rng.discrete(probs);
  Assignment sigma;
  sigma.reserve(n);
  for (std::size_t z = 0; z < model.q(); ++z)
    sigma.insert(sigma.end(), w.classes[cls].counts[z], z);
  // Fisher-Yates: uniform over the distinct orderings of the multiset
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.uniform_index(i);
    std::swap(sigma[i - 1], sigma[j]);
  }
  return sigma;
}

}  // namespace fgtk
