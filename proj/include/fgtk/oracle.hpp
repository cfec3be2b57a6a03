#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/functionals.hpp"
#include "fgtk/graph.hpp"
#include "fgtk/model.hpp"
#include "fgtk/nishimori.hpp"

namespace fgtk {

// Assignment <-> index, variable 1 most significant (same convention as tau).
inline std::size_t sigma_index(const Assignment& sigma, std::size_t q) {
  std::size_t idx = 0;
  for (std::size_t c : sigma) idx = idx * q + c;
  return idx;
}

inline void sigma_decode(std::size_t idx, std::size_t q, std::size_t n, Assignment& sigma) {
  sigma.resize(n);
  for (std::size_t i = n; i-- > 0;) {
    sigma[i] = idx % q;
    idx /= q;
  }
}

// A probability vector over [q]^n.
struct DenseMeasure {
  std::size_t n = 0;
  std::size_t q = 0;
  std::vector<double> probs;  // size q^n, row-major

  double& at(std::size_t idx) { return probs[idx]; }
  double at(std::size_t idx) const { return probs[idx]; }

  void validate() const {
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("DenseMeasure: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw std::invalid_argument("DenseMeasure: not normalized");
  }

  // Marginal over the (possibly repeating) coordinate tuple v.
  std::vector<double> marginal(const std::vector<std::size_t>& v) const {
    std::size_t cells = table_size(q, v.size());
    std::vector<double> marg(cells, 0.0);
    Assignment sigma;
    for (std::size_t idx = 0; idx < probs.size(); ++idx) {
      if (probs[idx] == 0.0) continue;
      sigma_decode(idx, q, n, sigma);
      std::size_t midx = 0;
      for (std::size_t i : v) midx = midx * q + sigma[i];
      marg[midx] += probs[idx];
    }
    return marg;
  }
};

namespace detail {

inline double log_sigma_prior(const ModelSpec& model, const Assignment& sigma) {
  double lp = 0.0;
  for (std::size_t c : sigma) lp += std::log(model.gamma_star()[c]);
  return lp;
}

inline double log_graph_weight(const ModelSpec& model, const FactorGraph& g,
                               const Assignment& sigma) {
  double lw = 0.0;
  std::vector<std::size_t> tau(model.k());
  for (const auto& f : g.factors) {
    for (std::size_t h = 0; h < model.k(); ++h) tau[h] = sigma[f.wires[h]];
    lw += std::log(model.weights().atoms[f.atom].psi.table[tau_index(tau, model.q())]);
  }
  return lw;
}

inline std::size_t pow_zt(std::size_t base, std::size_t e) {
  std::size_t v = 1;
  while (e--) v *= base;
  return v;
}

}  // namespace detail

// log Z = log sum_sigma gamma*^n(sigma) psi_G(sigma); streaming log-sum-exp,
// no q^n allocation.
inline double log_partition_function(const ModelSpec& model, const FactorGraph& graph) {
  std::size_t q = model.q(), n = graph.n;
  double states = std::pow(static_cast<double>(q), static_cast<double>(n));
  if (states > 1e8) throw resource_limit_error("partition_function: q^n exceeds 1e8 guard");
  std::size_t total = detail::pow_zt(q, n);
  LogSumExp lse;
  Assignment sigma(n, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    sigma_decode(idx, q, n, sigma);
    lse.add(detail::log_sigma_prior(model, sigma) + detail::log_graph_weight(model, graph, sigma));
  }
  return lse.value();
}

inline double partition_function(const ModelSpec& model, const FactorGraph& graph) {
  return std::exp(log_partition_function(model, graph));
}

// phi(G) = (1/n) ln Z.
inline double free_entropy(const ModelSpec& model, const FactorGraph& graph) {
  return log_partition_function(model, graph) / static_cast<double>(graph.n);
}

inline DenseMeasure gibbs_measure(const ModelSpec& model, const FactorGraph& graph) {
  std::size_t q = model.q(), n = graph.n;
  double logz = log_partition_function(model, graph);
  DenseMeasure mu;
  mu.n = n;
  mu.q = q;
  mu.probs.resize(detail::pow_zt(q, n));
  Assignment sigma(n, 0);
  for (std::size_t idx = 0; idx < mu.probs.size(); ++idx) {
    sigma_decode(idx, q, n, sigma);
    mu.probs[idx] = std::exp(detail::log_sigma_prior(model, sigma) +
                             detail::log_graph_weight(model, graph, sigma) - logz);
  }
  return mu;
}

// Enumerates the support of the null model at (n, m): every (wires, atom)^m
// cell with its log probability. Order is fixed (factor-major; within a
// factor wires-major, atom-minor) so all oracle outputs are reproducible.
class GraphSpace {
 public:
  GraphSpace(const ModelSpec& model, std::size_t n, std::size_t m)
      : model_(&model), n_(n), m_(m) {
    wire_cells_ = detail::pow_zt(n, model.k());
    per_factor_ = wire_cells_ * model.atom_count();
    double total = std::pow(static_cast<double>(per_factor_), static_cast<double>(m));
    if (total > 1e7) throw resource_limit_error("GraphSpace: (n^k A)^m exceeds 1e7 guard");
    total_ = detail::pow_zt(per_factor_, m);
  }

  std::size_t size() const { return total_; }

  FactorGraph decode(std::size_t gidx) const {
    FactorGraph g;
    g.n = n_;
    g.factors.resize(m_);
    for (std::size_t a = m_; a-- > 0;) {
      std::size_t code = gidx % per_factor_;
      gidx /= per_factor_;
      g.factors[a].atom = code % model_->atom_count();
      std::size_t wcode = code / model_->atom_count();
      g.factors[a].wires.resize(model_->k());
      for (std::size_t h = model_->k(); h-- > 0;) {
        g.factors[a].wires[h] = wcode % n_;
        wcode /= n_;
      }
    }
    return g;
  }

  double log_null_prob(const FactorGraph& g) const {
    double lp = 0.0;
    for (const auto& f : g.factors)
      lp += std::log(model_->weights().atoms[f.atom].prob) -
            static_cast<double>(model_->k()) * std::log(static_cast<double>(n_));
    return lp;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t gidx = 0; gidx < total_; ++gidx) {
      FactorGraph g = decode(gidx);
      fn(gidx, g, log_null_prob(g));
    }
  }

 private:
  const ModelSpec* model_;
  std::size_t n_, m_;
  std::size_t wire_cells_ = 0, per_factor_ = 0, total_ = 0;
};

// log P(G_TS(sigma) = G) = sum_a [ln p(atom_a) + ln psi_a(sigma_{v_a})
//                                  - k ln n - ln Xi(gamma_sigma)]  (Obs. of
// the i.i.d. factorization of the teacher-student pairs).
inline double log_ts_prob(const ModelSpec& model, const Assignment& sigma, const FactorGraph& g,
                          double log_null, double log_xi_gamma) {
  return log_null + detail::log_graph_weight(model, g, sigma) -
         static_cast<double>(g.factors.size()) * log_xi_gamma;
}

// Exact joint law of (sigma_iid, G_TS(sigma_iid)) over assignments x graph
// cells.
struct ExactJointLaw {
  std::size_t n = 0, q = 0;
  std::size_t n_sigma = 0, n_cells = 0;
  std::vector<double> p;  // n_sigma x n_cells, row-major
  std::vector<double> sigma_marginal;
  std::vector<double> graph_marginal;

  double at(std::size_t s, std::size_t g) const { return p[s * n_cells + g]; }
};

inline ExactJointLaw exact_joint_law(const ModelSpec& model, std::size_t n, std::size_t m) {
  GraphSpace space(model, n, m);
  std::size_t n_sigma = detail::pow_zt(model.q(), n);
  if (static_cast<double>(n_sigma) * static_cast<double>(space.size()) > 1e7)
    throw resource_limit_error("exact_joint_law: q^n (n^k A)^m exceeds 1e7 guard");

  ExactJointLaw law;
  law.n = n;
  law.q = model.q();
  law.n_sigma = n_sigma;
  law.n_cells = space.size();
  law.p.assign(n_sigma * space.size(), 0.0);
  law.sigma_marginal.assign(n_sigma, 0.0);
  law.graph_marginal.assign(space.size(), 0.0);

  Assignment sigma(n, 0);
  for (std::size_t s = 0; s < n_sigma; ++s) {
    sigma_decode(s, model.q(), n, sigma);
    double lprior = detail::log_sigma_prior(model, sigma);
    double lxi = std::log(xi(model, color_frequencies(sigma, model.q())));
    space.for_each([&](std::size_t g, const FactorGraph& graph, double log_null) {
      double v = std::exp(lprior + log_ts_prob(model, sigma, graph, log_null, lxi));
      law.p[s * law.n_cells + g] = v;
      law.sigma_marginal[s] += v;
      law.graph_marginal[g] += v;
    });
  }
  return law;
}

// I(sigma_iid; G_TS(sigma_iid)) / n, from the exact joint law.
inline double exact_mutual_information(const ModelSpec& model, std::size_t n, std::size_t m) {
  ExactJointLaw law = exact_joint_law(model, n, m);
  KahanSum mi;
  for (std::size_t s = 0; s < law.n_sigma; ++s)
    for (std::size_t g = 0; g < law.n_cells; ++g) {
      double v = law.at(s, g);
      if (v > 0.0) mi.add(v * std::log(v / (law.sigma_marginal[s] * law.graph_marginal[g])));
    }
  return mi.value() / static_cast<double>(n);
}

struct MiDecomposition {
  double h_gamma_star = 0.0;  // entropy of gamma*
  double eta_bar = 0.0;       // conditional cross entropy / n
  double delta_bar = 0.0;     // conditional relative entropy / n
  double combined() const { return h_gamma_star - eta_bar + delta_bar; }
};

// iota(m) = H(gamma*) - eta_bar(m) + delta_bar(m): the three terms computed
// independently (the Gibbs measures come from the per-graph partition
// function, not from the joint table).
inline MiDecomposition mi_decomposition(const ModelSpec& model, std::size_t n, std::size_t m) {
  ExactJointLaw law = exact_joint_law(model, n, m);
  GraphSpace space(model, n, m);
  MiDecomposition out;
  out.h_gamma_star = model.gamma_star().entropy();
  KahanSum eta, delta;
  space.for_each([&](std::size_t g, const FactorGraph& graph, double) {
    if (law.graph_marginal[g] <= 0.0) return;
    DenseMeasure gibbs = gibbs_measure(model, graph);
    for (std::size_t s = 0; s < law.n_sigma; ++s) {
      double post = law.at(s, g);
      if (post <= 0.0) continue;
      eta.add(-post * std::log(gibbs.probs[s]));
      delta.add(post * std::log(post / (law.graph_marginal[g] * gibbs.probs[s])));
    }
  });
  out.eta_bar = eta.value() / static_cast<double>(n);
  out.delta_bar = delta.value() / static_cast<double>(n);
  return out;
}

// delta(m) = D(sigma_iid, G_TS(sigma_iid) || sigma_Gibbs, G_null) / n.
inline double exact_relative_entropy(const ModelSpec& model, std::size_t n, std::size_t m) {
  ExactJointLaw law = exact_joint_law(model, n, m);
  GraphSpace space(model, n, m);
  KahanSum kl;
  space.for_each([&](std::size_t g, const FactorGraph& graph, double log_null) {
    DenseMeasure gibbs = gibbs_measure(model, graph);
    for (std::size_t s = 0; s < law.n_sigma; ++s) {
      double pts = law.at(s, g);
      if (pts <= 0.0) continue;
      double lq = log_null + std::log(gibbs.probs[s]);
      kl.add(pts * (std::log(pts) - lq));
    }
  });
  return kl.value() / static_cast<double>(n);
}

// The three independent pieces of the finite-size identity
// delta(m) = phi*(m) - phi(m) + delta'(m).
struct RelEntropyIdentity {
  double delta = 0.0;        // exact relative entropy / n
  double phi_star = 0.0;     // E[phi(G_TS(sigma_iid))]
  double phi_annealed = 0.0; // (1/n) ln E[Z(G_null)]
  double delta_prime = 0.0;  // D(sigma_iid || sigma_hat) / n
  double residual() const { return delta - (phi_star - phi_annealed + delta_prime); }
};

inline RelEntropyIdentity relative_entropy_identity(const ModelSpec& model, std::size_t n,
                                                    std::size_t m) {
  RelEntropyIdentity out;
  out.delta = exact_relative_entropy(model, n, m);

  ExactJointLaw law = exact_joint_law(model, n, m);
  GraphSpace space(model, n, m);
  KahanSum phi_star;
  space.for_each([&](std::size_t g, const FactorGraph& graph, double) {
    if (law.graph_marginal[g] > 0.0)
      phi_star.add(law.graph_marginal[g] * free_entropy(model, graph));
  });
  out.phi_star = phi_star.value();

  out.phi_annealed = log_annealed_partition(model, n, m) / static_cast<double>(n);

  // delta' = (1/n) sum_sigma gamma*(sigma) ln(gamma*(sigma) / P[sigma_hat = sigma])
  //        = (1/n) [ln E[Xi(gamma_iid)^m] - m E[ln Xi(gamma_iid)]]
  std::size_t n_sigma = detail::pow_zt(model.q(), n);
  Assignment sigma(n, 0);
  KahanSum mean_log_xi;
  for (std::size_t s = 0; s < n_sigma; ++s) {
    sigma_decode(s, model.q(), n, sigma);
    double prior = std::exp(detail::log_sigma_prior(model, sigma));
    mean_log_xi.add(prior * std::log(xi(model, color_frequencies(sigma, model.q()))));
  }
  out.delta_prime = (log_annealed_partition(model, n, m) -
                     static_cast<double>(m) * mean_log_xi.value()) /
                    static_cast<double>(n);
  return out;
}

// TV between the exact joint law of (sigma_hat, G_TS(sigma_hat)) and the
// Nishimori pairing (Gibbs spin of the realized graph, same graph).
inline double verify_nishimori(const ModelSpec& model, std::size_t n, std::size_t m) {
  GraphSpace space(model, n, m);
  std::size_t n_sigma = detail::pow_zt(model.q(), n);
  if (static_cast<double>(n_sigma) * static_cast<double>(space.size()) > 1e7)
    throw resource_limit_error("verify_nishimori: guard exceeded");

  NishimoriWeights nw = nishimori_weights(model, n, m);

  std::vector<double> p1(n_sigma * space.size(), 0.0);
  std::vector<double> graph_marg(space.size(), 0.0);
  Assignment sigma(n, 0);
  for (std::size_t s = 0; s < n_sigma; ++s) {
    sigma_decode(s, model.q(), n, sigma);
    double lprior = detail::log_sigma_prior(model, sigma);
    double lxi = std::log(xi(model, color_frequencies(sigma, model.q())));
    // P[sigma_hat = sigma] = gamma*(sigma) Xi(gamma_sigma)^m / E[Xi^m]
    double lnis = lprior + static_cast<double>(m) * lxi - nw.log_norm;
    space.for_each([&](std::size_t g, const FactorGraph& graph, double log_null) {
      double v = std::exp(lnis + log_ts_prob(model, sigma, graph, log_null, lxi));
      p1[s * space.size() + g] = v;
      graph_marg[g] += v;
    });
  }
  double tv = 0.0;
  space.for_each([&](std::size_t g, const FactorGraph& graph, double) {
    if (graph_marg[g] <= 0.0) return;
    DenseMeasure gibbs = gibbs_measure(model, graph);
    for (std::size_t s = 0; s < n_sigma; ++s)
      tv += std::abs(p1[s * space.size() + g] - graph_marg[g] * gibbs.probs[s]);
  });
  return 0.5 * tv;
}

// Exact finite-size orderings through the Nishimori ground truth:
//   E[phi(G_TS(sigma_hat))] = phi_a + D(G_TS(sigma_hat) || G) / n
//   E[phi(G)]               = phi_a - D(G || G_TS(sigma_hat)) / n
// with phi_a = (1/n) ln E[Z(G)] and the (G_TS(sigma_hat), G)-derivative
// Z(G)/E[Z].
struct JensenOrdering {
  double phi_planted = 0.0;   // E[phi(G_TS(sigma_hat))]
  double phi_annealed = 0.0;  // (1/n) ln E[Z]
  double phi_null = 0.0;      // E[phi(G)]
  double d_planted_null = 0.0;
  double d_null_planted = 0.0;
  double residual_upper() const { return phi_planted - (phi_annealed + d_planted_null); }
  double residual_lower() const { return phi_null - (phi_annealed - d_null_planted); }
};

inline JensenOrdering jensen_ordering(const ModelSpec& model, std::size_t n, std::size_t m) {
  GraphSpace space(model, n, m);
  // two-pass: first log E[Z], then the tilted expectations
  LogSumExp lz;
  space.for_each([&](std::size_t, const FactorGraph& graph, double log_null) {
    lz.add(log_null + log_partition_function(model, graph));
  });
  double log_ez = lz.value();

  JensenOrdering out;
  out.phi_annealed = log_ez / static_cast<double>(n);
  KahanSum planted, null, d_pn, d_np;
  space.for_each([&](std::size_t, const FactorGraph& graph, double log_null) {
    double logz = log_partition_function(model, graph);
    double pn = std::exp(log_null);
    double tilt = std::exp(log_null + logz - log_ez);  // P[G_TS(sigma_hat) = G]
    null.add(pn * logz / static_cast<double>(n));
    planted.add(tilt * logz / static_cast<double>(n));
    d_pn.add(tilt * (logz - log_ez));
    d_np.add(pn * (log_ez - logz));
  });
  out.phi_null = null.value();
  out.phi_planted = planted.value();
  out.d_planted_null = d_pn.value() / static_cast<double>(n);
  out.d_null_planted = d_np.value() / static_cast<double>(n);
  return out;
}

// max over sigma of the relative error of E[psi_G(sigma)] = Xi(gamma_sigma)^m
// (the expectation is over the null model, external fields cancel).
inline double expected_weight_identity_residual(const ModelSpec& model, std::size_t n,
                                                std::size_t m) {
  GraphSpace space(model, n, m);
  std::size_t n_sigma = detail::pow_zt(model.q(), n);
  Assignment sigma(n, 0);
  double worst = 0.0;
  for (std::size_t s = 0; s < n_sigma; ++s) {
    sigma_decode(s, model.q(), n, sigma);
    KahanSum ew;
    space.for_each([&](std::size_t, const FactorGraph& graph, double log_null) {
      ew.add(std::exp(log_null + detail::log_graph_weight(model, graph, sigma)));
    });
    double expect = std::pow(xi(model, color_frequencies(sigma, model.q())),
                             static_cast<double>(m));
    worst = std::max(worst, std::abs(ew.value() - expect) / expect);
  }
  return worst;
}

}  // namespace fgtk
