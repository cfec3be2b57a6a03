#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/functionals.hpp"
#include "fgtk/model.hpp"
#include "fgtk/population.hpp"
#include "fgtk/rng.hpp"

namespace fgtk {

struct BetheEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  double d = 0.0;
};

namespace detail {

// One factor message into a variable, marginals drawn from pi.
// Returns log(message[sigma]) accumulated into log_prod.
inline void add_random_message(const ModelSpec& model, const Population& pi, RngStream& rng,
                               std::vector<double>& log_prod, std::vector<double>& msg_scratch) {
  std::size_t q = model.q(), k = model.k();
  std::size_t atom = rng.discrete_by([&](std::size_t j) { return model.weights().atoms[j].prob; },
                                     model.atom_count());
  std::size_t h = static_cast<std::size_t>(rng.uniform_index(k));
  std::vector<const Simplex*> gammas(k, nullptr);
  for (std::size_t h2 = 0; h2 < k; ++h2) gammas[h2] = (h2 == h) ? nullptr : &pi.sample(rng);
  msg_scratch.assign(q, 0.0);
  const auto& table = model.weights().atoms[atom].psi.table;
  std::vector<std::size_t> tau;
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    tau_decode(idx, q, k, tau);
    double w = table[idx];
    for (std::size_t h2 = 0; h2 < k; ++h2)
      if (h2 != h) w *= (*gammas[h2])[tau[h2]];
    msg_scratch[tau[h]] += w;
  }
  for (std::size_t z = 0; z < q; ++z) log_prod[z] += std::log(msg_scratch[z]);
}

}  // namespace detail

// Monte-Carlo estimate of the Bethe functional
//   B_d(pi) = E[Xi_sup^{-D} xlnx(Z_V(D, psi, h, gamma))]
//           - d(k-1)/(k Xi_sup) E[xlnx(Z_F(psi_o, gamma_o))],
// D ~ Po(d) sampled exactly, Z_V in log space, jackknife standard error.
inline BetheEstimate eval_bethe(const ModelSpec& model, double d, const Population& pi,
                                std::size_t samples, RngStream rng, unsigned workers = 0) {
  if (d < 0.0 || d > model.d_max()) throw std::invalid_argument("eval_bethe: d outside [0, d_max]");
  std::size_t q = model.q(), k = model.k();
  double log_xi_sup = std::log(xi_sup_value(model));
  double coef = d * static_cast<double>(k - 1) / (static_cast<double>(k) * xi_sup_value(model));

  std::vector<double> vals(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0xB0, s);
    std::uint64_t dd = r.poisson(d);
    double term1 = 0.0;
    if (dd > 0) {
      std::vector<double> log_prod(q, 0.0);
      std::vector<double> msg;
      for (std::uint64_t a = 0; a < dd; ++a) detail::add_random_message(model, pi, r, log_prod, msg);
      LogSumExp lse;
      for (std::size_t z = 0; z < q; ++z)
        if (model.gamma_star()[z] > 0.0) lse.add(std::log(model.gamma_star()[z]) + log_prod[z]);
      double log_zv = lse.value();
      term1 = std::exp(log_zv - static_cast<double>(dd) * log_xi_sup) * log_zv;
    }
    double term2 = 0.0;
    if (coef != 0.0) {
      std::size_t atom = r.discrete_by(
          [&](std::size_t j) { return model.weights().atoms[j].prob; }, model.atom_count());
      std::vector<Simplex> gammas;
      gammas.reserve(k);
      for (std::size_t h = 0; h < k; ++h) gammas.push_back(pi.sample(r));
      term2 = coef * xlnx(zf(model.weights().atoms[atom].psi, gammas));
    }
    vals[s] = term1 - term2;
  });
  MeanSe ms = mean_and_stderr(vals);
  return BetheEstimate{ms.mean, ms.std_error, samples, d};
}

// MC estimate of nabla_I(pi1, pi2). Common random numbers across the three
// terms, and the uniform h is averaged out analytically (Rao-Blackwell over
// the slot), which cuts the variance and makes the estimate exactly zero
// when both populations are the same point mass.
inline MeanSe eval_nabla_i(const ModelSpec& model, const Population& pi1, const Population& pi2,
                           std::size_t samples, RngStream rng, unsigned workers = 0) {
  std::size_t k = model.k();
  std::vector<double> vals(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0xD1, s);
    std::size_t atom = r.discrete_by(
        [&](std::size_t j) { return model.weights().atoms[j].prob; }, model.atom_count());
    std::vector<Simplex> row1, row2;
    row1.reserve(k);
    row2.reserve(k);
    for (std::size_t h2 = 0; h2 < k; ++h2) row1.push_back(pi1.sample(r));
    for (std::size_t h2 = 0; h2 < k; ++h2) row2.push_back(pi2.sample(r));
    const WeightFunction& psi = model.weights().atoms[atom].psi;
    double x1 = xlnx(zf(psi, row1));
    double x2 = xlnx(zf(psi, row2));
    // x1 + (k-1) x2 - sum_h x3_h, arranged so equal rows cancel exactly
    double v = x1 - xlnx(zfm(psi, 1, row1, row2));
    for (std::size_t h = 2; h <= k; ++h) v += x2 - xlnx(zfm(psi, h, row1, row2));
    vals[s] = v;
  });
  return mean_and_stderr(vals);
}

struct PopDynConfig {
  std::size_t population_size = 10000;
  std::size_t sweeps = 200;
  double damping = 0.0;  // probability of keeping the old member per slot
  std::uint64_t seed = 1;
  std::size_t eval_samples = 100000;  // final-population evaluation
  std::size_t trace_samples = 2000;   // cheap per-sweep trace evaluation
  unsigned workers = 0;
};

struct PopDynResult {
  Population population;
  std::vector<BetheEstimate> trace;  // eval_bethe after each sweep
};

namespace detail {

struct Proposal {
  Simplex gamma;
  double log_tilt = 0.0;  // log(Z_V(D, psi, h, gamma) / Xi_sup^D)
};

inline Proposal propose_member(const ModelSpec& model, const Population& pop, double d,
                               double log_xi_sup, RngStream& rng) {
  std::size_t q = model.q();
  std::uint64_t dd = rng.poisson(d);
  std::vector<double> log_prod(q, 0.0);
  std::vector<double> msg;
  for (std::uint64_t a = 0; a < dd; ++a) add_random_message(model, pop, rng, log_prod, msg);
  std::vector<double> mu(q);
  LogSumExp lse;
  for (std::size_t z = 0; z < q; ++z) {
    if (model.gamma_star()[z] > 0.0) {
      mu[z] = std::log(model.gamma_star()[z]) + log_prod[z];
      lse.add(mu[z]);
    } else {
      mu[z] = -std::numeric_limits<double>::infinity();
    }
  }
  double log_zv = (dd == 0) ? 0.0 : lse.value();
  for (std::size_t z = 0; z < q; ++z)
    mu[z] = (mu[z] == -std::numeric_limits<double>::infinity()) ? 0.0 : std::exp(mu[z] - lse.value());
  Proposal p;
  p.gamma = Simplex(std::move(mu));
  p.log_tilt = log_zv - static_cast<double>(dd) * log_xi_sup;
  return p;
}

}  // namespace detail

// Reweighted population dynamics: propose cavity marginals
// mu(sigma) ~ gamma*(sigma) prod_a msg_a(sigma) with D ~ Po(d) incoming
// factors, then resample proposals with the planted-model tilt
// Z_V(D, psi, h, gamma)/Xi_sup^D using systematic (low-variance) resampling.
// Heuristic maximizer search: the contract is that the reported value is
// eval_bethe of the returned population.
inline PopDynResult population_dynamics(const ModelSpec& model, double d, const PopDynConfig& cfg,
                                        const Population* init = nullptr) {
  if (d < 0.0 || d > model.d_max())
    throw std::invalid_argument("population_dynamics: d outside [0, d_max]");
  std::size_t n_pop = cfg.population_size;
  if (n_pop < 2) throw std::invalid_argument("population_dynamics: population_size >= 2 required");
  double log_xi_sup = std::log(xi_sup_value(model));
  RngStream base(cfg.seed, 0x90);

  Population pop = init ? *init : Population::point_mass(model.gamma_star(), n_pop);
  PopDynResult out{pop, {}};
  std::vector<detail::Proposal> props(n_pop);
  for (std::size_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    parallel_for(n_pop, cfg.workers, [&](std::size_t i) {
      RngStream r = base.substream(sweep, i);
      props[i] = detail::propose_member(model, pop, d, log_xi_sup, r);
    });
    // systematic resampling over the tilt weights
    double max_log = props[0].log_tilt;
    for (const auto& p : props) max_log = std::max(max_log, p.log_tilt);
    std::vector<double> w(n_pop);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n_pop; ++i) {
      w[i] = std::exp(props[i].log_tilt - max_log);
      wsum += w[i];
    }
    RngStream rs = base.substream(0xAE, sweep);
    double u0 = rs.unit();
    std::vector<Simplex> next;
    next.reserve(n_pop);
    double acc = w[0];
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_pop; ++i) {
      double pos = (u0 + static_cast<double>(i)) / static_cast<double>(n_pop) * wsum;
      while (acc < pos && j + 1 < n_pop) acc += w[++j];
      next.push_back(props[j].gamma);
    }
    if (cfg.damping > 0.0) {
      RngStream rd = base.substream(0xDA, sweep);
      for (std::size_t i = 0; i < n_pop; ++i)
        if (rd.unit() < cfg.damping) next[i] = pop.member(i);
    }
    pop = Population(std::move(next));
    std::size_t ns = (sweep + 1 == cfg.sweeps) ? cfg.eval_samples : cfg.trace_samples;
    out.trace.push_back(eval_bethe(model, d, pop, ns, base.substream(0xE7, sweep), cfg.workers));
  }
  out.population = std::move(pop);
  return out;
}

// Lower-bound estimator of B_sup(d): best eval_bethe over population-dynamics
// runs from distinct initializations (point mass at gamma*, vertex-biased,
// uniform-random), each projected to mean gamma* before evaluation. The
// supremum over P^2_* is not certifiably attained; treat the value as a
// lower bound up to MC error.
inline BetheEstimate estimate_b_sup(const ModelSpec& model, double d, std::size_t restarts,
                                    const PopDynConfig& cfg) {
  if (restarts < 1) throw std::invalid_argument("estimate_b_sup: restarts >= 1 required");
  std::size_t q = model.q();
  BetheEstimate best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    PopDynConfig c = cfg;
    c.seed = detail::mix64(detail::mix64(cfg.seed) ^ detail::mix64(0xB500 + r));
    Population init = Population::point_mass(model.gamma_star(), c.population_size);
    if (r >= 1) {
      RngStream ri(c.seed, 0x17);
      std::vector<Simplex> members;
      members.reserve(c.population_size);
      for (std::size_t i = 0; i < c.population_size; ++i) {
        if (r <= q) {
          // biased toward vertex (r-1): most mass on one color
          std::size_t v = (r - 1) % q;
          std::vector<double> m(q);
          Simplex noise = Simplex::random(q, ri);
          for (std::size_t z = 0; z < q; ++z) m[z] = 0.9 * (z == v ? 1.0 : 0.0) + 0.1 * noise[z];
          members.push_back(Simplex(std::move(m)));
        } else {
          members.push_back(Simplex::random(q, ri));
        }
      }
      init = Population(std::move(members));
    }
    PopDynResult run = population_dynamics(model, d, c, &init);
    auto [proj, rep] = project_to_mean(run.population, model.gamma_star(), model.psi_min());
    (void)rep;
    BetheEstimate est =
        eval_bethe(model, d, proj, c.eval_samples, RngStream(c.seed, 0xEB), c.workers);
    if (!have || est.value > best.value) {
      best = est;
      have = true;
    }
  }
  return best;
}

}  // namespace fgtk
