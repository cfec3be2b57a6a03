#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "fgtk/functionals.hpp"
#include "fgtk/model.hpp"
#include "fgtk/rng.hpp"

namespace fgtk {

// Wires-weight pairs over n variables; parallel edges and repeated
// coordinates are allowed (multigraph semantics). Weights are referenced by
// atom index into the owning ModelSpec so serialized graphs reproduce
// bit-exactly.
struct Factor {
  std::vector<std::size_t> wires;  // k variable indices, 0-based
  std::size_t atom = 0;
};

struct FactorGraph {
  std::size_t n = 0;
  std::vector<Factor> factors;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n;
    nlohmann::json fs = nlohmann::json::array();
    for (const auto& f : factors) {
      nlohmann::json jf;
      jf["wires"] = f.wires;
      jf["atom"] = f.atom;
      fs.push_back(jf);
    }
    j["factors"] = fs;
    return j;
  }

  static FactorGraph from_json(const nlohmann::json& j) {
    FactorGraph g;
    g.n = j.at("n").get<std::size_t>();
    for (const auto& jf : j.at("factors")) {
      Factor f;
      f.wires = jf.at("wires").get<std::vector<std::size_t>>();
      f.atom = jf.at("atom").get<std::size_t>();
      g.factors.push_back(std::move(f));
    }
    return g;
  }

  void validate(const ModelSpec& model) const {
    for (const auto& f : factors) {
      if (f.wires.size() != model.k()) throw std::invalid_argument("FactorGraph: wire arity != k");
      for (std::size_t v : f.wires)
        if (v >= n) throw std::invalid_argument("FactorGraph: wire out of range");
      if (f.atom >= model.atom_count()) throw std::invalid_argument("FactorGraph: atom out of range");
    }
  }
};

using Assignment = std::vector<std::size_t>;  // colors, 0-based, length n

// Relative color frequencies gamma_sigma.
inline Simplex color_frequencies(const Assignment& sigma, std::size_t q) {
  std::vector<double> counts(q, 0.0);
  for (std::size_t c : sigma) counts.at(c) += 1.0;
  for (double& c : counts) c /= static_cast<double>(sigma.size());
  return Simplex(std::move(counts));
}

// m ~ Po(d n / k): the factor count making the average variable degree d.
inline std::uint64_t sample_m(const ModelSpec& model, double d, std::size_t n, RngStream& rng) {
  if (d < 0.0 || d > model.d_max()) throw std::invalid_argument("sample_m: d outside [0, d_max]");
  return rng.poisson(d * static_cast<double>(n) / static_cast<double>(model.k()));
}

// Null model: m i.i.d. pairs, wires uniform on [n]^k, atom from p.
inline FactorGraph sample_null(const ModelSpec& model, std::size_t n, std::size_t m,
                               RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_null: n >= 1 required");
  FactorGraph g;
  g.n = n;
  std::vector<double> atom_probs;
  for (const auto& a : model.weights().atoms) atom_probs.push_back(a.prob);
  for (std::size_t a = 0; a < m; ++a) {
    Factor f;
    f.wires.resize(model.k());
    for (auto& w : f.wires) w = rng.uniform_index(n);
    f.atom = rng.discrete(atom_probs);
    g.factors.push_back(std::move(f));
  }
  return g;
}

// lambda_gamma(tau) = psi_bar(tau) prod_h gamma(tau_h) / Xi(gamma): the law of
// the assignment to a factor induced by a ground truth with frequencies gamma.
inline std::vector<double> factor_assignment_law(const ModelSpec& model, const Simplex& gamma) {
  if (gamma.q() != model.q()) throw std::invalid_argument("factor_assignment_law: dimension mismatch");
  std::size_t cells = table_size(model.q(), model.k());
  std::vector<double> law(cells);
  std::vector<std::size_t> tau;
  double norm = 0.0;
  for (std::size_t idx = 0; idx < cells; ++idx) {
    tau_decode(idx, model.q(), model.k(), tau);
    double v = model.psi_bar()[idx];
    for (std::size_t c : tau) v *= gamma[c];
    law[idx] = v;
    norm += v;
  }
  for (double& v : law) v /= norm;
  return law;
}

// Teacher-student model for a fixed ground truth: m i.i.d. pairs from the
// tilted law (v, psi) ~ psi(sigma_v) / Xi(gamma_sigma) d(null). Sampled by
// the exact two-stage decomposition: tau ~ lambda_gamma, wires uniform within
// the color classes sigma^{-1}(tau_h), atom tilted by psi(tau) / psi_bar(tau).
// No rejection step.
inline FactorGraph sample_teacher_student(const ModelSpec& model, const Assignment& sigma,
                                          std::size_t m, RngStream& rng) {
  std::size_t n = sigma.size();
  if (n < 1) throw std::invalid_argument("sample_teacher_student: empty ground truth");
  std::size_t q = model.q(), k = model.k();
  Simplex gamma = color_frequencies(sigma, q);
  std::vector<double> law = factor_assignment_law(model, gamma);

  std::vector<std::vector<std::size_t>> classes(q);
  for (std::size_t i = 0; i < n; ++i) classes[sigma[i]].push_back(i);

  // per-cell tilted atom weights p_j psi_j(tau) / psi_bar(tau)
  std::size_t cells = table_size(q, k);
  std::size_t na = model.atom_count();
  std::vector<double> tilt(cells * na);
  for (std::size_t idx = 0; idx < cells; ++idx)
    for (std::size_t j = 0; j < na; ++j)
      tilt[idx * na + j] =
          model.weights().atoms[j].prob * model.weights().atoms[j].psi.table[idx] / model.psi_bar()[idx];

  FactorGraph g;
  g.n = n;
  std::vector<std::size_t> tau;
  std::vector<double> atom_w(na);
  for (std::size_t a = 0; a < m; ++a) {
    std::size_t idx = rng.discrete(law);
    tau_decode(idx, q, k, tau);
    Factor f;
    f.wires.resize(k);
    for (std::size_t h = 0; h < k; ++h) {
      const auto& cls = classes[tau[h]];
      f.wires[h] = cls[rng.uniform_index(cls.size())];
    }
    for (std::size_t j = 0; j < na; ++j) atom_w[j] = tilt[idx * na + j];
    f.atom = rng.discrete(atom_w);
    g.factors.push_back(std::move(f));
  }
  return g;
}

}  // namespace fgtk
