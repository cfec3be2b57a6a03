#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fgtk/simplex.hpp"

namespace fgtk {

// Row-major index of tau in [q]^k with coordinate 1 most significant.
// Colors are 0-based internally.
inline std::size_t table_size(std::size_t q, std::size_t k) {
  std::size_t s = 1;
  for (std::size_t h = 0; h < k; ++h) s *= q;
  return s;
}

inline std::size_t tau_index(const std::vector<std::size_t>& tau, std::size_t q) {
  std::size_t idx = 0;
  for (std::size_t c : tau) idx = idx * q + c;
  return idx;
}

inline void tau_decode(std::size_t idx, std::size_t q, std::size_t k,
                       std::vector<std::size_t>& tau) {
  tau.resize(k);
  for (std::size_t h = k; h-- > 0;) {
    tau[h] = idx % q;
    idx /= q;
  }
}

// One weight function psi: [q]^k -> (0, inf), dense row-major table.
struct WeightFunction {
  std::size_t q = 0;
  std::size_t k = 0;
  std::vector<double> table;  // size q^k

  WeightFunction() = default;
  WeightFunction(std::size_t q_, std::size_t k_, std::vector<double> t)
      : q(q_), k(k_), table(std::move(t)) {
    if (k < 1) throw std::invalid_argument("WeightFunction: k >= 1 required");
    if (table.size() != table_size(q, k))
      throw std::invalid_argument("WeightFunction: table size != q^k");
    for (double v : table)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("WeightFunction: entries must be positive finite");
  }

  double operator()(const std::vector<std::size_t>& tau) const { return table[tau_index(tau, q)]; }
  double at(std::size_t idx) const { return table[idx]; }
};

struct WeightAtom {
  WeightFunction psi;
  double prob = 0.0;
};

// Finite-support law p over weight functions (all atoms share q, k).
struct WeightDistribution {
  std::vector<WeightAtom> atoms;

  std::size_t q() const { return atoms.at(0).psi.q; }
  std::size_t k() const { return atoms.at(0).psi.k; }

  void validate() const {
    if (atoms.empty()) throw std::invalid_argument("WeightDistribution: no atoms");
    double sum = 0.0;
    for (const auto& a : atoms) {
      if (!(a.prob > 0.0)) throw std::invalid_argument("WeightDistribution: probs must be > 0");
      if (a.psi.q != q() || a.psi.k != k())
        throw std::invalid_argument("WeightDistribution: atoms must share (q, k)");
      sum += a.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("WeightDistribution: probs must sum to 1");
  }

  // psi_bar = E[psi], entrywise.
  std::vector<double> mean_table() const {
    std::vector<double> m(table_size(q(), k()), 0.0);
    for (const auto& a : atoms)
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += a.prob * a.psi.table[i];
    return m;
  }

  double min_entry() const {
    double v = atoms[0].psi.table[0];
    for (const auto& a : atoms)
      for (double x : a.psi.table) v = std::min(v, x);
    return v;
  }
  double max_entry() const {
    double v = atoms[0].psi.table[0];
    for (const auto& a : atoms)
      for (double x : a.psi.table) v = std::max(v, x);
    return v;
  }
};

// Largest admissible psi_min for a table range: entries must lie in
// [psi_min, 1/psi_min] and psi_min must stay strictly below 1/q.
inline double default_psi_min(std::size_t q, double min_entry, double max_entry) {
  double cap = 1.0 / (2.0 * static_cast<double>(q));
  return std::min({min_entry, 1.0 / max_entry, cap});
}

}  // namespace fgtk
