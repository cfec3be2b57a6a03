#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fgtk/functionals.hpp"
#include "fgtk/model.hpp"

namespace fgtk {

// ---------------------------------------------------------------------------
// Validity witnesses: weights of the form psi(sigma) = a (1 - b Delta(sigma))
// with coordinate-factorized Delta. Two admissible structures:
//   MinusOne: Delta = prod_h f_h(sigma_h); components pair up under b -> -b
//             (odd conditional b-moments vanish by the pairing).
//   PlusOne:  Delta = sum_i prod_h f_{h,i}(sigma_h) with f >= 0 and b >= 0.
// A model whose atoms are reconstructed by an accepted witness has
// nabla_I >= 0 on mean-constrained marginal distributions.
// ---------------------------------------------------------------------------

enum class WitnessKind { MinusOne, PlusOne };

struct WitnessComponent {
  double a = 1.0;
  double b = 0.0;
  // factors[h][i]: vector over [q]; MinusOne requires exactly one i per h,
  // PlusOne requires the same count of summands i for every h.
  std::vector<std::vector<std::vector<double>>> factors;

  // Delta(tau) for 0-based tau.
  double delta(const std::vector<std::size_t>& tau) const {
    std::size_t terms = factors.at(0).size();
    double sum = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
      double prod = 1.0;
      for (std::size_t h = 0; h < tau.size(); ++h) prod *= factors[h][i][tau[h]];
      sum += prod;
    }
    return sum;
  }
};

struct ValidityWitness {
  WitnessKind kind = WitnessKind::PlusOne;
  std::vector<WitnessComponent> components;
  std::vector<double> mixture_probs;  // aligned with components and model atoms
};

namespace detail {

inline bool component_matches(const WitnessComponent& x, const WitnessComponent& y, double tol) {
  if (x.factors.size() != y.factors.size()) return false;
  if (std::abs(x.a - y.a) > tol) return false;
  for (std::size_t h = 0; h < x.factors.size(); ++h) {
    if (x.factors[h].size() != y.factors[h].size()) return false;
    for (std::size_t i = 0; i < x.factors[h].size(); ++i) {
      if (x.factors[h][i].size() != y.factors[h][i].size()) return false;
      for (std::size_t z = 0; z < x.factors[h][i].size(); ++z)
        if (std::abs(x.factors[h][i][z] - y.factors[h][i][z]) > tol) return false;
    }
  }
  return true;
}

}  // namespace detail

// True iff the witness reconstructs the model's atoms (componentwise, within
// 1e-10) and satisfies the structural conditions of its kind. Reconstruction
// failure is a false return, dimension mismatch an error.
inline bool check_validity(const ModelSpec& model, const ValidityWitness& witness) {
  const double recon_tol = 1e-10;
  std::size_t q = model.q(), k = model.k();
  if (witness.components.size() != witness.mixture_probs.size())
    throw std::invalid_argument("check_validity: components/mixture_probs length mismatch");
  for (const auto& c : witness.components) {
    if (c.factors.size() != k) throw std::invalid_argument("check_validity: need k factor families");
    for (const auto& fam : c.factors) {
      if (fam.empty()) throw std::invalid_argument("check_validity: empty factor family");
      for (const auto& f : fam)
        if (f.size() != q) throw std::invalid_argument("check_validity: factor vector dimension != q");
    }
  }

  double prob_sum = 0.0;
  for (double p : witness.mixture_probs) {
    if (!(p > 0.0)) return false;
    prob_sum += p;
  }
  if (std::abs(prob_sum - 1.0) > 1e-12) return false;

  // structural conditions per kind
  for (const auto& c : witness.components) {
    if (!(c.a > 0.0)) return false;
    std::size_t terms = c.factors[0].size();
    for (const auto& fam : c.factors)
      if (fam.size() != terms) return false;  // Delta must be a sum of full products
    if (witness.kind == WitnessKind::MinusOne) {
      if (terms != 1) return false;  // Delta factorizes over coordinates
    } else {
      if (c.b < 0.0) return false;  // structural stand-in for E[b^l | a] >= 0
      for (const auto& fam : c.factors)
        for (const auto& f : fam)
          for (double v : f)
            if (v < 0.0) return false;
    }
  }

  // |b Delta| < 1 everywhere, checked by enumeration
  std::vector<std::size_t> tau;
  for (const auto& c : witness.components) {
    for (std::size_t idx = 0; idx < table_size(q, k); ++idx) {
      tau_decode(idx, q, k, tau);
      if (!(std::abs(c.b * c.delta(tau)) < 1.0)) return false;
    }
  }

  // MinusOne: components pair up under b -> -b with equal a, factors, prob
  if (witness.kind == WitnessKind::MinusOne) {
    std::vector<bool> used(witness.components.size(), false);
    for (std::size_t i = 0; i < witness.components.size(); ++i) {
      if (used[i]) continue;
      const auto& ci = witness.components[i];
      if (std::abs(ci.b) <= 1e-14) {
        used[i] = true;  // b = 0 is self-paired
        continue;
      }
      bool paired = false;
      for (std::size_t j = i + 1; j < witness.components.size(); ++j) {
        if (used[j]) continue;
        const auto& cj = witness.components[j];
        if (std::abs(cj.b + ci.b) <= 1e-12 &&
            std::abs(witness.mixture_probs[i] - witness.mixture_probs[j]) <= 1e-12 &&
            detail::component_matches(ci, cj, 1e-12)) {
          used[i] = used[j] = true;
          paired = true;
          break;
        }
      }
      if (!paired) return false;
    }
  }

  // reconstruction: component j must rebuild atom j, with matching probability
  if (witness.components.size() != model.atom_count()) return false;
  for (std::size_t j = 0; j < witness.components.size(); ++j) {
    const auto& c = witness.components[j];
    const auto& atom = model.weights().atoms[j];
    if (std::abs(witness.mixture_probs[j] - atom.prob) > recon_tol) return false;
    for (std::size_t idx = 0; idx < table_size(q, k); ++idx) {
      tau_decode(idx, q, k, tau);
      double rebuilt = c.a * (1.0 - c.b * c.delta(tau));
      if (std::abs(rebuilt - atom.psi.table[idx]) > recon_tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// NAE-SAT with soft constraints: q = 2 over {0,1}, psi_{x*}(x) = eps on
// {x*, complement(x*)} and 1 elsewhere. Complement classes coincide as
// tables, so p is uniform over the 2^{k-1} classes.
// ---------------------------------------------------------------------------
inline ModelSpec make_nae_sat(std::size_t k, double eps, double d_max = 16.0) {
  if (k < 2) throw std::invalid_argument("make_nae_sat: k >= 2 required");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("make_nae_sat: eps in (0,1) required");
  std::size_t q = 2;
  std::size_t cells = table_size(q, k);
  WeightDistribution wd;
  std::vector<std::size_t> tau;
  for (std::size_t xstar = 0; xstar < cells / 2; ++xstar) {
    // representatives with leading bit 0; complement is cells - 1 - xstar
    std::vector<double> t(cells, 1.0);
    t[xstar] = eps;
    t[cells - 1 - xstar] = eps;
    wd.atoms.push_back({WeightFunction(q, k, std::move(t)), 2.0 / static_cast<double>(cells)});
  }
  double psi_min = default_psi_min(q, std::min(eps, 1.0), 1.0);
  return ModelSpec(q, k, psi_min, std::move(wd), Simplex::uniform(q), d_max);
}

// PlusOne witness for NAE-SAT: a = 1, b = 1 - eps, Delta = indicator of
// {x*, complement}, written as a 2-term sum of coordinate indicators.
inline ValidityWitness make_nae_sat_witness(std::size_t k, double eps) {
  std::size_t q = 2;
  std::size_t cells = table_size(q, k);
  ValidityWitness w;
  w.kind = WitnessKind::PlusOne;
  std::vector<std::size_t> xs;
  for (std::size_t xstar = 0; xstar < cells / 2; ++xstar) {
    tau_decode(xstar, q, k, xs);
    WitnessComponent c;
    c.a = 1.0;
    c.b = 1.0 - eps;
    c.factors.resize(k);
    for (std::size_t h = 0; h < k; ++h) {
      std::vector<double> f1(q, 0.0), f2(q, 0.0);
      f1[xs[h]] = 1.0;
      f2[1 - xs[h]] = 1.0;
      c.factors[h] = {f1, f2};
    }
    w.components.push_back(std::move(c));
    w.mixture_probs.push_back(2.0 / static_cast<double>(cells));
  }
  return w;
}

// ---------------------------------------------------------------------------
// k-spin: q = 2 over spins, colors {1,2} <-> {-1,+1} (0-based {0,1}).
// Raw weights exp(-beta J prod_h s_h) are normalized by E[cosh(beta J)] so
// that E[psi] = 1 entrywise; the decomposition a(J) = cosh(beta J)/E[cosh],
// b(J) = tanh(beta J) is preserved. The J-support must be sign-symmetric.
// ---------------------------------------------------------------------------
struct JAtom {
  double value = 0.0;
  double prob = 0.0;
};

inline void require_symmetric_support(const std::vector<JAtom>& j_atoms) {
  double sum = 0.0;
  for (const auto& a : j_atoms) {
    if (!(a.prob > 0.0)) throw std::invalid_argument("make_kspin: J probs must be > 0");
    sum += a.prob;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("make_kspin: J probs must sum to 1");
  for (const auto& a : j_atoms) {
    bool found = false;
    for (const auto& b : j_atoms)
      if (std::abs(b.value + a.value) <= 1e-12 && std::abs(b.prob - a.prob) <= 1e-12) {
        found = true;
        break;
      }
    if (!found) throw std::invalid_argument("make_kspin: J-support must be symmetric (J =d= -J)");
  }
}

inline ModelSpec make_kspin(std::size_t k, double beta, const std::vector<JAtom>& j_atoms,
                            double d_max = 16.0) {
  if (k < 1) throw std::invalid_argument("make_kspin: k >= 1 required");
  if (!(beta >= 0.0)) throw std::invalid_argument("make_kspin: beta >= 0 required");
  require_symmetric_support(j_atoms);
  std::size_t q = 2;
  std::size_t cells = table_size(q, k);
  double mean_cosh = 0.0;
  for (const auto& a : j_atoms) mean_cosh += a.prob * std::cosh(beta * a.value);
  WeightDistribution wd;
  std::vector<std::size_t> tau;
  double lo = 1.0, hi = 1.0;
  for (const auto& a : j_atoms) {
    std::vector<double> t(cells);
    for (std::size_t idx = 0; idx < cells; ++idx) {
      tau_decode(idx, q, k, tau);
      double spin_prod = 1.0;
      for (std::size_t c : tau) spin_prod *= (c == 0 ? -1.0 : 1.0);
      t[idx] = std::exp(-beta * a.value * spin_prod) / mean_cosh;
      lo = std::min(lo, t[idx]);
      hi = std::max(hi, t[idx]);
    }
    wd.atoms.push_back({WeightFunction(q, k, std::move(t)), a.prob});
  }
  double psi_min = default_psi_min(q, lo, hi);
  return ModelSpec(q, k, psi_min, std::move(wd), Simplex::uniform(q), d_max);
}

inline ValidityWitness make_kspin_witness(std::size_t k, double beta,
                                          const std::vector<JAtom>& j_atoms) {
  double mean_cosh = 0.0;
  for (const auto& a : j_atoms) mean_cosh += a.prob * std::cosh(beta * a.value);
  ValidityWitness w;
  w.kind = WitnessKind::MinusOne;
  std::vector<double> spin(2);
  spin[0] = -1.0;
  spin[1] = 1.0;
  for (const auto& a : j_atoms) {
    WitnessComponent c;
    c.a = std::cosh(beta * a.value) / mean_cosh;
    c.b = std::tanh(beta * a.value);
    c.factors.assign(k, {spin});
    w.components.push_back(std::move(c));
    w.mixture_probs.push_back(a.prob);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Composed stochastic block model: k = 2 over two community types. Mixing is
// always preferred: c_eq_i <= c_neq_i <= c_cross. gamma_star is set to the
// closed-form maximizer (uniform within types, type-1 mass b2/(b1+b2)).
// ---------------------------------------------------------------------------
struct ComposedSbmParams {
  std::size_t q = 0;
  std::vector<std::size_t> class1;  // 0-based colors; class2 = complement
  double c_eq1 = 1.0, c_neq1 = 1.0, c_eq2 = 1.0, c_neq2 = 1.0, c_cross = 1.0;
};

inline ModelSpec make_composed_sbm(const ComposedSbmParams& p, double d_max = 16.0) {
  if (p.q < 2) throw std::invalid_argument("make_composed_sbm: q >= 2 required");
  if (p.class1.empty() || p.class1.size() >= p.q)
    throw std::invalid_argument("make_composed_sbm: nontrivial partition required");
  if (!(p.c_eq1 > 0 && p.c_eq2 > 0))
    throw std::invalid_argument("make_composed_sbm: weights must be positive");
  if (p.c_eq1 > p.c_neq1 || p.c_eq2 > p.c_neq2 || p.c_neq1 > p.c_cross || p.c_neq2 > p.c_cross)
    throw std::invalid_argument("make_composed_sbm: need c_eq_i <= c_neq_i <= c_cross");

  std::vector<bool> in1(p.q, false);
  for (std::size_t z : p.class1) in1.at(z) = true;
  std::size_t q1 = p.class1.size(), q2 = p.q - q1;

  std::size_t cells = table_size(p.q, 2);
  std::vector<double> t(cells);
  for (std::size_t z1 = 0; z1 < p.q; ++z1)
    for (std::size_t z2 = 0; z2 < p.q; ++z2) {
      double v;
      if (in1[z1] != in1[z2])
        v = p.c_cross;
      else if (in1[z1])
        v = (z1 == z2) ? p.c_eq1 : p.c_neq1;
      else
        v = (z1 == z2) ? p.c_eq2 : p.c_neq2;
      t[z1 * p.q + z2] = v;
    }
  WeightDistribution wd;
  double lo = *std::min_element(t.begin(), t.end());
  double hi = *std::max_element(t.begin(), t.end());
  wd.atoms.push_back({WeightFunction(p.q, 2, std::move(t)), 1.0});

  // closed-form maximizer of Xi
  double b1 = (p.c_cross - p.c_neq1) + (p.c_neq1 - p.c_eq1) / static_cast<double>(q1);
  double b2 = (p.c_cross - p.c_neq2) + (p.c_neq2 - p.c_eq2) / static_cast<double>(q2);
  double x = (b1 + b2 > 0.0) ? b2 / (b1 + b2) : static_cast<double>(q1) / static_cast<double>(p.q);
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("make_composed_sbm: degenerate maximizer puts zero mass on a type");
  std::vector<double> gs(p.q);
  for (std::size_t z = 0; z < p.q; ++z)
    gs[z] = in1[z] ? x / static_cast<double>(q1) : (1.0 - x) / static_cast<double>(q2);
  Simplex gamma_star(std::move(gs));

  double psi_min = default_psi_min(p.q, lo, hi);
  double gs_min = *std::min_element(gamma_star.probs().begin(), gamma_star.probs().end());
  psi_min = std::min(psi_min, 0.5 * gs_min);
  return ModelSpec(p.q, 2, psi_min, std::move(wd), std::move(gamma_star), d_max);
}

// PlusOne witness with a = c_cross, b = 1 and factors scaled by
// sqrt(a_{i,s}/c_cross); one summand per (type, equal-color) coefficient.
inline ValidityWitness make_composed_sbm_witness(const ComposedSbmParams& p) {
  std::vector<bool> in1(p.q, false);
  for (std::size_t z : p.class1) in1.at(z) = true;

  ValidityWitness w;
  w.kind = WitnessKind::PlusOne;
  WitnessComponent c;
  c.a = p.c_cross;
  c.b = 1.0;
  c.factors.resize(2);
  auto push_term = [&](double coeff, const std::vector<double>& f) {
    if (coeff <= 0.0) return;
    std::vector<double> scaled(f);
    double s = std::sqrt(coeff / p.c_cross);
    for (double& v : scaled) v *= s;
    c.factors[0].push_back(scaled);
    c.factors[1].push_back(scaled);
  };
  for (int type = 0; type < 2; ++type) {
    bool is1 = (type == 0);
    double a0 = p.c_cross - (is1 ? p.c_neq1 : p.c_neq2);
    double as = (is1 ? p.c_neq1 - p.c_eq1 : p.c_neq2 - p.c_eq2);
    std::vector<double> ind(p.q, 0.0);
    for (std::size_t z = 0; z < p.q; ++z)
      if (in1[z] == is1) ind[z] = 1.0;
    push_term(a0, ind);
    for (std::size_t z = 0; z < p.q; ++z)
      if (in1[z] == is1) {
        std::vector<double> e(p.q, 0.0);
        e[z] = 1.0;
        push_term(as, e);
      }
  }
  if (c.factors[0].empty()) {
    // psi == c_cross: Delta vanishes
    c.b = 0.0;
    c.factors[0].push_back(std::vector<double>(p.q, 0.0));
    c.factors[1].push_back(std::vector<double>(p.q, 0.0));
  }
  w.components.push_back(std::move(c));
  w.mixture_probs.push_back(1.0);
  return w;
}

// ---------------------------------------------------------------------------
// Graphical channels: atoms psi_z(y) = nu_y(z) / p*(z), one per output value,
// with probability p*(z). E[psi] = 1 entrywise for any fully supported p*.
// ---------------------------------------------------------------------------
struct ChannelKernel {
  std::size_t q = 0;
  std::size_t k = 0;
  std::size_t q_out = 0;
  std::vector<double> nu;  // [q]^k x [q_out], row-major over tau then z
  Simplex p_star;          // over [q_out]

  double nu_at(std::size_t tau_idx, std::size_t z) const { return nu[tau_idx * q_out + z]; }

  void validate() const {
    if (q < 1 || k < 1 || q_out < 1) throw std::invalid_argument("ChannelKernel: bad dimensions");
    if (nu.size() != table_size(q, k) * q_out)
      throw std::invalid_argument("ChannelKernel: nu must have q^k rows of q_out entries");
    if (p_star.q() != q_out) throw std::invalid_argument("ChannelKernel: p_star dimension != q_out");
    for (std::size_t z = 0; z < q_out; ++z)
      if (!(p_star[z] > 0.0)) throw std::invalid_argument("ChannelKernel: p_star must be fully supported");
    for (std::size_t r = 0; r < table_size(q, k); ++r) {
      double sum = 0.0;
      for (std::size_t z = 0; z < q_out; ++z) {
        if (!(nu_at(r, z) > 0.0))
          throw std::invalid_argument("ChannelKernel: nu must be fully supported");
        sum += nu_at(r, z);
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ChannelKernel: nu rows must sum to 1");
    }
  }
};

inline ModelSpec make_graphical_channel(const ChannelKernel& kernel,
                                        std::optional<Simplex> gamma_star = std::nullopt,
                                        double d_max = 16.0) {
  kernel.validate();
  std::size_t cells = table_size(kernel.q, kernel.k);
  WeightDistribution wd;
  double lo = 1.0, hi = 1.0;
  for (std::size_t z = 0; z < kernel.q_out; ++z) {
    std::vector<double> t(cells);
    for (std::size_t r = 0; r < cells; ++r) {
      t[r] = kernel.nu_at(r, z) / kernel.p_star[z];
      lo = std::min(lo, t[r]);
      hi = std::max(hi, t[r]);
    }
    wd.atoms.push_back({WeightFunction(kernel.q, kernel.k, std::move(t)), kernel.p_star[z]});
  }
  // equal tables would merge output symbols into one indistinguishable atom
  for (std::size_t i = 0; i < wd.atoms.size(); ++i)
    for (std::size_t j = i + 1; j < wd.atoms.size(); ++j) {
      double diff = 0.0;
      for (std::size_t r = 0; r < cells; ++r)
        diff = std::max(diff, std::abs(wd.atoms[i].psi.table[r] - wd.atoms[j].psi.table[r]));
      if (diff <= 1e-14)
        throw std::invalid_argument(
            "make_graphical_channel: duplicate atom tables; perturb p_star to separate them");
    }
  Simplex gs = gamma_star ? *gamma_star : Simplex::uniform(kernel.q);
  double psi_min = default_psi_min(kernel.q, lo, hi);
  double gs_min = *std::min_element(gs.probs().begin(), gs.probs().end());
  if (gs_min <= 0.0) throw std::invalid_argument("make_graphical_channel: gamma_star must be fully supported");
  psi_min = std::min(psi_min, 0.5 * gs_min);
  return ModelSpec(kernel.q, kernel.k, psi_min, std::move(wd), std::move(gs), d_max);
}

// Parity-of-inputs binary symmetric channel: nu_y(parity(y)) = 1 - eta.
// The LDGM construction from the examples; p* defaults to (1/2, 1/2).
inline ChannelKernel make_bsc_parity_kernel(std::size_t k, double eta,
                                            std::optional<Simplex> p_star = std::nullopt) {
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("make_bsc_parity_kernel: eta in (0, 1/2)");
  ChannelKernel kern;
  kern.q = 2;
  kern.k = k;
  kern.q_out = 2;
  kern.p_star = p_star ? *p_star : Simplex::uniform(2);
  std::size_t cells = table_size(2, k);
  kern.nu.resize(cells * 2);
  std::vector<std::size_t> tau;
  for (std::size_t r = 0; r < cells; ++r) {
    tau_decode(r, 2, k, tau);
    std::size_t parity = 0;
    for (std::size_t c : tau) parity ^= c;
    kern.nu[r * 2 + parity] = 1.0 - eta;
    kern.nu[r * 2 + (1 - parity)] = eta;
  }
  return kern;
}

}  // namespace fgtk
