#pragma once

#include <vector>

#include "fgtk/fgtk.hpp"

namespace fgtk_test {

// Single-atom k=2 model with table [[a,b],[b,a]] over q=2; the workhorse of
// the small hand-derived examples.
inline fgtk::ModelSpec symmetric_pair_model(double a, double b, double d_max = 8.0) {
  fgtk::WeightDistribution wd;
  wd.atoms.push_back({fgtk::WeightFunction(2, 2, {a, b, b, a}), 1.0});
  double lo = std::min(a, b), hi = std::max(a, b);
  return fgtk::ModelSpec(2, 2, fgtk::default_psi_min(2, lo, hi), std::move(wd),
                         fgtk::Simplex::uniform(2), d_max);
}

// Constant weight psi == c, single atom.
inline fgtk::ModelSpec constant_model(std::size_t q, std::size_t k, double c, double d_max = 8.0) {
  fgtk::WeightDistribution wd;
  wd.atoms.push_back(
      {fgtk::WeightFunction(q, k, std::vector<double>(fgtk::table_size(q, k), c)), 1.0});
  return fgtk::ModelSpec(q, k, fgtk::default_psi_min(q, c, c), std::move(wd),
                         fgtk::Simplex::uniform(q), d_max);
}

// Two constant atoms {c_lo, c_hi}, probability 1/2 each.
inline fgtk::ModelSpec constant_mix_model(std::size_t q, std::size_t k, double c_lo, double c_hi,
                                          double d_max = 8.0) {
  fgtk::WeightDistribution wd;
  wd.atoms.push_back(
      {fgtk::WeightFunction(q, k, std::vector<double>(fgtk::table_size(q, k), c_lo)), 0.5});
  wd.atoms.push_back(
      {fgtk::WeightFunction(q, k, std::vector<double>(fgtk::table_size(q, k), c_hi)), 0.5});
  return fgtk::ModelSpec(q, k, fgtk::default_psi_min(q, c_lo, c_hi), std::move(wd),
                         fgtk::Simplex::uniform(q), d_max);
}

// The standard zoo roster used by the exact-identity and pinning sweeps.
inline std::vector<fgtk::ModelSpec> zoo_roster() {
  std::vector<fgtk::ModelSpec> out;
  out.push_back(fgtk::make_nae_sat(3, 0.5, 8.0));
  out.push_back(fgtk::make_kspin(3, 0.5, {{-1.0, 0.5}, {1.0, 0.5}}, 8.0));
  fgtk::ComposedSbmParams sbm;
  sbm.q = 3;
  sbm.class1 = {0};
  sbm.c_eq1 = 0.5;
  sbm.c_neq1 = 1.0;
  sbm.c_eq2 = 0.5;
  sbm.c_neq2 = 1.0;
  sbm.c_cross = 1.0;
  out.push_back(fgtk::make_composed_sbm(sbm, 8.0));
  out.push_back(fgtk::make_graphical_channel(fgtk::make_bsc_parity_kernel(2, 0.25)));
  return out;
}

inline fgtk::Population random_mean_constrained(const fgtk::ModelSpec& model, std::size_t members,
                                                fgtk::RngStream& rng) {
  std::vector<fgtk::Simplex> mem;
  for (std::size_t i = 0; i < members; ++i)
    mem.push_back(fgtk::Simplex::random(model.q(), rng));
  auto [pop, rep] =
      fgtk::project_to_mean(fgtk::Population(std::move(mem)), model.gamma_star(), model.psi_min());
  (void)rep;
  return pop;
}

}  // namespace fgtk_test
