#include <catch2/catch_amalgamated.hpp>

#include "fgtk/fgtk.hpp"
#include "test_util.hpp"

using namespace fgtk;

TEST_CASE("nae-sat construction") {
  auto m = make_nae_sat(3, 0.5);
  REQUIRE(m.q() == 2);
  REQUIRE(m.atom_count() == 4);  // 2^k / 2 complement classes
  for (const auto& a : m.weights().atoms) REQUIRE(std::abs(a.prob - 0.25) < 1e-15);
  RngStream rng(1, 0);
  for (int t = 0; t < 10; ++t)
    REQUIRE(std::abs(xi(m, Simplex::random(2, rng)) - 0.875) < 1e-12);

  // eps -> 1 degenerates to the constant model
  auto flat = make_nae_sat(2, 1.0 - 1e-9);
  for (const auto& a : flat.weights().atoms)
    for (double v : a.psi.table) REQUIRE(std::abs(v - 1.0) <= 1e-9);

  REQUIRE_THROWS_AS(make_nae_sat(3, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_nae_sat(3, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(make_nae_sat(1, 0.5), std::invalid_argument);
}

TEST_CASE("nae-sat witness accepted") {
  auto m = make_nae_sat(3, 0.5);
  REQUIRE(check_validity(m, make_nae_sat_witness(3, 0.5)));
}

TEST_CASE("k-spin construction") {
  std::vector<JAtom> js{{-1.0, 0.5}, {1.0, 0.5}};
  auto m = make_kspin(2, 0.3, js);
  REQUIRE(m.q() == 2);
  RngStream rng(2, 0);
  for (int t = 0; t < 10; ++t)
    REQUIRE(std::abs(xi(m, Simplex::random(2, rng)) - 1.0) < 1e-12);

  // table is exp(-beta J prod s) normalized, and matches the cosh/tanh split
  double mean_cosh = std::cosh(0.3);
  std::vector<std::size_t> tau;
  for (std::size_t j = 0; j < 2; ++j) {
    double J = js[j].value;
    const auto& t = m.weights().atoms[j].psi.table;
    for (std::size_t idx = 0; idx < 4; ++idx) {
      tau_decode(idx, 2, 2, tau);
      double prod = (tau[0] == 0 ? -1.0 : 1.0) * (tau[1] == 0 ? -1.0 : 1.0);
      REQUIRE(std::abs(t[idx] * mean_cosh - std::exp(-0.3 * J * prod)) < 1e-14);
      double a = std::cosh(0.3 * J) / mean_cosh;
      double b = std::tanh(0.3 * J);
      REQUIRE(std::abs(t[idx] - a * (1.0 - b * prod)) < 1e-14);
    }
  }

  // beta = 0 gives the flat model
  auto flat = make_kspin(3, 0.0, js);
  for (const auto& a : flat.weights().atoms)
    for (double v : a.psi.table) REQUIRE(v == 1.0);

  REQUIRE_THROWS_AS(make_kspin(2, 0.3, {{1.0, 1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_kspin(2, 0.3, {{-1.0, 0.3}, {1.0, 0.7}}), std::invalid_argument);
}

TEST_CASE("k-spin witness accepted") {
  std::vector<JAtom> js{{-1.0, 0.5}, {1.0, 0.5}};
  auto m = make_kspin(3, 0.5, js);
  REQUIRE(check_validity(m, make_kspin_witness(3, 0.5, js)));
}

TEST_CASE("composed SBM construction") {
  // four colors, symmetric types: maximizer splits evenly
  ComposedSbmParams p4;
  p4.q = 4;
  p4.class1 = {0, 1};
  p4.c_eq1 = 1.0;
  p4.c_neq1 = 2.0;
  p4.c_eq2 = 1.0;
  p4.c_neq2 = 2.0;
  p4.c_cross = 2.0;
  auto m4 = make_composed_sbm(p4);
  for (std::size_t z = 0; z < 4; ++z) REQUIRE(std::abs(m4.gamma_star()[z] - 0.25) < 1e-12);

  // asymmetric case against the closed form
  ComposedSbmParams p3;
  p3.q = 3;
  p3.class1 = {0};
  p3.c_eq1 = 0.5;
  p3.c_neq1 = 1.0;
  p3.c_eq2 = 0.5;
  p3.c_neq2 = 1.0;
  p3.c_cross = 1.0;
  auto m3 = make_composed_sbm(p3);
  REQUIRE(std::abs(m3.gamma_star()[0] - 1.0 / 3.0) < 1e-12);
  REQUIRE(check_bal(m3, 1e-9));

  // degenerate psi == c_cross: any gamma maximizes
  ComposedSbmParams pf;
  pf.q = 3;
  pf.class1 = {0};
  pf.c_eq1 = 2.0;
  pf.c_neq1 = 2.0;
  pf.c_eq2 = 2.0;
  pf.c_neq2 = 2.0;
  pf.c_cross = 2.0;
  auto mf = make_composed_sbm(pf);
  REQUIRE(std::abs(xi_sup(mf).value - 2.0) < 1e-12);

  ComposedSbmParams bad = p3;
  bad.c_eq1 = 2.0;  // violates c_eq1 <= c_neq1
  REQUIRE_THROWS_AS(make_composed_sbm(bad), std::invalid_argument);
}

TEST_CASE("composed SBM witness accepted") {
  ComposedSbmParams p;
  p.q = 3;
  p.class1 = {0};
  p.c_eq1 = 0.5;
  p.c_neq1 = 1.0;
  p.c_eq2 = 0.5;
  p.c_neq2 = 1.0;
  p.c_cross = 1.0;
  REQUIRE(check_validity(make_composed_sbm(p), make_composed_sbm_witness(p)));
}

TEST_CASE("graphical channel construction") {
  auto kern = make_bsc_parity_kernel(3, 0.1);
  auto m = make_graphical_channel(kern);
  REQUIRE(m.atom_count() == 2);
  for (std::size_t idx = 0; idx < table_size(2, 3); ++idx)
    REQUIRE(std::abs(m.psi_bar()[idx] - 1.0) < 1e-12);
  // tables carry the (1-eta)/p*, eta/p* pattern
  for (const auto& a : m.weights().atoms)
    for (double v : a.psi.table) REQUIRE((std::abs(v - 1.8) < 1e-12 || std::abs(v - 0.2) < 1e-12));

  auto k2 = make_bsc_parity_kernel(2, 0.25);
  auto m2 = make_graphical_channel(k2);
  RngStream rng(3, 0);
  for (int t = 0; t < 10; ++t)
    REQUIRE(std::abs(xi(m2, Simplex::random(2, rng)) - 1.0) < 1e-12);
  for (const auto& a : m2.weights().atoms)
    for (double v : a.psi.table) REQUIRE((std::abs(v - 1.5) < 1e-12 || std::abs(v - 0.5) < 1e-12));

  // nu_y == p* for all y collapses to the flat model (single output symbol)
  ChannelKernel noiseless;
  noiseless.q = 2;
  noiseless.k = 2;
  noiseless.q_out = 1;
  noiseless.nu.assign(4, 1.0);
  noiseless.p_star = Simplex({1.0});
  auto mc = make_graphical_channel(noiseless);
  for (double v : mc.weights().atoms[0].psi.table) REQUIRE(v == 1.0);

  // duplicate atoms rejected with a remediation hint
  ChannelKernel dup;
  dup.q = 2;
  dup.k = 1;
  dup.q_out = 2;
  dup.nu = {0.5, 0.5, 0.5, 0.5};
  dup.p_star = Simplex::uniform(2);
  REQUIRE_THROWS_WITH(make_graphical_channel(dup), Catch::Matchers::ContainsSubstring("perturb"));
}

TEST_CASE("witness structural violations") {
  auto m = make_nae_sat(3, 0.5);
  auto w = make_nae_sat_witness(3, 0.5);

  // negative factor vector under PlusOne
  auto bad = w;
  bad.components[0].factors[0][0][0] = -0.5;
  REQUIRE_FALSE(check_validity(m, bad));

  // broken reconstruction
  auto off = w;
  off.components[1].b = 0.3;
  REQUIRE_FALSE(check_validity(m, off));

  // MinusOne without a sign partner
  std::vector<JAtom> js{{-1.0, 0.5}, {1.0, 0.5}};
  auto ks = make_kspin(2, 0.4, js);
  auto kw = make_kspin_witness(2, 0.4, js);
  auto unpaired = kw;
  unpaired.components[0].b = 0.9;  // no matching -0.9 component
  REQUIRE_FALSE(check_validity(ks, unpaired));

  // dimension mismatch is an error, not a false
  auto wrong_k = make_nae_sat_witness(2, 0.5);
  REQUIRE_THROWS_AS(check_validity(m, wrong_k), std::invalid_argument);
}

TEST_CASE("zoo invariants: bal and unit mean weight") {
  for (const auto& m : fgtk_test::zoo_roster()) {
    REQUIRE(check_bal(m, 1e-9));
    REQUIRE(m.gamma_star().q() == m.q());
  }
  auto ks = make_kspin(3, 0.5, {{-1.0, 0.5}, {1.0, 0.5}});
  auto ch = make_graphical_channel(make_bsc_parity_kernel(2, 0.25));
  for (const ModelSpec* m : {&ks, &ch}) {
    double worst = 0.0;
    for (double v : m->psi_bar()) worst = std::max(worst, std::abs(v - 1.0));
    REQUIRE(worst < 1e-12);
  }
}

TEST_CASE("channel nabla_I does not depend on the reference law") {
  auto k1 = make_bsc_parity_kernel(2, 0.25);
  auto k2 = make_bsc_parity_kernel(2, 0.25, Simplex({0.3, 0.7}));
  auto m1 = make_graphical_channel(k1);
  auto m2 = make_graphical_channel(k2);
  RngStream rng(9, 0);
  for (int t = 0; t < 4; ++t) {
    Population p1 = fgtk_test::random_mean_constrained(m1, 32, rng);
    Population p2 = fgtk_test::random_mean_constrained(m1, 32, rng);
    MeanSe a = eval_nabla_i(m1, p1, p2, 300000, RngStream(9, 10 + t), 2);
    MeanSe b = eval_nabla_i(m2, p1, p2, 300000, RngStream(9, 10 + t), 2);
    double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    REQUIRE(std::abs(a.mean - b.mean) <= 3.0 * se);
  }
}

TEST_CASE("validation rejections") {
  // simplex: negative entries and off-by-more-than-1e-9 sums
  REQUIRE_THROWS_AS(Simplex({0.5, -0.1, 0.6}), std::invalid_argument);
  REQUIRE_THROWS_AS(Simplex({0.5, 0.6}), std::invalid_argument);
  REQUIRE_NOTHROW(Simplex({0.5, 0.5 + 5e-10}));  // renormalized

  // psi_min outside (0, 1/q)
  WeightDistribution wd;
  wd.atoms.push_back({WeightFunction(2, 2, {1.0, 1.0, 1.0, 1.0}), 1.0});
  REQUIRE_THROWS_AS(ModelSpec(2, 2, 0.6, wd, Simplex::uniform(2), 4.0), std::invalid_argument);
  // entries below psi_min
  WeightDistribution wd2;
  wd2.atoms.push_back({WeightFunction(2, 2, {0.1, 1.0, 1.0, 1.0}), 1.0});
  REQUIRE_THROWS_AS(ModelSpec(2, 2, 0.25, wd2, Simplex::uniform(2), 4.0), std::invalid_argument);
  // gamma* not dominating psi_min
  REQUIRE_THROWS_AS(ModelSpec(2, 2, 0.25, wd, Simplex({0.9, 0.1}), 4.0), std::invalid_argument);
  // atom probabilities must sum to one
  WeightDistribution wd3;
  wd3.atoms.push_back({WeightFunction(2, 2, {1.0, 1.0, 1.0, 1.0}), 0.4});
  wd3.atoms.push_back({WeightFunction(2, 2, {1.0, 1.0, 1.0, 1.0}), 0.4});
  REQUIRE_THROWS_AS(ModelSpec(2, 2, 0.25, wd3, Simplex::uniform(2), 4.0), std::invalid_argument);
}

TEST_CASE("model JSON round trip and content hash") {
  auto m = make_nae_sat(3, 0.5);
  auto j = m.to_json();
  auto back = ModelSpec::from_json(j);
  REQUIRE(back.content_hash() == m.content_hash());
  REQUIRE(back.q() == m.q());
  REQUIRE(back.canonical_json() == m.canonical_json());

  auto other = make_nae_sat(3, 0.25);
  REQUIRE(other.content_hash() != m.content_hash());
}
