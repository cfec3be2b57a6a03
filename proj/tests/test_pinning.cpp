#include <catch2/catch_amalgamated.hpp>

#include "fgtk/fgtk.hpp"
#include "test_util.hpp"

using namespace fgtk;
using fgtk_test::constant_mix_model;
using fgtk_test::symmetric_pair_model;

namespace {

DenseMeasure product_measure(std::size_t n, const Simplex& gamma) {
  DenseMeasure mu;
  mu.n = n;
  mu.q = gamma.q();
  mu.probs.resize(detail::pow_zt(gamma.q(), n));
  Assignment sigma(n);
  for (std::size_t idx = 0; idx < mu.probs.size(); ++idx) {
    sigma_decode(idx, gamma.q(), n, sigma);
    double p = 1.0;
    for (std::size_t c : sigma) p *= gamma[c];
    mu.probs[idx] = p;
  }
  return mu;
}

// sigma_1 = sigma_2 uniform: the maximally correlated pair.
DenseMeasure correlated_pair(std::size_t q) {
  DenseMeasure mu;
  mu.n = 2;
  mu.q = q;
  mu.probs.assign(q * q, 0.0);
  for (std::size_t z = 0; z < q; ++z) mu.probs[z * q + z] = 1.0 / static_cast<double>(q);
  return mu;
}

DenseMeasure random_measure(std::size_t n, std::size_t q, RngStream& rng) {
  DenseMeasure mu;
  mu.n = n;
  mu.q = q;
  mu.probs.resize(detail::pow_zt(q, n));
  double sum = 0.0;
  for (auto& p : mu.probs) {
    p = -std::log(1.0 - rng.unit());
    sum += p;
  }
  for (auto& p : mu.probs) p /= sum;
  return mu;
}

}  // namespace

TEST_CASE("pin_measure") {
  auto sp = symmetric_pair_model(0.4, 1.1);
  FactorGraph g;
  g.n = 2;
  g.factors.push_back({{0, 1}, 0});
  DenseMeasure mu = gibbs_measure(sp, g);

  DenseMeasure un = pin_measure(mu, {}, {0, 0});
  for (std::size_t i = 0; i < mu.probs.size(); ++i) REQUIRE(un.probs[i] == mu.probs[i]);

  // product measure stays product on the free coordinates
  DenseMeasure prod = product_measure(3, Simplex({0.3, 0.7}));
  DenseMeasure pinned = pin_measure(prod, {1}, {0, 0, 0});
  Assignment sigma(3);
  for (std::size_t idx = 0; idx < pinned.probs.size(); ++idx) {
    sigma_decode(idx, 2, 3, sigma);
    double expect = (sigma[1] == 0) ? (sigma[0] == 0 ? 0.3 : 0.7) * (sigma[2] == 0 ? 0.3 : 0.7) : 0.0;
    REQUIRE(std::abs(pinned.probs[idx] - expect) < 1e-12);
  }

  // pin variable 1 of the Gibbs pair to color 0: normalize the row
  DenseMeasure cond = pin_measure(mu, {0}, {0, 0});
  double row = 0.4 / 3.0 + 1.1 / 3.0;
  REQUIRE(std::abs(cond.probs[0] - (0.4 / 3.0) / row) < 1e-12);
  REQUIRE(std::abs(cond.probs[1] - (1.1 / 3.0) / row) < 1e-12);
  REQUIRE(cond.probs[2] == 0.0);
  REQUIRE(cond.probs[3] == 0.0);

  // idempotent
  DenseMeasure twice = pin_measure(cond, {0}, {0, 0});
  for (std::size_t i = 0; i < cond.probs.size(); ++i)
    REQUIRE(std::abs(twice.probs[i] - cond.probs[i]) < 1e-15);

  // zero-probability event
  REQUIRE_THROWS_AS(pin_measure(cond, {0}, {1, 0}), std::invalid_argument);
}

TEST_CASE("iota_ell") {
  // ell <= 1 vanishes
  DenseMeasure prod = product_measure(4, Simplex({0.3, 0.7}));
  REQUIRE(iota_ell(prod, 0).mean == 0.0);
  REQUIRE(iota_ell(prod, 1).mean == 0.0);

  // product measures: only repeated coordinates contribute, giving
  // sum_i H_i (ell/n - 1 + (1 - 1/n)^ell) with all H_i equal here
  for (std::size_t ell : {2, 3}) {
    double got = iota_ell(prod, ell).mean;
    double h = Simplex({0.3, 0.7}).entropy();
    double nn = 4.0;
    double expect = 4.0 * h *
                    (static_cast<double>(ell) / nn - 1.0 +
                     std::pow(1.0 - 1.0 / nn, static_cast<double>(ell)));
    REQUIRE(std::abs(got - expect) < 1e-12);
  }

  // perfectly correlated uniform pair: every 2-tuple contributes ln q
  for (std::size_t q : {2, 3}) {
    DenseMeasure mu = correlated_pair(q);
    REQUIRE(std::abs(iota_ell(mu, 2).mean - std::log(static_cast<double>(q))) < 1e-12);
  }
}

TEST_CASE("nu_ell and pinsker") {
  DenseMeasure mu = correlated_pair(2);
  // every tuple has TV 1/2 between the joint and the product
  REQUIRE(std::abs(nu_ell(mu, 2).mean - 0.5) < 1e-12);

  RngStream rng(81, 0);
  for (int t = 0; t < 100; ++t) {
    DenseMeasure r = random_measure(3, 2, rng);
    std::size_t ell = 2 + rng.uniform_index(2);
    double nu = nu_ell(r, ell).mean;
    double io = iota_ell(r, ell).mean;
    REQUIRE(nu <= std::sqrt(io / 2.0) + 1e-12);
    REQUIRE(io <= (static_cast<double>(ell) - 1.0) * std::log(2.0) + 1e-12);
  }
}

TEST_CASE("pinning lemma on products and gibbs measures") {
  DenseMeasure prod = product_measure(6, Simplex({0.4, 0.6}));
  PinningLemmaReport rp = verify_pinning_lemma(prod, 2, 3.0, 500, RngStream(82, 0), 4);
  REQUIRE(rp.pass());

  auto m = make_nae_sat(3, 0.5);
  RngStream rng(82, 1);
  std::size_t mm = static_cast<std::size_t>(sample_m(m, 1.5, 8, rng));
  DenseMeasure mu = gibbs_measure(m, sample_null(m, 8, mm, rng));
  for (double theta : {4.0, 8.0}) {
    PinningLemmaReport r = verify_pinning_lemma(mu, 2, theta, 1500, RngStream(82, 2), 4);
    REQUIRE(r.pass());
    REQUIRE(std::abs(r.rhs - std::log(2.0) / theta) < 1e-12);
  }
  PinningLemmaReport r3 = verify_pinning_lemma(mu, 3, 8.0, 1500, RngStream(82, 3), 4);
  REQUIRE(r3.pass());
  REQUIRE(std::abs(r3.rhs - 3.0 * std::log(2.0) / 8.0) < 1e-12);

  REQUIRE_THROWS_AS(verify_pinning_lemma(mu, 2, 0.0, 10, RngStream(82, 4)),
                    std::invalid_argument);
}

TEST_CASE("pinned nishimori coincidence") {
  auto mix = constant_mix_model(2, 2, 0.5, 2.0);
  REQUIRE(verify_pinned_nishimori(mix, 2, 1, 0.0) < 1e-15);  // no pins realized
  auto cm = fgtk_test::constant_model(2, 2, 0.8);
  REQUIRE(verify_pinned_nishimori(cm, 2, 1, 2.0) < 1e-12);
  REQUIRE(verify_pinned_nishimori(mix, 2, 1, 2.0) < 1e-9);
  REQUIRE(verify_pinned_nishimori(mix, 3, 2, 3.0) < 1e-9);
}

TEST_CASE("iota MC fallback agrees with the product closed form") {
  // n^ell > 1e6 forces the tuple-sampling path
  std::size_t n = 14, ell = 6;
  DenseMeasure prod = product_measure(n, Simplex({0.3, 0.7}));
  RngStream rng(84, 0);
  MeanSe mc = iota_ell(prod, ell, &rng, 40000);
  double h = Simplex({0.3, 0.7}).entropy();
  double expect = static_cast<double>(n) * h *
                  (static_cast<double>(ell) / n - 1.0 +
                   std::pow(1.0 - 1.0 / n, static_cast<double>(ell)));
  REQUIRE(mc.std_error > 0.0);
  REQUIRE(std::abs(mc.mean - expect) <= 4.0 * mc.std_error);
}

TEST_CASE("iota determinism across worker counts") {
  auto m = make_nae_sat(3, 0.5);
  RngStream rng(83, 0);
  std::size_t mm = static_cast<std::size_t>(sample_m(m, 1.0, 8, rng));
  DenseMeasure mu = gibbs_measure(m, sample_null(m, 8, mm, rng));
  PinningLemmaReport a = verify_pinning_lemma(mu, 2, 4.0, 400, RngStream(83, 1), 1);
  PinningLemmaReport b = verify_pinning_lemma(mu, 2, 4.0, 400, RngStream(83, 1), 4);
  REQUIRE(a.lhs == b.lhs);
  REQUIRE(a.std_error == b.std_error);
}
