#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgtk/common.hpp"
#include "fgtk/graph.hpp"
#include "fgtk/model.hpp"
#include "fgtk/nishimori.hpp"
#include "fgtk/oracle.hpp"
#include "fgtk/rng.hpp"

namespace fgtk {

enum class QuenchedVariant { Null, PlantedIid, PlantedNishimori };

inline const char* variant_name(QuenchedVariant v) {
  switch (v) {
    case QuenchedVariant::Null: return "null";
    case QuenchedVariant::PlantedIid: return "planted_iid";
    default: return "planted_nishimori";
  }
}

// E[phi(G)] with the per-graph Z computed exactly (no MCMC); quenched over
// both m ~ Po(dn/k) and the graph (and the ground truth for the planted
// variants). Unbiased, capped by the q^n oracle guard.
inline MeanSe quenched_free_entropy(const ModelSpec& model, std::size_t n, double d,
                                    QuenchedVariant variant, std::size_t samples, RngStream rng,
                                    unsigned workers = 0) {
  std::vector<double> vals(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0xFE, s);
    std::size_t m = static_cast<std::size_t>(sample_m(model, d, n, r));
    FactorGraph g;
    switch (variant) {
      case QuenchedVariant::Null:
        g = sample_null(model, n, m, r);
        break;
      case QuenchedVariant::PlantedIid: {
        Assignment sigma(n);
        for (auto& c : sigma) c = model.gamma_star().sample(r);
        g = sample_teacher_student(model, sigma, m, r);
        break;
      }
      case QuenchedVariant::PlantedNishimori: {
        Assignment sigma = sample_nishimori(model, n, m, r);
        g = sample_teacher_student(model, sigma, m, r);
        break;
      }
    }
    vals[s] = free_entropy(model, g);
  });
  return mean_and_stderr(vals);
}

// Finite-size Nishimori ordering: conditional on m,
//   E[phi(G_TS(sigma_hat))] >= (1/n) ln E[Z(G)] >= E[phi(G)].
// The middle term is exact (composition-class sum); the outer two are MC
// estimates with a common m per sample.
struct OrderingStratum {
  std::size_t m = 0;
  std::size_t count = 0;
  double planted_mean = 0.0, planted_se = 0.0;
  double annealed = 0.0;  // exact (1/n) ln E[Z(G_m)]
  double null_mean = 0.0, null_se = 0.0;
};

struct OrderingReport {
  std::vector<OrderingStratum> strata;  // sorted by m
  double planted_mean = 0.0, planted_se = 0.0;
  double annealed_mean = 0.0;  // E_m[(1/n) ln E Z], weighted by sampled m
  double null_mean = 0.0, null_se = 0.0;
  bool chain_upper = false;  // planted >= annealed within 3 se
  bool chain_lower = false;  // annealed >= null within 3 se
  bool pass() const { return chain_upper && chain_lower; }
};

inline OrderingReport ordering_check(const ModelSpec& model, std::size_t n, double d,
                                     std::size_t samples, RngStream rng, unsigned workers = 0) {
  std::vector<std::size_t> ms(samples);
  std::vector<double> planted(samples), nullv(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0x0D, s);
    std::size_t m = static_cast<std::size_t>(sample_m(model, d, n, r));
    ms[s] = m;
    Assignment sigma = sample_nishimori(model, n, m, r);
    planted[s] = free_entropy(model, sample_teacher_student(model, sigma, m, r));
    nullv[s] = free_entropy(model, sample_null(model, n, m, r));
  });

  OrderingReport rep;
  std::map<std::size_t, std::vector<std::size_t>> by_m;
  for (std::size_t s = 0; s < samples; ++s) by_m[ms[s]].push_back(s);
  KahanSum ann;
  for (const auto& [m, idxs] : by_m) {
    OrderingStratum st;
    st.m = m;
    st.count = idxs.size();
    std::vector<double> p, u;
    for (std::size_t s : idxs) {
      p.push_back(planted[s]);
      u.push_back(nullv[s]);
    }
    MeanSe mp = mean_and_stderr(p), mu = mean_and_stderr(u);
    st.planted_mean = mp.mean;
    st.planted_se = mp.std_error;
    st.null_mean = mu.mean;
    st.null_se = mu.std_error;
    st.annealed = log_annealed_partition(model, n, m) / static_cast<double>(n);
    ann.add(st.annealed * static_cast<double>(st.count));
    rep.strata.push_back(st);
  }
  MeanSe mp = mean_and_stderr(planted), mu = mean_and_stderr(nullv);
  rep.planted_mean = mp.mean;
  rep.planted_se = mp.std_error;
  rep.null_mean = mu.mean;
  rep.null_se = mu.std_error;
  rep.annealed_mean = ann.value() / static_cast<double>(samples);
  rep.chain_upper = rep.planted_mean >= rep.annealed_mean - 3.0 * rep.planted_se;
  rep.chain_lower = rep.annealed_mean >= rep.null_mean - 3.0 * rep.null_se;
  return rep;
}

// Empirical tail of phi(G) around its mean at fixed m = round(dn/k) (the
// concentration statement is per-m; with random m even constant weights
// would show spurious variance). Fits ln P[|phi - mean| >= r] against r^2
// where the tail still holds >= 100 samples; only the sub-Gaussian shape is
// checked, the constants are existential.
struct ConcentrationReport {
  std::size_t m = 0;
  double mean = 0.0;
  std::vector<double> r_grid;
  std::vector<double> tail;        // P[|phi - mean| >= r]
  std::vector<std::size_t> count;  // tail sample counts
  bool fitted = false;
  double slope = 0.0;  // of ln(tail) vs r^2
  double r_squared = 0.0;
};

inline ConcentrationReport concentration_check(const ModelSpec& model, std::size_t n, double d,
                                               std::size_t samples, RngStream rng,
                                               unsigned workers = 0) {
  ConcentrationReport rep;
  rep.m = static_cast<std::size_t>(
      std::llround(d * static_cast<double>(n) / static_cast<double>(model.k())));
  std::vector<double> vals(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    RngStream r = rng.substream(0xC0, s);
    vals[s] = free_entropy(model, sample_null(model, n, rep.m, r));
  });
  MeanSe ms = mean_and_stderr(vals);
  rep.mean = ms.mean;
  double max_dev = 0.0;
  for (double v : vals) max_dev = std::max(max_dev, std::abs(v - rep.mean));
  if (max_dev == 0.0) {
    rep.r_grid = {0.0};
    rep.tail = {0.0};
    rep.count = {0};
    return rep;
  }
  const std::size_t grid = 24;
  for (std::size_t i = 1; i <= grid; ++i) {
    double r = max_dev * static_cast<double>(i) / static_cast<double>(grid);
    std::size_t cnt = 0;
    for (double v : vals)
      if (std::abs(v - rep.mean) >= r) ++cnt;
    rep.r_grid.push_back(r);
    rep.tail.push_back(static_cast<double>(cnt) / static_cast<double>(samples));
    rep.count.push_back(cnt);
  }
  // least squares of ln(tail) on r^2 over usable points
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.r_grid.size(); ++i)
    if (rep.count[i] >= 100) {
      xs.push_back(rep.r_grid[i] * rep.r_grid[i]);
      ys.push_back(std::log(rep.tail[i]));
    }
  if (xs.size() >= 3) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx > 0 && syy > 0) {
      rep.fitted = true;
      rep.slope = sxy / sxx;
      rep.r_squared = (sxy * sxy) / (sxx * syy);
    }
  }
  return rep;
}

}  // namespace fgtk
