#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fgtk/simplex.hpp"
#include "fgtk/weights.hpp"

namespace fgtk {

// The model tuple (q, k, p, gamma_star, d_max). Immutable after construction;
// psi_bar is precomputed once.
class ModelSpec {
 public:
  ModelSpec(std::size_t q, std::size_t k, double psi_min, WeightDistribution weights,
            Simplex gamma_star, double d_max)
      : q_(q),
        k_(k),
        psi_min_(psi_min),
        weights_(std::move(weights)),
        gamma_star_(std::move(gamma_star)),
        d_max_(d_max) {
    validate();
    psi_bar_ = weights_.mean_table();
  }

  std::size_t q() const { return q_; }
  std::size_t k() const { return k_; }
  double psi_min() const { return psi_min_; }
  double psi_max() const { return 1.0 / psi_min_; }
  const WeightDistribution& weights() const { return weights_; }
  const Simplex& gamma_star() const { return gamma_star_; }
  double d_max() const { return d_max_; }
  const std::vector<double>& psi_bar() const { return psi_bar_; }
  std::size_t atom_count() const { return weights_.atoms.size(); }

  struct SupCache {
    std::mutex m;
    bool set = false;
    double value = 0.0;
  };
  // Shared Xi_sup memo (the solver is deterministic per model; copies of an
  // immutable model share the slot).
  const std::shared_ptr<SupCache>& xi_cache() const { return xi_cache_; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["q"] = q_;
    j["k"] = k_;
    j["psi_min"] = psi_min_;
    j["gamma_star"] = gamma_star_.probs();
    j["d_max"] = d_max_;
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : weights_.atoms) {
      nlohmann::json ja;
      ja["prob"] = a.prob;
      ja["table"] = a.psi.table;
      atoms.push_back(ja);
    }
    j["atoms"] = atoms;
    return j;
  }

  static ModelSpec from_json(const nlohmann::json& j) {
    std::size_t q = j.at("q").get<std::size_t>();
    std::size_t k = j.at("k").get<std::size_t>();
    double psi_min = j.at("psi_min").get<double>();
    Simplex gs(j.at("gamma_star").get<std::vector<double>>());
    double d_max = j.at("d_max").get<double>();
    WeightDistribution wd;
    for (const auto& ja : j.at("atoms")) {
      WeightAtom a;
      a.prob = ja.at("prob").get<double>();
      a.psi = WeightFunction(q, k, ja.at("table").get<std::vector<double>>());
      wd.atoms.push_back(std::move(a));
    }
    return ModelSpec(q, k, psi_min, std::move(wd), std::move(gs), d_max);
  }

  // Canonical serialization: fixed key order, %.17g numbers. The content hash
  // of this string identifies the model in result files.
  std::string canonical_json() const {
    std::ostringstream os;
    os << "{\"q\":" << q_ << ",\"k\":" << k_ << ",\"psi_min\":" << fmt(psi_min_)
       << ",\"gamma_star\":[";
    for (std::size_t z = 0; z < q_; ++z) os << (z ? "," : "") << fmt(gamma_star_[z]);
    os << "],\"d_max\":" << fmt(d_max_) << ",\"atoms\":[";
    for (std::size_t a = 0; a < weights_.atoms.size(); ++a) {
      os << (a ? "," : "") << "{\"prob\":" << fmt(weights_.atoms[a].prob) << ",\"table\":[";
      const auto& t = weights_.atoms[a].psi.table;
      for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << fmt(t[i]);
      os << "]}";
    }
    os << "]}";
    return os.str();
  }

  std::uint64_t content_hash() const {
    // FNV-1a over the canonical serialization.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  void validate() const {
    if (k_ < 1) throw std::invalid_argument("ModelSpec: k >= 1 required");
    if (!(d_max_ > 0.0)) throw std::invalid_argument("ModelSpec: d_max > 0 required");
    if (!(psi_min_ > 0.0) || !(psi_min_ < 1.0 / static_cast<double>(q_)))
      throw std::invalid_argument("ModelSpec: psi_min must lie in (0, 1/q)");
    weights_.validate();
    if (weights_.q() != q_ || weights_.k() != k_)
      throw std::invalid_argument("ModelSpec: weight tables do not match (q, k)");
    double lo = weights_.min_entry(), hi = weights_.max_entry();
    if (lo < psi_min_ - 1e-15 || hi > 1.0 / psi_min_ + 1e-12)
      throw std::invalid_argument("ModelSpec: weight entries outside [psi_min, 1/psi_min]");
    if (gamma_star_.q() != q_) throw std::invalid_argument("ModelSpec: gamma_star dimension != q");
    for (std::size_t z = 0; z < q_; ++z)
      if (gamma_star_[z] < psi_min_ - 1e-15)
        throw std::invalid_argument("ModelSpec: gamma_star must dominate psi_min componentwise");
  }

  std::size_t q_;
  std::size_t k_;
  double psi_min_;
  WeightDistribution weights_;
  Simplex gamma_star_;
  double d_max_;
  std::vector<double> psi_bar_;
  std::shared_ptr<SupCache> xi_cache_ = std::make_shared<SupCache>();
};

}  // namespace fgtk
