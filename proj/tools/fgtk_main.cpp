// fgtk: batch front end for sparse factor-graph threshold experiments.
// Subcommands: model check, xi-sup, bethe, threshold, mc, exact audit,
// pinning audit. All emit CSV (stdout or --out) with a trailing metadata
// comment; identical seeds give byte-identical output for any --workers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fgtk/fgtk.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitResource = 2;
constexpr int kExitUsage = 3;

struct ModelOptions {
  std::string model_file;
  std::string zoo;
  std::size_t zk = 3;
  double eps = 0.5;
  double beta = 0.5;
  double eta = 0.25;
  double pstar0 = 0.5;
  std::size_t q = 3;
  std::size_t split = 1;
  std::vector<double> sbm_params{0.5, 1.0, 0.5, 1.0, 1.0};
  double cvalue = 0.8;
  double clo = 0.5;
  double chi = 2.0;
  double d_max = 8.0;

  void attach(CLI::App* app) {
    app->add_option("--model", model_file, "model spec JSON file");
    app->add_option("--zoo", zoo, "zoo shorthand: naesat|kspin|sbm|channel|const|constmix");
    app->add_option("--zoo-k", zk, "arity for zoo models");
    app->add_option("--eps", eps, "NAE-SAT softness");
    app->add_option("--beta", beta, "k-spin inverse temperature");
    app->add_option("--eta", eta, "channel flip probability");
    app->add_option("--pstar0", pstar0, "channel reference mass on output 0");
    app->add_option("--q", q, "SBM color count");
    app->add_option("--split", split, "SBM size of type-1 class");
    app->add_option("--sbm-params", sbm_params, "c_eq1 c_neq1 c_eq2 c_neq2 c_cross")->expected(5);
    app->add_option("--cvalue", cvalue, "constant weight value");
    app->add_option("--clo", clo, "constmix low value");
    app->add_option("--chi", chi, "constmix high value");
    app->add_option("--zoo-d-max", d_max, "degree bound for zoo models");
  }

  fgtk::ModelSpec build() const {
    using namespace fgtk;
    if (!model_file.empty()) {
      std::ifstream in(model_file);
      if (!in) throw std::invalid_argument("cannot open model file: " + model_file);
      nlohmann::json j;
      in >> j;
      return ModelSpec::from_json(j);
    }
    if (zoo == "naesat") return make_nae_sat(zk, eps, d_max);
    if (zoo == "kspin") return make_kspin(zk, beta, {{-1.0, 0.5}, {1.0, 0.5}}, d_max);
    if (zoo == "sbm") {
      ComposedSbmParams p;
      p.q = q;
      for (std::size_t z = 0; z < split; ++z) p.class1.push_back(z);
      p.c_eq1 = sbm_params[0];
      p.c_neq1 = sbm_params[1];
      p.c_eq2 = sbm_params[2];
      p.c_neq2 = sbm_params[3];
      p.c_cross = sbm_params[4];
      return make_composed_sbm(p, d_max);
    }
    if (zoo == "channel") {
      return make_graphical_channel(
          make_bsc_parity_kernel(zk, eta, Simplex({pstar0, 1.0 - pstar0})), std::nullopt, d_max);
    }
    if (zoo == "const") {
      WeightDistribution wd;
      std::vector<double> t(table_size(2, zk), cvalue);
      wd.atoms.push_back({WeightFunction(2, zk, std::move(t)), 1.0});
      return ModelSpec(2, zk, default_psi_min(2, cvalue, cvalue), std::move(wd),
                       Simplex::uniform(2), d_max);
    }
    if (zoo == "constmix") {
      WeightDistribution wd;
      std::vector<double> tl(table_size(2, zk), clo), th(table_size(2, zk), chi);
      wd.atoms.push_back({WeightFunction(2, zk, std::move(tl)), 0.5});
      wd.atoms.push_back({WeightFunction(2, zk, std::move(th)), 0.5});
      return ModelSpec(2, zk, default_psi_min(2, clo, chi), std::move(wd), Simplex::uniform(2),
                       d_max);
    }
    throw std::invalid_argument("no model: pass --model <file> or --zoo <name>");
  }
};

void emit(const fgtk::CsvWriter& csv, const std::string& out_file, std::uint64_t seed,
          std::uint64_t model_hash) {
  if (out_file.empty()) {
    csv.write(std::cout, seed, fgtk::kVersion, model_hash);
  } else {
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file: " + out_file);
    csv.write(out, seed, fgtk::kVersion, model_hash);
  }
}

fgtk::ValidityWitness witness_from_json(const nlohmann::json& j) {
  fgtk::ValidityWitness w;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "minus_one")
    w.kind = fgtk::WitnessKind::MinusOne;
  else if (kind == "plus_one")
    w.kind = fgtk::WitnessKind::PlusOne;
  else
    throw std::invalid_argument("witness kind must be minus_one or plus_one");
  w.mixture_probs = j.at("mixture_probs").get<std::vector<double>>();
  for (const auto& jc : j.at("components")) {
    fgtk::WitnessComponent c;
    c.a = jc.at("a").get<double>();
    c.b = jc.at("b").get<double>();
    c.factors = jc.at("factors").get<std::vector<std::vector<std::vector<double>>>>();
    w.components.push_back(std::move(c));
  }
  return w;
}

nlohmann::json population_to_json(const fgtk::Population& pop) {
  nlohmann::json j;
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < pop.size(); ++i) members.push_back(pop.member(i).probs());
  j["members"] = members;
  j["weights"] = pop.weights();
  return j;
}

fgtk::Population population_from_json(const nlohmann::json& j) {
  std::vector<fgtk::Simplex> members;
  for (const auto& jm : j.at("members"))
    members.push_back(fgtk::Simplex(jm.get<std::vector<double>>()));
  if (j.contains("weights"))
    return fgtk::Population(std::move(members), j.at("weights").get<std::vector<double>>());
  return fgtk::Population(std::move(members));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fgtk;
  CLI::App app{"sparse factor-graph thresholds toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out_file;
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", out_file, "output file (default stdout)");

  ModelOptions mopt;

  // model check
  auto* cmd_model = app.add_subcommand("model", "model utilities");
  auto* cmd_check = cmd_model->add_subcommand("check", "validate a model spec");
  std::string check_positional, witness_file;
  double bal_tol = 1e-9;
  cmd_check->add_option("spec", check_positional, "model spec JSON file");
  cmd_check->add_option("--witness", witness_file, "validity witness JSON file");
  cmd_check->add_option("--bal-tol", bal_tol, "tolerance for the BAL check");
  mopt.attach(cmd_check);

  // xi-sup
  auto* cmd_xisup = app.add_subcommand("xi-sup", "maximize Xi over the simplex");
  std::string xisup_positional;
  cmd_xisup->add_option("spec", xisup_positional, "model spec JSON file");
  mopt.attach(cmd_xisup);

  // bethe
  auto* cmd_bethe = app.add_subcommand("bethe", "population dynamics trace");
  double bethe_d = 1.0;
  PopDynConfig pd_cfg;
  std::string dump_pop, init_pop;
  cmd_bethe->add_option("--d", bethe_d, "average degree")->required();
  cmd_bethe->add_option("--N", pd_cfg.population_size, "population size")->capture_default_str();
  cmd_bethe->add_option("--sweeps", pd_cfg.sweeps, "sweeps")->capture_default_str();
  cmd_bethe->add_option("--damping", pd_cfg.damping, "keep-old probability")->capture_default_str();
  cmd_bethe->add_option("--eval-samples", pd_cfg.eval_samples, "final evaluation samples")
      ->capture_default_str();
  cmd_bethe->add_option("--trace-samples", pd_cfg.trace_samples, "per-sweep evaluation samples")
      ->capture_default_str();
  cmd_bethe->add_option("--dump-pop", dump_pop, "write final population JSON");
  cmd_bethe->add_option("--init-pop", init_pop, "warm-start population JSON");
  mopt.attach(cmd_bethe);

  // threshold
  auto* cmd_thresh = app.add_subcommand("threshold", "limit curves over a degree grid");
  double thresh_dmax = 0.0;
  std::size_t grid = 8;
  bool locate = false;
  double bracket_tol = 0.25;
  ThresholdConfig tcfg;
  cmd_thresh->add_option("--d-max", thresh_dmax, "grid upper end (default: model d_max)");
  cmd_thresh->add_option("--grid", grid, "number of grid points")->capture_default_str();
  cmd_thresh->add_flag("--locate", locate, "bisect for the condensation bracket");
  cmd_thresh->add_option("--tol", bracket_tol, "bracket width target")->capture_default_str();
  cmd_thresh->add_option("--restarts", tcfg.restarts, "B_sup restarts")->capture_default_str();
  cmd_thresh->add_option("--N", tcfg.pd.population_size, "population size")->capture_default_str();
  cmd_thresh->add_option("--sweeps", tcfg.pd.sweeps, "sweeps")->capture_default_str();
  cmd_thresh->add_option("--eval-samples", tcfg.pd.eval_samples, "evaluation samples")
      ->capture_default_str();
  mopt.attach(cmd_thresh);

  // mc
  auto* cmd_mc = app.add_subcommand("mc", "finite-size quenched free entropy");
  std::size_t mc_n = 8;
  double mc_d = 1.0;
  std::string mc_variant = "planted_nishimori";
  std::size_t mc_samples = 1000;
  cmd_mc->add_option("--n", mc_n, "variables")->capture_default_str();
  cmd_mc->add_option("--d", mc_d, "average degree")->capture_default_str();
  cmd_mc->add_option("--variant", mc_variant, "null|planted_iid|planted_nishimori")
      ->capture_default_str();
  cmd_mc->add_option("--samples", mc_samples, "graph samples")->capture_default_str();
  mopt.attach(cmd_mc);

  // exact audit
  auto* cmd_exact = app.add_subcommand("exact", "exact oracles");
  auto* cmd_audit = cmd_exact->add_subcommand("audit", "finite-size identity audit");
  std::size_t ex_n = 2, ex_m = 1;
  cmd_audit->add_option("--n", ex_n, "variables")->capture_default_str();
  cmd_audit->add_option("--m", ex_m, "factors")->capture_default_str();
  mopt.attach(cmd_audit);

  // pinning audit
  auto* cmd_pin = app.add_subcommand("pinning", "pinning diagnostics");
  auto* cmd_pin_audit = cmd_pin->add_subcommand("audit", "pinning lemma audit");
  std::size_t pin_n = 8;
  std::vector<double> pin_thetas{2.0, 4.0, 8.0};
  std::vector<std::size_t> pin_ells{2, 3};
  std::size_t pin_graphs = 5, pin_samples = 2000;
  double pin_d = 1.0;
  cmd_pin_audit->add_option("--n", pin_n, "variables")->capture_default_str();
  cmd_pin_audit->add_option("--theta", pin_thetas, "pinning caps")->capture_default_str();
  cmd_pin_audit->add_option("--ell", pin_ells, "tuple lengths")->capture_default_str();
  cmd_pin_audit->add_option("--graphs", pin_graphs, "Gibbs measures to sample")
      ->capture_default_str();
  cmd_pin_audit->add_option("--samples", pin_samples, "pin draws per measure")
      ->capture_default_str();
  cmd_pin_audit->add_option("--d", pin_d, "average degree for the sampled graphs")
      ->capture_default_str();
  mopt.attach(cmd_pin_audit);

  // global options (--seed, --workers, --out) may appear after a subcommand
  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cmd_check->parsed()) {
      if (!check_positional.empty()) mopt.model_file = check_positional;
      ModelSpec model = mopt.build();
      bool bal = check_bal(model, bal_tol);
      std::ostringstream report;
      report << "INVARIANTS: pass\n";
      report << "BAL: " << (bal ? "pass" : "fail") << "\n";
      bool witness_ok = true;
      if (!witness_file.empty()) {
        std::ifstream in(witness_file);
        if (!in) throw std::invalid_argument("cannot open witness file: " + witness_file);
        nlohmann::json j;
        in >> j;
        witness_ok = check_validity(model, witness_from_json(j));
        report << "WITNESS: " << (witness_ok ? "pass" : "fail") << "\n";
      }
      char hash[20];
      std::snprintf(hash, sizeof hash, "%016llx",
                    static_cast<unsigned long long>(model.content_hash()));
      report << "# seed=" << seed << " version=" << kVersion << " model=" << hash << "\n";
      if (out_file.empty())
        std::cout << report.str();
      else
        std::ofstream(out_file, std::ios::binary) << report.str();
      return (bal && witness_ok) ? kExitOk : kExitValidation;
    }

    if (cmd_xisup->parsed()) {
      if (!xisup_positional.empty()) mopt.model_file = xisup_positional;
      ModelSpec model = mopt.build();
      XiSupResult r = xi_sup(model);
      std::vector<std::string> header{"xi_sup"};
      for (std::size_t z = 0; z < model.q(); ++z) header.push_back("gamma" + std::to_string(z));
      CsvWriter csv(header);
      std::vector<std::string> row{CsvWriter::num(r.value)};
      for (std::size_t z = 0; z < model.q(); ++z) row.push_back(CsvWriter::num(r.maximizer[z]));
      csv.add_row(row);
      emit(csv, out_file, seed, model.content_hash());
      return kExitOk;
    }

    if (cmd_bethe->parsed()) {
      ModelSpec model = mopt.build();
      pd_cfg.seed = seed;
      pd_cfg.workers = workers;
      std::optional<Population> init;
      if (!init_pop.empty()) {
        std::ifstream in(init_pop);
        if (!in) throw std::invalid_argument("cannot open population file: " + init_pop);
        nlohmann::json j;
        in >> j;
        init = population_from_json(j);
        Simplex mean = init->mean();
        if (mean.tv_distance(model.gamma_star()) > 1e-8)
          std::cerr << "warning: initial population mean is off gamma_star (tv="
                    << mean.tv_distance(model.gamma_star()) << ")\n";
      }
      PopDynResult run = population_dynamics(model, bethe_d, pd_cfg, init ? &*init : nullptr);
      CsvWriter csv({"sweep", "b_hat", "std_error"});
      for (std::size_t s = 0; s < run.trace.size(); ++s)
        csv.add_row({std::to_string(s + 1), CsvWriter::num(run.trace[s].value),
                     CsvWriter::num(run.trace[s].std_error)});
      emit(csv, out_file, seed, model.content_hash());
      if (!dump_pop.empty())
        std::ofstream(dump_pop) << population_to_json(run.population).dump(2) << "\n";
      return kExitOk;
    }

    if (cmd_thresh->parsed()) {
      ModelSpec model = mopt.build();
      tcfg.pd.seed = seed;
      tcfg.pd.workers = workers;
      tcfg.bracket_tol = bracket_tol;
      double hi = (thresh_dmax > 0.0) ? thresh_dmax : model.d_max();
      CsvWriter csv({"d", "phi_a", "b_sup", "b_sup_se", "delta_star", "mi_limit"});
      for (std::size_t i = 0; i <= grid; ++i) {
        double d = hi * static_cast<double>(i) / static_cast<double>(grid);
        double pa = phi_annealed(model, d);
        BetheEstimate b =
            (d == 0.0) ? BetheEstimate{0.0, 0.0, 0, 0.0}
                       : estimate_b_sup(model, d, tcfg.restarts, [&] {
                           PopDynConfig c = tcfg.pd;
                           c.seed = detail::mix64(seed ^ detail::mix64(1000 + i));
                           return c;
                         }());
        LimitEstimate mi = mutual_information_limit(model, d, [&] {
          ThresholdConfig c = tcfg;
          c.pd.seed = detail::mix64(seed ^ detail::mix64(1000 + i));
          return c;
        }());
        csv.add_row({CsvWriter::num(d), CsvWriter::num(pa), CsvWriter::num(b.value),
                     CsvWriter::num(b.std_error), CsvWriter::num(b.value - pa),
                     CsvWriter::num(mi.value)});
      }
      std::ostringstream buf;
      csv.write(buf, seed, kVersion, model.content_hash());
      std::string body = buf.str();
      if (locate) {
        ThresholdReport rep = locate_d_cond(model, tcfg);
        std::ostringstream note;
        if (rep.detected)
          note << "# bracket=[" << CsvWriter::num(rep.bracket_lo) << ","
               << CsvWriter::num(rep.bracket_hi) << "]";
        else
          note << "# bracket=not_detected_below_d_max";
        note << " lipschitz=" << CsvWriter::num(rep.lipschitz_constant) << "\n";
        body += note.str();
      }
      if (out_file.empty())
        std::cout << body;
      else
        std::ofstream(out_file, std::ios::binary) << body;
      return kExitOk;
    }

    if (cmd_mc->parsed()) {
      ModelSpec model = mopt.build();
      QuenchedVariant variant;
      if (mc_variant == "null")
        variant = QuenchedVariant::Null;
      else if (mc_variant == "planted_iid")
        variant = QuenchedVariant::PlantedIid;
      else if (mc_variant == "planted_nishimori")
        variant = QuenchedVariant::PlantedNishimori;
      else
        throw std::invalid_argument("unknown variant: " + mc_variant);
      MeanSe est =
          quenched_free_entropy(model, mc_n, mc_d, variant, mc_samples, RngStream(seed, 0xAC), workers);
      CsvWriter csv({"n", "d", "variant", "estimate", "std_error", "samples"});
      csv.add_row({std::to_string(mc_n), CsvWriter::num(mc_d), mc_variant,
                   CsvWriter::num(est.mean), CsvWriter::num(est.std_error),
                   std::to_string(mc_samples)});
      emit(csv, out_file, seed, model.content_hash());
      return kExitOk;
    }

    if (cmd_audit->parsed()) {
      ModelSpec model = mopt.build();
      char hash[20];
      std::snprintf(hash, sizeof hash, "%016llx",
                    static_cast<unsigned long long>(model.content_hash()));
      CsvWriter csv({"model", "n", "m", "identity", "residual"});
      auto row = [&](const char* name, double residual) {
        csv.add_row({hash, std::to_string(ex_n), std::to_string(ex_m), name,
                     CsvWriter::num(residual)});
      };
      row("nishimori_tv", verify_nishimori(model, ex_n, ex_m));
      MiDecomposition mid = mi_decomposition(model, ex_n, ex_m);
      row("mi_recombination",
          std::abs(exact_mutual_information(model, ex_n, ex_m) - mid.combined()));
      row("relative_entropy_identity", std::abs(relative_entropy_identity(model, ex_n, ex_m).residual()));
      JensenOrdering jo = jensen_ordering(model, ex_n, ex_m);
      row("jensen_upper", std::abs(jo.residual_upper()));
      row("jensen_lower", std::abs(jo.residual_lower()));
      row("expected_weight", expected_weight_identity_residual(model, ex_n, ex_m));
      row("pinned_nishimori_tv", verify_pinned_nishimori(model, ex_n, ex_m, static_cast<double>(ex_n)));
      emit(csv, out_file, seed, model.content_hash());
      return kExitOk;
    }

    if (cmd_pin_audit->parsed()) {
      ModelSpec model = mopt.build();
      char hash[20];
      std::snprintf(hash, sizeof hash, "%016llx",
                    static_cast<unsigned long long>(model.content_hash()));
      CsvWriter csv({"model", "n", "ell", "theta", "lhs", "se", "rhs", "pass"});
      RngStream rng(seed, 0x91A);
      for (std::size_t g = 0; g < pin_graphs; ++g) {
        RngStream gr = rng.substream(0x6, g);
        std::size_t m = static_cast<std::size_t>(sample_m(model, pin_d, pin_n, gr));
        DenseMeasure mu = gibbs_measure(model, sample_null(model, pin_n, m, gr));
        for (std::size_t ell : pin_ells)
          for (double theta : pin_thetas) {
            PinningLemmaReport rep = verify_pinning_lemma(
                mu, ell, theta, pin_samples, rng.substream(0x7, g, ell * 100 + std::size_t(theta)),
                workers);
            csv.add_row({hash, std::to_string(pin_n), std::to_string(ell), CsvWriter::num(theta),
                         CsvWriter::num(rep.lhs), CsvWriter::num(rep.std_error),
                         CsvWriter::num(rep.rhs), rep.pass() ? "1" : "0"});
          }
      }
      emit(csv, out_file, seed, model.content_hash());
      return kExitOk;
    }

    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const fgtk::resource_limit_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
