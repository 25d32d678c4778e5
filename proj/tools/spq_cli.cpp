#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spq/experiment.hpp"
#include "spq/hermite.hpp"
#include "spq/parallel.hpp"

using namespace spq;

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::vector<RuleFamily> families_from(const std::vector<std::string>& names) {
  if (names.empty()) return RuleFamily::all();
  std::vector<RuleFamily> out;
  for (const auto& n : names) out.push_back(RuleFamily::parse(n));
  return out;
}

// Shared problem/driver flags. Each one only overrides the config file when given.
struct RunFlags {
  std::string config_path;
  std::string problem, mode, rule, accounting, reference, qoi, tag;
  double alpha = 0, tau_exponent = 0, constant = 0;
  std::size_t nmax = 0, pointsmax = 0, mesh_n = 0, J = 0;
  unsigned K = 0, threads = 0;
  int r = 0;
  bool work_balanced = false;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("config,--config", config_path, "key=value experiment file");
    app->add_option("--problem", problem, "example1 | pde | constant");
    app->add_option("--mode", mode, "apriori | aposteriori");
    app->add_option("--rule", rule, "gh1 | gh2 | tgkp | gk");
    app->add_option("--nmax", nmax, "index budget (0 = none)");
    app->add_option("--pointsmax", pointsmax, "point budget (0 = none)");
    app->add_option("--K", K, "dimension lookahead");
    app->add_option("--alpha", alpha, "decay exponent");
    app->add_option("--tau-exponent", tau_exponent, "tau_j = j^exponent");
    app->add_option("--r", r, "derivative order in b_nu");
    app->add_flag("--work-balanced", work_balanced, "divide the indicator by |G_mu|");
    app->add_option("--accounting", accounting, "lambda | union");
    app->add_option("--reference", reference, "analytic | file:<path> | value:<x> | none");
    app->add_option("--J", J, "number of parameters");
    app->add_option("--mesh-n", mesh_n, "FEM cells");
    app->add_option("--qoi", qoi, "f1 | f2");
    app->add_option("--constant", constant, "value of the constant problem");
    app->add_option("--tag", tag, "figure tag");
    app->add_option("--threads", threads, "worker threads (default SPQ_THREADS or 1)");
    app->add_option("--set", sets, "any config key as key=value (applied last)");
  }

  ExperimentConfig build(CLI::App* app) const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (config_path.empty()) c.threads = default_thread_count();
    auto given = [&](const char* name) { return app->count(name) > 0; };
    if (given("--problem")) c.set("problem", problem);
    if (given("--mode")) c.set("mode", mode);
    if (given("--rule")) c.set("rule", rule);
    if (given("--nmax")) c.nmax = nmax;
    if (given("--pointsmax")) c.pointsmax = pointsmax;
    if (given("--K")) c.K = K;
    if (given("--alpha")) c.alpha = alpha;
    if (given("--tau-exponent")) c.tau_exponent = tau_exponent;
    if (given("--r")) c.r = r;
    if (given("--work-balanced")) c.work_balanced = work_balanced;
    if (given("--accounting")) c.set("accounting", accounting);
    if (given("--reference")) c.reference = reference;
    if (given("--J")) c.J = static_cast<Dimension>(J);
    if (given("--mesh-n")) c.mesh_n = mesh_n;
    if (given("--qoi")) c.set("qoi", qoi);
    if (given("--constant")) c.constant = constant;
    if (given("--tag")) c.tag = tag;
    if (given("--threads")) c.threads = threads;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
  }
};

ExperimentConfig base_config(const std::string& path) {
  if (path.empty()) {
    ExperimentConfig c;
    c.threads = default_thread_count();
    return c;
  }
  return ExperimentConfig::load(path);
}

int validate_rules(const std::vector<std::string>& names, bool boundedness, int n_max, const std::string& out) {
  std::ostringstream os;
  if (boundedness) {
    os << "family,level,n,abs_value\n";
    for (const auto& fam : families_from(names)) {
      for (int l = 0; l <= fam.max_level(); ++l) {
        const auto q = quadrature_of_hermite(fam, l, n_max);
        for (int n = 0; n <= n_max; ++n) {
          os << fam.name() << ',' << l << ',' << n << ',' << format_double(std::abs(q[n])) << '\n';
        }
      }
    }
  } else {
    os << "family,level,k,node,weight\n";
    for (const auto& fam : families_from(names)) {
      for (int l = 0; l <= fam.max_level(); ++l) {
        const auto& q = level_nodes(fam, l);
        for (std::size_t k = 0; k < q.count(); ++k) {
          os << fam.name() << ',' << l << ',' << k << ',' << format_double(q.nodes[k]) << ','
             << format_double(q.weights[k]) << '\n';
        }
      }
    }
  }
  emit(out, os.str());
  return 0;
}

std::string points_csv(const IndexSet& set, RuleFamily family) {
  std::ostringstream os;
  os << "point-key,coordinates,weight-sum\n";
  for (const auto& wp : sparse_grid_points(set, family)) {
    os << key_to_string(wp.point.key) << ',';
    for (std::size_t i = 0; i < wp.point.coords.size(); ++i) {
      if (i) os << ' ';
      os << wp.point.coords[i].dimension << ':' << format_double(wp.point.coords[i].value);
    }
    os << ',' << format_double(wp.weight) << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension-adaptive sparse quadrature for Gaussian parameters"};
  app.require_subcommand(1);

  auto* vr = app.add_subcommand("validate-rules", "Dump node/weight tables or the H_n boundedness scan");
  std::vector<std::string> vr_families;
  bool vr_bounded = false;
  int vr_nmax = 150;
  std::string vr_out, vr_config;
  vr->add_option("config,--config", vr_config, "key=value file (families, boundedness, n_max, output_csv)");
  vr->add_option("--family", vr_families, "restrict to these families");
  vr->add_flag("--boundedness", vr_bounded, "emit |Q_l(H_n)| instead of nodes");
  vr->add_option("--n-max", vr_nmax, "largest n for --boundedness")->check(CLI::Range(0, 150));
  vr->add_option("-o,--output", vr_out, "output file (default stdout)");

  auto* run = app.add_subcommand("run", "Run one construction and emit the per-step CSV");
  RunFlags run_flags;
  run_flags.attach(run);
  std::string run_out, dump_indices, dump_points;
  run->add_option("-o,--output", run_out, "per-step CSV (default stdout)");
  run->add_option("--dump-indices", dump_indices, "write the final index set");
  run->add_option("--dump-points", dump_points, "write the sparse grid with combined weights");

  auto* mc = app.add_subcommand("mc", "Plain Monte Carlo baseline");
  std::string mc_config, mc_problem, mc_reference, mc_out;
  double mc_alpha = 2.0;
  std::vector<std::size_t> mc_samples;
  std::size_t mc_trials = 20, mc_J = 0, mc_mesh = 1024;
  std::uint64_t mc_seed = 1;
  unsigned mc_threads = 1;
  mc->add_option("config,--config", mc_config, "key=value file (problem, alpha, J, samples, trials, seed, output_csv)");
  mc->add_option("--problem", mc_problem, "example1 | pde");
  mc->add_option("--alpha", mc_alpha);
  mc->add_option("--samples", mc_samples, "sample sizes M");
  mc->add_option("--trials", mc_trials);
  mc->add_option("--seed", mc_seed);
  mc->add_option("--J", mc_J, "number of parameters");
  mc->add_option("--mesh-n", mc_mesh);
  mc->add_option("--reference", mc_reference, "analytic | file:<path> | value:<x>");
  mc->add_option("--threads", mc_threads);
  mc->add_option("-o,--output", mc_out);

  auto* report = app.add_subcommand("report", "Fit slopes of convergence CSVs and plot them");
  std::vector<std::string> rep_inputs;
  std::string rep_axis = "indices", rep_svg, rep_title;
  double rep_lo = 100.0, rep_hi = 0.0;
  report->add_option("inputs", rep_inputs, "convergence CSV files")->required();
  report->add_option("--axis", rep_axis, "indices | points_lambda | points_union");
  report->add_option("--window-lo", rep_lo);
  report->add_option("--window-hi", rep_hi);
  report->add_option("--svg", rep_svg, "write a log-log plot");
  report->add_option("--title", rep_title);

  auto* mkref = app.add_subcommand("make-reference", "A-posteriori GK reference over Lambda u N(Lambda)");
  RunFlags ref_flags;
  ref_flags.attach(mkref);
  std::string ref_out;
  mkref->add_option("-o,--output", ref_out, "reference file (default: reference_out from the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*vr) {
      const auto c = base_config(vr_config);
      auto given = [&](const char* name) { return vr->count(name) > 0; };
      return validate_rules(given("--family") ? vr_families : c.families, given("--boundedness") || c.boundedness,
                            given("--n-max") ? vr_nmax : c.n_max, given("--output") ? vr_out : c.output_csv);
    }

    if (*run) {
      const auto config = run_flags.build(run);
      int status = 0;
      ExperimentResult result;
      try {
        result = run_experiment(config);
      } catch (const DriverError& e) {
        emit(run_out, trace_csv(e.trace(), resolve_reference(config)));
        std::cerr << "error: " << e.what() << '\n';
        return 2;
      }
      // a config that names its own outputs keeps stdout quiet
      if (!run_out.empty() || (config.output_csv.empty() && config.trace_csv.empty() && config.levels_csv.empty())) {
        emit(run_out, trace_csv(result.driver.trace, result.reference));
      }
      if (!dump_indices.empty()) {
        std::ostringstream os;
        result.driver.set.write(os);
        emit(dump_indices, os.str());
      }
      if (!dump_points.empty()) emit(dump_points, points_csv(result.driver.set, config.rule));
      std::cerr << "stop=" << to_string(result.driver.trace.stop) << " indices=" << result.driver.set.size()
                << " evaluations=" << result.driver.evaluations;
      if (result.slope) std::cerr << " slope=" << *result.slope;
      std::cerr << '\n';
      return status;
    }

    if (*mc) {
      auto c = base_config(mc_config);
      auto given = [&](const char* name) { return mc->count(name) > 0; };
      if (given("--problem")) c.set("problem", mc_problem);
      if (given("--alpha")) c.alpha = mc_alpha;
      if (given("--J")) c.J = static_cast<Dimension>(mc_J);
      if (given("--mesh-n")) c.mesh_n = mc_mesh;
      if (given("--reference")) c.reference = mc_reference;
      if (given("--samples")) c.samples = mc_samples;
      if (given("--trials")) c.trials = mc_trials;
      if (given("--seed")) c.seed = mc_seed;
      if (given("--threads")) c.threads = mc_threads;
      if (given("--output")) c.output_csv = mc_out;
      const double reference = resolve_reference(c);
      const auto f = make_integrand(c);
      std::ostringstream os;
      os << "trial,M,estimate,abs_error\n";
      for (std::size_t m : c.samples) {
        const auto r = mc_estimate(f, problem_dimensions(c), m, c.trials, c.seed, reference, c.threads);
        for (std::size_t t = 0; t < c.trials; ++t) {
          os << t << ',' << m << ',' << format_double(r.estimates[t]) << ',' << format_double(r.errors[t]) << '\n';
        }
      }
      emit(c.output_csv, os.str());
      return 0;
    }

    if (*report) {
      const XAxis axis = parse_axis(rep_axis);
      std::vector<PlotSeries> series;
      int status = 0;
      for (const auto& path : rep_inputs) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open '" + path + "'");
        const auto record = parse_record_csv(in);
        PlotSeries s;
        s.name = path;
        for (const auto& c : record.checkpoints) {
          s.x.push_back(axis == XAxis::Indices        ? static_cast<double>(c.n_indices)
                        : axis == XAxis::PointsLambda ? static_cast<double>(c.n_points_lambda)
                                                      : static_cast<double>(c.n_points_union));
          s.y.push_back(c.abs_error);
        }
        series.push_back(std::move(s));
        try {
          std::cout << path << ",slope=" << format_double(fit_slope(record, axis, rep_lo, rep_hi)) << '\n';
        } catch (const FitError& e) {
          std::cout << path << ",slope=nan\n";
          std::cerr << "error: " << path << ": " << e.what() << '\n';
          status = 1;
        }
      }
      if (!rep_svg.empty()) write_file_atomic(rep_svg, loglog_svg(series, rep_title, rep_axis, "error"));
      return status;
    }

    if (*mkref) {
      auto config = ref_flags.build(mkref);
      const std::string path = ref_out.empty() ? config.reference_out : ref_out;
      if (path.empty()) throw ConfigError("make-reference needs -o or reference_out in the config");
      const auto ref = make_reference(config);
      write_reference(path, ref);
      std::cout << format_double(ref.value) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
