#include "spq/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "spq/parallel.hpp"

namespace spq {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Accepts a JSON scalar or a bare word and returns its text form.
std::string scalar_text(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) return v;
  try {
    const auto j = nlohmann::json::parse(v);
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
    if (j.is_number_float()) return format_double(j.get<double>());
    throw ConfigError("config values must be scalars, got '" + v + "'");
  } catch (const nlohmann::json::parse_error&) {
    return v;
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw ConfigError("config key '" + key + "' expects a nonnegative integer");
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

double axis_value(const Checkpoint& c, XAxis axis) {
  switch (axis) {
    case XAxis::Indices:
      return static_cast<double>(c.n_indices);
    case XAxis::PointsLambda:
      return static_cast<double>(c.n_points_lambda);
    case XAxis::PointsUnion:
      return static_cast<double>(c.n_points_union);
  }
  return 0.0;
}

}  // namespace

XAxis parse_axis(const std::string& text) {
  if (text == "indices") return XAxis::Indices;
  if (text == "points_lambda" || text == "points") return XAxis::PointsLambda;
  if (text == "points_union") return XAxis::PointsUnion;
  throw ConfigError("unknown x axis '" + text + "' (indices, points_lambda, points_union)");
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = scalar_text(raw);
  if (key == "problem") {
    if (v != "example1" && v != "pde" && v != "constant") throw ConfigError("unknown problem '" + v + "'");
    problem = v;
  } else if (key == "alpha") {
    alpha = to_double(key, v);
  } else if (key == "J") {
    J = static_cast<Dimension>(to_size(key, v));
  } else if (key == "mesh_n") {
    mesh_n = to_size(key, v);
  } else if (key == "qoi") {
    if (v == "f1" || v == "0") qoi = 0;
    else if (v == "f2" || v == "1") qoi = 1;
    else throw ConfigError("qoi must be f1 or f2");
  } else if (key == "constant") {
    constant = to_double(key, v);
  } else if (key == "mode") {
    if (v == "apriori") mode = DriverMode::Apriori;
    else if (v == "aposteriori") mode = DriverMode::Aposteriori;
    else throw ConfigError("mode must be apriori or aposteriori");
  } else if (key == "rule") {
    try {
      rule = RuleFamily::parse(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "nmax") {
    nmax = to_size(key, v);
  } else if (key == "pointsmax") {
    pointsmax = to_size(key, v);
  } else if (key == "K") {
    K = static_cast<unsigned>(to_size(key, v));
  } else if (key == "tau_exponent") {
    tau_exponent = to_double(key, v);
  } else if (key == "r") {
    r = static_cast<int>(to_size(key, v));
  } else if (key == "work_balanced") {
    work_balanced = to_bool(key, v);
  } else if (key == "accounting") {
    if (v == "lambda") accounting = Accounting::Lambda;
    else if (v == "union") accounting = Accounting::Union;
    else throw ConfigError("accounting must be lambda or union");
  } else if (key == "reference") {
    reference = v;
  } else if (key == "output_csv") {
    output_csv = v;
  } else if (key == "output_svg") {
    output_svg = v;
  } else if (key == "trace_csv") {
    trace_csv = v;
  } else if (key == "tag") {
    tag = v;
  } else if (key == "x_axis") {
    x_axis = parse_axis(v);
  } else if (key == "window_lo") {
    window_lo = to_double(key, v);
  } else if (key == "window_hi") {
    window_hi = to_double(key, v);
  } else if (key == "levels_csv") {
    levels_csv = v;
  } else if (key == "reference_out") {
    reference_out = v;
  } else if (key == "samples") {
    // space or comma separated list
    std::vector<std::size_t> list;
    std::string item;
    std::istringstream in(v);
    while (in >> item) {
      std::istringstream parts(item);
      std::string part;
      while (std::getline(parts, part, ',')) {
        if (!part.empty()) list.push_back(to_size(key, part));
      }
    }
    if (list.empty()) throw ConfigError("samples needs at least one sample size");
    samples = list;
  } else if (key == "trials") {
    trials = to_size(key, v);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_size(key, v));
  } else if (key == "families") {
    std::vector<std::string> list;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        RuleFamily::parse(item);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      list.push_back(item);
    }
    families = list;
  } else if (key == "boundedness") {
    boundedness = to_bool(key, v);
  } else if (key == "n_max") {
    n_max = static_cast<int>(to_size(key, v));
    if (n_max > 150) throw ConfigError("n_max must be at most 150");
  } else if (key == "threads") {
    threads = static_cast<unsigned>(to_size(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& is) {
  ExperimentConfig config;
  config.threads = default_thread_count();
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    config.set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

Dimension problem_dimensions(const ExperimentConfig& config) {
  if (config.J > 0) return config.J;
  if (config.problem == "example1") return 10000;
  if (config.problem == "pde") return static_cast<Dimension>(config.mesh_n - 1);
  return 100;
}

Integrand make_integrand(const ExperimentConfig& config) {
  if (config.problem == "example1") return Example1Problem{config.alpha, problem_dimensions(config)}.integrand();
  if (config.problem == "pde") {
    LognormalPDEProblem pde;
    pde.alpha = config.alpha;
    pde.mesh_n = config.mesh_n;
    pde.J = problem_dimensions(config);
    return pde.integrand(config.qoi);
  }
  const double c = config.constant;
  return Integrand::scalar([c](const GridPoint&) { return c; });
}

DriverConfig make_driver_config(const ExperimentConfig& config) {
  DriverConfig d;
  d.mode = config.mode;
  d.family = config.rule;
  d.n_max = config.nmax;
  d.points_max = config.pointsmax;
  d.K = config.K;
  d.work_balanced = config.work_balanced;
  d.max_dimension = problem_dimensions(config);
  d.threads = config.threads > 0 ? config.threads : default_thread_count();
  if (config.accounting == Accounting::Union) {
    d.track_union = true;
    d.budget = PointBudget::Union;
  }
  const double exponent =
      config.tau_exponent.value_or(config.problem == "pde" ? config.alpha - 1.0 : config.alpha - 0.5);
  d.tau = TauSequence::power(exponent, config.r.value_or(default_derivative_order(config.alpha)));
  return d;
}

double resolve_reference(const ExperimentConfig& config) {
  const std::string& policy = config.reference;
  if (policy == "analytic") {
    if (config.problem == "example1") return example1_reference(config.alpha, problem_dimensions(config));
    if (config.problem == "constant") return config.constant;
    throw ConfigError("problem '" + config.problem + "' has no analytic reference; use file:<path> or value:<x>");
  }
  if (policy.rfind("value:", 0) == 0) return to_double("reference", policy.substr(6));
  if (policy.rfind("file:", 0) == 0) {
    try {
      return read_reference(policy.substr(5)).value;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot resolve reference: ") + e.what());
    }
  }
  if (policy == "none") return std::numeric_limits<double>::quiet_NaN();
  throw ConfigError("unknown reference policy '" + policy + "'");
}

ConvergenceRecord make_record(const RunTrace& trace, double reference, Accounting accounting, std::size_t output) {
  ConvergenceRecord record;
  double growth = 1.0;
  std::size_t target = 1;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const bool last = i + 1 == trace.steps.size();
    if (s.indices < target && !last) continue;
    while (static_cast<double>(target) <= static_cast<double>(s.indices)) {
      growth *= 1.25;
      target = static_cast<std::size_t>(std::ceil(growth));
    }
    Checkpoint c;
    if (accounting == Accounting::Union) {
      if (s.union_estimate.empty()) throw ConfigError("union accounting requires neighbor differences in the trace");
      c.n_indices = s.indices + s.neighbors;
      c.estimate = s.union_estimate[output];
    } else {
      c.n_indices = s.indices;
      c.estimate = s.estimate[output];
    }
    c.n_points_lambda = s.points_lambda;
    c.n_points_union = s.points_union;
    c.abs_error = std::abs(c.estimate - reference);
    if (!record.checkpoints.empty() && c.n_indices <= record.checkpoints.back().n_indices) continue;
    record.checkpoints.push_back(c);
  }
  return record;
}

double fit_slope(const ConvergenceRecord& record, XAxis axis, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& c : record.checkpoints) {
    const double x = axis_value(c, axis);
    if (x < lo || (hi > 0 && x > hi) || !(c.abs_error > 0.0) || !(x > 0.0)) continue;
    const double lx = std::log(x);
    const double ly = std::log(c.abs_error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 4) throw FitError("slope fit needs at least 4 checkpoints in the window, found " + std::to_string(n));
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom <= 0.0) throw FitError("slope fit window has no spread in x");
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  return -slope;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const double reference = resolve_reference(config);
  const auto driver_config = make_driver_config(config);
  const auto f = make_integrand(config);

  ExperimentResult result;
  result.reference = reference;
  try {
    result.driver = run_driver(driver_config, f);
  } catch (const DriverError& e) {
    if (!config.trace_csv.empty()) write_file_atomic(config.trace_csv, trace_csv(e.trace(), reference));
    throw;
  }
  result.record = make_record(result.driver.trace, reference, config.accounting);
  try {
    result.slope = fit_slope(result.record, config.x_axis, config.window_lo, config.window_hi);
  } catch (const FitError&) {
    result.slope.reset();
  }

  if (!config.trace_csv.empty()) write_file_atomic(config.trace_csv, trace_csv(result.driver.trace, reference));
  if (!config.output_csv.empty()) write_file_atomic(config.output_csv, record_csv(result.record));
  if (!config.levels_csv.empty()) write_file_atomic(config.levels_csv, levels_csv(result.driver));
  if (!config.output_svg.empty()) {
    PlotSeries s;
    s.name = config.tag.empty() ? std::string(config.rule.name()) : config.tag;
    for (const auto& c : result.record.checkpoints) {
      s.x.push_back(axis_value(c, config.x_axis));
      s.y.push_back(c.abs_error);
    }
    const char* label = config.x_axis == XAxis::Indices ? "indices" : "points";
    write_file_atomic(config.output_svg, loglog_svg({s}, config.tag, label, "error"));
  }
  return result;
}

std::string levels_csv(const DriverResult& result) {
  std::vector<int> top;
  auto visit = [&](const MultiIndex& nu) {
    for (const auto& e : nu.support()) {
      if (top.size() < e.dimension) top.resize(e.dimension, 0);
      top[e.dimension - 1] = std::max(top[e.dimension - 1], e.level);
    }
  };
  for (const auto& nu : result.set.order()) visit(nu);
  for (const auto& nu : result.neighbors) visit(nu);
  std::ostringstream os;
  os << "dimension,max_level\n";
  for (std::size_t j = 0; j < top.size(); ++j) os << j + 1 << ',' << top[j] << '\n';
  return os.str();
}

Reference make_reference(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.mode = DriverMode::Aposteriori;
  c.rule = RuleFamily(RuleTag::GK);
  c.accounting = Accounting::Union;
  const auto driver = run_driver(make_driver_config(c), make_integrand(c));
  const auto& last = driver.trace.steps.back();
  Reference ref;
  ref.value = last.union_estimate.at(0);
  ref.trace_hash = fnv1a(trace_csv(driver.trace, std::nullopt));
  ref.points = last.points_union;
  ref.indices = last.indices;
  return ref;
}

void write_reference(const std::string& path, const Reference& ref) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ref.trace_hash));
  std::ostringstream os;
  os << "value=" << format_double(ref.value) << '\n'
     << "trace_hash=" << hash << '\n'
     << "points=" << ref.points << '\n'
     << "indices=" << ref.indices << '\n';
  write_file_atomic(path, os.str());
}

Reference read_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference file '" + path + "'");
  Reference ref;
  bool have_value = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "value") {
      ref.value = to_double(key, val);
      have_value = true;
    } else if (key == "trace_hash") {
      ref.trace_hash = std::stoull(val, nullptr, 16);
    } else if (key == "points") {
      ref.points = to_size(key, val);
    } else if (key == "indices") {
      ref.indices = to_size(key, val);
    }
  }
  if (!have_value) throw ConfigError("reference file '" + path + "' has no value");
  return ref;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trace_csv(const RunTrace& trace, std::optional<double> reference, std::size_t output) {
  std::ostringstream os;
  os << "N,indices,points_lambda,points_union,estimate,indicator,error_vs_reference\n";
  for (const auto& s : trace.steps) {
    os << s.step << ',' << s.indices << ',' << s.points_lambda << ',' << s.points_union << ','
       << format_double(s.estimate[output]) << ',' << (std::isnan(s.indicator) ? "" : format_double(s.indicator)) << ',';
    if (reference && !std::isnan(*reference)) os << format_double(std::abs(s.estimate[output] - *reference));
    os << '\n';
  }
  return os.str();
}

std::string record_csv(const ConvergenceRecord& record) {
  std::ostringstream os;
  os << "N_indices,N_points_lambda,N_points_union,estimate,abs_error\n";
  for (const auto& c : record.checkpoints) {
    os << c.n_indices << ',' << c.n_points_lambda << ',' << c.n_points_union << ',' << format_double(c.estimate)
       << ',' << format_double(c.abs_error) << '\n';
  }
  return os.str();
}

ConvergenceRecord parse_record_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "N_indices,N_points_lambda,N_points_union,estimate,abs_error") {
    throw ConfigError("convergence CSV has an unexpected header");
  }
  ConvergenceRecord record;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw ConfigError("malformed convergence CSV row '" + line + "'");
    Checkpoint c;
    c.n_indices = to_size("N_indices", fields[0]);
    c.n_points_lambda = to_size("N_points_lambda", fields[1]);
    c.n_points_union = to_size("N_points_union", fields[2]);
    c.estimate = to_double("estimate", fields[3]);
    c.abs_error = to_double("abs_error", trim(fields[4]));
    record.checkpoints.push_back(c);
  }
  return record;
}

std::string loglog_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double width = 640, height = 480, left = 70, right = 150, top = 40, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  for (int d = static_cast<int>(xmin); d <= static_cast<int>(xmax); ++d) {
    os << "<line x1=\"" << px(d) << "\" y1=\"" << top << "\" x2=\"" << px(d) << "\" y2=\"" << top + ph
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << px(d) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
    os << "<line x1=\"" << left << "\" y1=\"" << py(d) << "\" x2=\"" << left + pw << "\" y2=\"" << py(d)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"15\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
     << top + ph / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (!(series[k].x[i] > 0) || !(series[k].y[i] > 0)) continue;
      os << px(std::log10(series[k].x[i])) << ',' << py(std::log10(series[k].y[i])) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 15 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 35 << "\" y=\"" << ly + 4 << "\">" << series[k].name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace spq
