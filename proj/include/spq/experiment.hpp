#ifndef SPQ_EXPERIMENT_HPP
#define SPQ_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spq/construction.hpp"
#include "spq/problems.hpp"

namespace spq {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Accounting { Lambda, Union };
enum class XAxis { Indices, PointsLambda, PointsUnion };

XAxis parse_axis(const std::string& text);

/// Flat key=value experiment description. Values may be written as JSON
/// scalars ("gk", 2, true) or bare words.
struct ExperimentConfig {
  std::string problem = "example1";  // example1 | pde | constant
  double alpha = 2.0;
  Dimension J = 0;  // 0: problem default (10^4 for example1, mesh_n - 1 for pde)
  std::size_t mesh_n = 1024;
  int qoi = 0;  // pde: 0 -> f1, 1 -> f2
  double constant = 1.0;

  DriverMode mode = DriverMode::Aposteriori;
  RuleFamily rule{RuleTag::GK};
  std::size_t nmax = 0;
  std::size_t pointsmax = 100000;
  unsigned K = 1;
  std::optional<double> tau_exponent;  // default alpha - 1/2 (example1), alpha - 1 (pde)
  std::optional<int> r;                // default floor(14 (alpha - 1)) + 1
  bool work_balanced = false;
  Accounting accounting = Accounting::Lambda;

  std::string reference = "analytic";  // analytic | file:<path> | value:<x>
  std::string output_csv;
  std::string output_svg;
  std::string trace_csv;
  std::string tag;
  std::string levels_csv;     // max level per dimension over Lambda u N(Lambda)
  std::string reference_out;  // make-reference output file
  XAxis x_axis = XAxis::Indices;
  double window_lo = 100.0;
  double window_hi = 0.0;  // 0: largest checkpoint
  unsigned threads = 1;

  // mc
  std::vector<std::size_t> samples{100, 1000, 10000};
  std::size_t trials = 20;
  std::uint64_t seed = 1;

  // validate-rules
  std::vector<std::string> families;  // empty: all
  bool boundedness = false;
  int n_max = 150;

  void set(const std::string& key, const std::string& value);
  static ExperimentConfig parse(std::istream& is);
  static ExperimentConfig load(const std::string& path);
};

Dimension problem_dimensions(const ExperimentConfig& config);
Integrand make_integrand(const ExperimentConfig& config);
DriverConfig make_driver_config(const ExperimentConfig& config);

/// Resolves the reference policy before any work is done. Throws
/// ConfigError when it cannot be resolved.
double resolve_reference(const ExperimentConfig& config);

struct Checkpoint {
  std::size_t n_indices = 0;
  std::size_t n_points_lambda = 0;
  std::size_t n_points_union = 0;
  double estimate = 0.0;
  double abs_error = 0.0;
};

struct ConvergenceRecord {
  std::vector<Checkpoint> checkpoints;
};

/// Steps whose |Lambda| hits ceil(1.25^k) plus the final step. With union
/// accounting the estimate is Q over Lambda u N(Lambda) and n_indices is
/// |Lambda| + |N(Lambda)|. Rows not strictly increasing in n_indices are
/// dropped.
ConvergenceRecord make_record(const RunTrace& trace, double reference, Accounting accounting,
                              std::size_t output = 0);

/// s = -(least-squares slope of log error against log x) over the points
/// with lo <= x <= hi (hi <= 0 means no upper bound) and positive error.
double fit_slope(const ConvergenceRecord& record, XAxis axis, double lo, double hi);

struct ExperimentResult {
  ConvergenceRecord record;
  DriverResult driver;
  double reference = 0.0;
  std::optional<double> slope;
};

/// Runs the driver and writes the configured CSV/SVG artifacts.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct Reference {
  double value = 0.0;
  std::uint64_t trace_hash = 0;
  std::size_t points = 0;
  std::size_t indices = 0;
};

/// A-posteriori GK run over Lambda u N(Lambda) up to config.pointsmax points;
/// the reference is the union estimate of the final step.
Reference make_reference(const ExperimentConfig& config);
void write_reference(const std::string& path, const Reference& ref);
Reference read_reference(const std::string& path);

// Output helpers. All numbers use 17 significant digits.
std::string format_double(double x);
std::uint64_t fnv1a(const std::string& text);
std::string trace_csv(const RunTrace& trace, std::optional<double> reference, std::size_t output = 0);
std::string record_csv(const ConvergenceRecord& record);
/// dimension,max_level for j = 1..max active dimension of Lambda u N(Lambda).
std::string levels_csv(const DriverResult& result);
ConvergenceRecord parse_record_csv(std::istream& is);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string loglog_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace spq

#endif  // SPQ_EXPERIMENT_HPP
