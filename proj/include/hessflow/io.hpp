#pragma once

// Run configuration (INI text), the built-in expression catalog, binary
// field snapshots, monitor CSV files, SVG reports and the command layer
// shared by the CLI and the Python module.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hessflow/cone_geometry.hpp"
#include "hessflow/flow.hpp"
#include "hessflow/monitors.hpp"

namespace hessflow::io {

/// Configuration error with the 1-based line it refers to (0 when none).
class ConfigError : public InvalidConfiguration {
 public:
  ConfigError(const std::string& what, int line)
      : InvalidConfiguration(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct IniValue {
  std::string text;
  int line = 0;
};

/// Sections of `key = value` lines. '#' and ';' start comments.
struct IniDocument {
  std::map<std::string, std::map<std::string, IniValue>> sections;
  std::map<std::string, int> section_lines;

  bool has(const std::string& section) const { return sections.count(section) > 0; }
  const IniValue* find(const std::string& section, const std::string& key) const;
};

IniDocument parse_ini(const std::string& text);

/// Catalog expressions:
///   constant(c)  affine(c, [a..])  quadratic(c, [a..])
///   sin_product(amp, [k..], rate)  cos_product(amp, [k..], rate)
///   gaussian(amp, width, [center..])  time_linear(rate)
///   random_modes(count, amp, kmax)  sum(e1, e2, ..)
/// A bare number is a constant. Numbers accept a trailing "pi" factor
/// ("pi", "2pi", "0.5pi"). random_modes draws from `seed`.
ExprPtr parse_expression(const std::string& text, std::uint64_t seed = 0);

struct StructureSettings {
  int budget = 10000;
  double band_lo = 0.5;
  double band_hi = 2.0;
};

struct CertifySettings {
  bool concavity = true;
  bool parabolic = true;
  std::vector<std::vector<double>> K{{1.0, 1.0}};
  double beta = 0.1;
  double sigma = 0.0;
  double slack = 1.0;  // q of the lifted points (K, q)
  double eps = 0.05;
  double eta = 1.0;
  int budget = 100000;
};

struct SubsolutionSettings {
  std::optional<double> safety;  // linear construction when set
  ExprPtr expression;            // explicit candidate otherwise
  double delta = 0.0;
  int times = 33;
};

struct OutputSettings {
  int snapshot_every = 0;  // 0: first and last only
};

struct RunConfig {
  IniDocument document;
  std::uint64_t seed = 20240611;
  std::optional<OperatorSpec> op;
  std::optional<ProblemSpec> problem;
  StructureSettings structure;
  CertifySettings certify;
  std::optional<SubsolutionSettings> subsolution;
  MonitorOptions monitors;
  double monitor_safety = -1.0;  // builds a linear subsolution for the rows when >= 0
  SteadyOptions steady;
  OutputSettings output;
  std::string report_csv;
};

/// Parses and validates. Unknown keys, missing keys and an inadmissible
/// phi_b raise ConfigError with the offending line. `seed_override`
/// replaces [run] seed.
RunConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override = {});
RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = {});

// Snapshot files: "HFLD", u32 version, u32 n, u32 shape[n], f64 spacing[n],
// u32 topology, f64 time, then prod(shape) f64 values, all little-endian.
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::string encode_snapshot(const ScalarField& field);
ScalarField decode_snapshot(const std::string& bytes);
void write_snapshot(const std::string& path, const ScalarField& field);
ScalarField read_snapshot(const std::string& path);

inline constexpr const char* kMonitorHeader = "t,supU,supGradU,supHessU,supUt,W,slack";

/// One line per row at 17 significant digits; absent W/slack stay empty.
std::string format_monitor_csv(const std::vector<MonitorRow>& rows);
void write_monitor_csv(const std::string& path, const std::vector<MonitorRow>& rows);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

CsvTable parse_csv(const std::string& text);

/// One line chart per column against the first column.
std::string render_svg_report(const CsvTable& table);

struct Command {
  std::string name;  // check-operator | certify-cones | verify-subsolution | solve | steady | report
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool quiet = false;
};

enum ExitCode { kSuccess = 0, kValidationError = 1, kRunFailure = 2, kCertificationViolation = 3 };

/// Runs one command; text output goes to `out`, diagnostics to `err`.
int run_command(const Command& cmd, std::ostream& out, std::ostream& err);

/// Same with the configuration given as text.
int run_command_text(const Command& cmd, const std::string& config_text, std::ostream& out,
                     std::ostream& err);

}  // namespace hessflow::io
