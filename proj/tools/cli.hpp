#pragma once

// Command-line front end: potential files, CSV tables, run manifests.

#include "scatter/potentials.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatter::cli {

inline constexpr const char* tool_version = "1.0.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int mismatch = 1;  // compare found differences above tolerance
inline constexpr int bad_input = 2;
inline constexpr int solver = 3;
}  // namespace exit_code

/// Failure carrying the process exit code.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

/// Exit code for a failed inversion stage (10..19).
int stage_exit_code(const std::string& stage);
const std::vector<std::string>& stage_names();

/// Parses a potential description; syntax errors report line and column.
Potential parse_potential(const std::string& text, const std::string& origin = "<string>");
Potential load_potential(const std::string& path);

std::string read_file(const std::string& path);

/// "a,b,c" or "start:stop:step" (stop included when hit within rounding).
std::vector<double> parse_grid(const std::string& text);

struct Table {
  std::vector<std::string> meta;  // written as "# " lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& row);
  void add_text(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::size_t column(const std::string& name) const;  // throws CliError(bad_input)
  bool has_column(const std::string& name) const;
  double number(std::size_t row, std::size_t col) const;
  std::vector<double> numbers(const std::string& name) const;
  std::string to_string() const;
};

std::string format_double(double x);
Table parse_table(const std::string& text, const std::string& origin);
Table load_table(const std::string& path);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& contents);

std::string sha256_hex(const std::string& data);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::string tool_version = cli::tool_version;

  std::string to_json() const;
};

/// Collects outputs and stage timings for one run.
class Run {
 public:
  Run(std::string command, std::string out_dir);

  /// Digest input: argument text or file contents.
  void add_input(const std::string& data);
  void write(const std::string& name, const Table& t);
  void write_text(const std::string& name, const std::string& contents);
  /// Runs fn and records its wall time.
  void stage(const std::string& name, const std::function<void()>& fn);
  /// Writes manifest.json; returns its path.
  std::string finish();
  const RunManifest& manifest() const { return manifest_; }

 private:
  std::string out_dir_;
  std::string digest_input_;
  RunManifest manifest_;
};

/// Worker count from SCATTER_THREADS (default: hardware concurrency).
unsigned worker_count();
/// Calls fn(i) for i in [0, n) on the worker pool; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Full command line; returns the process exit code.
int run(int argc, char** argv);

}  // namespace scatter::cli
