#include "cli.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace scatter::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "input",                   // 10
      "line inversion",          // 11
      "discontinuity detection", // 12
      "piecewise reconstruction",// 13
      "fixed-energy inversion",  // 14
      "low-k completion",        // 15
      "fixed-l inversion",       // 16
      "stitch",                  // 17
      "born extension",          // 18
      "born inversion",          // 19
  };
  return names;
}

int stage_exit_code(const std::string& stage) {
  const auto& names = stage_names();
  if (stage == "table") return 10;
  const auto it = std::find(names.begin(), names.end(), stage);
  if (it == names.end()) return 19;
  return 10 + static_cast<int>(it - names.begin());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(exit_code::bad_input, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// potential files

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double field(const json& j, const char* key, const std::string& origin) {
  if (!j.contains(key)) throw CliError(exit_code::bad_input, origin + ": missing field \"" + key + "\"");
  if (!j[key].is_number()) throw CliError(exit_code::bad_input, origin + ": field \"" + key + "\" must be a number");
  return j[key].get<double>();
}

double field_or(const json& j, const char* key, double fallback, const std::string& origin) {
  return j.contains(key) ? field(j, key, origin) : fallback;
}

std::vector<double> array(const json& j, const char* key, const std::string& origin) {
  if (!j.contains(key) || !j[key].is_array())
    throw CliError(exit_code::bad_input, origin + ": field \"" + key + "\" must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j[key]) {
    if (!x.is_number())
      throw CliError(exit_code::bad_input, origin + ": field \"" + key + "\" must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

Potential build(const json& j, const std::string& origin) {
  if (!j.is_object()) throw CliError(exit_code::bad_input, origin + ": expected an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw CliError(exit_code::bad_input, origin + ": missing string field \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "zero") return zero_potential();
  if (kind == "piecewise") {
    auto br = array(j, "breakpoints", origin);
    auto vals = array(j, "values", origin);
    // an explicit exterior value of 0 is allowed
    if (vals.size() == br.size() + 1) {
      if (vals.back() != 0.0)
        throw CliError(exit_code::bad_input, origin + ": piecewise potential must vanish beyond the last breakpoint");
      vals.pop_back();
    }
    return piecewise(std::move(br), std::move(vals));
  }
  if (kind == "square_well") return square_well(field(j, "V0", origin), field(j, "a", origin));
  if (kind == "exponential") return exponential(field(j, "A", origin), field_or(j, "mu", 1.0, origin));
  if (kind == "gaussian") return gaussian(field(j, "A", origin), field_or(j, "sigma", 1.0, origin));
  if (kind == "bargmann")
    return bargmann_transparent(field_or(j, "kappa", 1.0, origin), field_or(j, "c", 1.0, origin));
  if (kind == "tabulated") {
    std::vector<double> r, V;
    if (j.contains("samples")) {
      if (!j["samples"].is_array())
        throw CliError(exit_code::bad_input, origin + ": \"samples\" must be an array of [r, V] pairs");
      for (const auto& s : j["samples"]) {
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
          throw CliError(exit_code::bad_input, origin + ": \"samples\" must be an array of [r, V] pairs");
        r.push_back(s[0].get<double>());
        V.push_back(s[1].get<double>());
      }
    } else {
      r = array(j, "r", origin);
      V = array(j, "V", origin);
    }
    return tabulated(std::move(r), std::move(V));
  }
  throw CliError(exit_code::bad_input, origin + ": unknown potential kind \"" + kind + "\"");
}

}  // namespace

Potential parse_potential(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": syntax error at line " << line << ", column " << col;
    throw CliError(exit_code::bad_input, os.str());
  }
  try {
    return build(j, origin);
  } catch (const DomainError& e) {
    throw CliError(exit_code::bad_input, origin + ": " + e.what());
  }
}

Potential load_potential(const std::string& path) { return parse_potential(read_file(path), path); }

// ---------------------------------------------------------------------------
// grids and tables

namespace {

double to_double(std::string_view s, const std::string& what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan" || s == "-nan") return std::nan("");
    throw CliError(exit_code::bad_input, what + ": not a number: \"" + std::string(s) + "\"");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw CliError(exit_code::bad_input, "grid must be start:stop:step, got " + text);
    const double a = to_double(parts[0], "grid"), b = to_double(parts[1], "grid"), h = to_double(parts[2], "grid");
    if (!(h > 0) || !(b >= a)) throw CliError(exit_code::bad_input, "grid needs step > 0 and stop >= start: " + text);
    const auto n = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = a + static_cast<double>(i) * h;
    return g;
  }
  std::vector<double> g;
  for (const auto& p : split(text, ','))
    if (!trim(p).empty()) g.push_back(to_double(p, "list"));
  if (g.empty()) throw CliError(exit_code::bad_input, "empty list: " + text);
  return g;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void Table::add(const std::vector<double>& row) {
  std::vector<std::string> r;
  r.reserve(row.size());
  for (double x : row) r.push_back(format_double(x));
  rows.push_back(std::move(r));
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw CliError(exit_code::bad_input, "table has no column \"" + name + "\"");
  return static_cast<std::size_t>(it - header.begin());
}

double Table::number(std::size_t row, std::size_t col) const {
  return to_double(rows.at(row).at(col), "row " + std::to_string(row + 1) + ", column " + header.at(col));
}

std::vector<double> Table::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = number(i, c);
  return v;
}

std::string Table::to_string() const {
  std::string s;
  for (const auto& m : meta) s += "# " + m + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += "\n";
  }
  return s;
}

Table parse_table(const std::string& text, const std::string& origin) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.meta.push_back(trim(line.substr(1)));
      continue;
    }
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw CliError(exit_code::bad_input, origin + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(t.header.size()) + " fields, found " +
                                               std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw CliError(exit_code::bad_input, origin + ": no header line");
  return t;
}

Table load_table(const std::string& path) { return parse_table(read_file(path), path); }

void write_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError(exit_code::bad_input, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw CliError(exit_code::bad_input, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw CliError(exit_code::bad_input, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

// ---------------------------------------------------------------------------
// manifest

std::string RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["outputs"] = outputs;
  json t = json::array();
  for (const auto& [name, sec] : timings) t.push_back({{"stage", name}, {"seconds", sec}});
  j["timings"] = t;
  j["tool_version"] = tool_version;
  return j.dump(2) + "\n";
}

Run::Run(std::string command, std::string out_dir) : out_dir_(std::move(out_dir)) {
  manifest_.command = std::move(command);
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw CliError(exit_code::bad_input, "cannot create output directory " + out_dir_ + ": " + ec.message());
}

void Run::add_input(const std::string& data) {
  // length prefix keeps the concatenation unambiguous
  digest_input_ += std::to_string(data.size()) + ":" + data;
}

void Run::write(const std::string& name, const Table& t) { write_text(name, t.to_string()); }

void Run::write_text(const std::string& name, const std::string& contents) {
  const std::string path = (fs::path(out_dir_) / name).string();
  write_atomic(path, contents);
  manifest_.outputs.push_back(path);
}

void Run::stage(const std::string& name, const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  manifest_.timings.emplace_back(name, dt.count());
}

std::string Run::finish() {
  manifest_.config_digest = sha256_hex(digest_input_);
  const std::string path = (fs::path(out_dir_) / "manifest.json").string();
  manifest_.outputs.push_back(path);
  write_atomic(path, manifest_.to_json());
  return path;
}

// ---------------------------------------------------------------------------
// worker pool

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SCATTER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!first) first = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace scatter::cli
