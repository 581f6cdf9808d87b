#include "cli.hpp"

#include "scatter/nodal_inverse.hpp"
#include "scatter/nodal_lines.hpp"
#include "scatter/numerics.hpp"
#include "scatter/radial_solver.hpp"
#include "scatter/semiclassical.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace scatter::cli {

namespace {

std::vector<std::string> base_meta(const std::string& command) {
  return {"command: " + command, std::string("tool_version: ") + tool_version};
}

std::string joined(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
  return s;
}

/// Converts anything thrown by fn into a StageError named stage.
template <class F>
auto in_stage(const std::string& stage, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// ---------------------------------------------------------------------------

struct ForwardArgs {
  std::string potential, out = ".", E, k, q, lambda, method = "exact";
  double ell = 0, rmax = 10;
};

void cmd_forward(const ForwardArgs& a, const std::vector<std::string>& argv) {
  const std::string text = read_file(a.potential);
  const Potential pot = parse_potential(text, a.potential);
  Run run("forward", a.out);
  run.add_input(joined(argv));
  run.add_input(text);
  auto meta = base_meta("forward");
  meta.push_back("potential: " + pot.describe());
  meta.push_back("ell: " + format_double(a.ell));
  if (a.E.empty() && a.k.empty() && a.q.empty())
    throw CliError(exit_code::bad_input, "forward: give at least one of --E, --k, --q");

  if (!a.E.empty()) {
    const auto Es = parse_grid(a.E);
    std::vector<std::vector<double>> zeros(Es.size());
    run.stage("zeros", [&] {
      parallel_for(Es.size(), [&](std::size_t i) {
        zeros[i] = integrate_regular(pot, a.ell, Es[i], a.rmax).zeros;
      });
    });
    Table t;
    t.meta = meta;
    t.meta.push_back("rmax: " + format_double(a.rmax));
    t.header = {"E", "n", "r"};
    for (std::size_t i = 0; i < Es.size(); ++i)
      for (std::size_t n = 0; n < zeros[i].size(); ++n) t.add({Es[i], static_cast<double>(n + 1), zeros[i][n]});
    run.write("zeros.csv", t);
  }

  if (!a.k.empty() && a.lambda.empty()) {
    const auto ks = parse_grid(a.k);
    std::vector<std::vector<double>> rows(ks.size());
    run.stage("phase shifts", [&] {
      parallel_for(ks.size(), [&](std::size_t i) {
        const double k = ks[i];
        if (a.method == "exact") {
          const auto s = phase_shift(pot, a.ell, k);
          rows[i] = {a.ell, k, s.delta, s.residual};
        } else if (a.method == "jwkb") {
          rows[i] = {a.ell, k, jwkb_phase_shift(pot, a.ell + 0.5, k), 0.0};
        } else {
          if (a.ell != 0) throw CliError(exit_code::bad_input, "forward: Born phase shifts are s-wave only");
          rows[i] = {0.0, k, born_phase_shift(pot, k), 0.0};
        }
      });
    });
    Table t;
    t.meta = meta;
    t.meta.push_back("method: " + a.method);
    t.header = {"ell", "k", "delta", "residual"};
    for (const auto& r : rows) t.add(r);
    run.write("phase.csv", t);
  }

  if (!a.lambda.empty()) {
    if (a.k.empty()) throw CliError(exit_code::bad_input, "forward: --lambda needs --k (first k is k0)");
    const auto ks = parse_grid(a.k), ls = parse_grid(a.lambda);
    PhaseShiftTable table;
    run.stage("mixed table", [&] {
      if (a.method == "jwkb") {
        table = jwkb_phase_table(pot, a.ell, ks.front(), ks, ls);
        return;
      }
      if (a.method != "exact") throw CliError(exit_code::bad_input, "forward: mixed tables use exact or jwkb");
      table.ell0 = a.ell;
      table.k0 = ks.front();
      table.k = ks;
      table.lambda = ls;
      table.delta_k.resize(ks.size());
      table.delta_lambda.resize(ls.size());
      parallel_for(ks.size() + ls.size(), [&](std::size_t i) {
        if (i < ks.size())
          table.delta_k[i] = phase_shift(pot, a.ell, ks[i]).delta;
        else
          table.delta_lambda[i - ks.size()] = phase_shift(pot, ls[i - ks.size()] - 0.5, ks.front()).delta;
      });
    });
    Table t;
    t.meta = meta;
    t.meta.push_back("method: " + a.method);
    t.meta.push_back("k0: " + format_double(table.k0));
    t.header = {"branch", "ell", "k", "delta"};
    for (std::size_t i = 0; i < table.k.size(); ++i)
      t.add_text({"energy", format_double(table.ell0), format_double(table.k[i]), format_double(table.delta_k[i])});
    for (std::size_t i = 0; i < table.lambda.size(); ++i)
      t.add_text({"ell", format_double(table.lambda[i] - 0.5), format_double(table.k0),
                  format_double(table.delta_lambda[i])});
    run.write("mixed.csv", t);
  }

  if (!a.q.empty()) {
    const auto qs = parse_grid(a.q);
    BornTransform g;
    run.stage("born transform", [&] { g = born_g_from_potential(pot, qs); });
    Table t;
    t.meta = meta;
    t.header = {"q", "g"};
    for (std::size_t i = 0; i < g.q.size(); ++i) t.add({g.q[i], g.g[i]});
    run.write("born_g.csv", t);
  }
  run.finish();
}

// ---------------------------------------------------------------------------

struct TraceArgs {
  std::string potential, out = ".", mode = "fixed-l", n = "1", E, radii, ell_grid;
  double ell = 0, E0 = 1, r_cap = 0;
};

void add_line(Table& t, const ZeroLine& line) {
  for (const auto& p : line.points)
    t.add({static_cast<double>(line.n), static_cast<double>(p.segment), p.ell, p.E, p.r, p.slope,
           p.diverged ? 1.0 : 0.0});
}

void cmd_trace(const TraceArgs& a, const std::vector<std::string>& argv) {
  const std::string text = read_file(a.potential);
  const Potential pot = parse_potential(text, a.potential);
  Run run("trace", a.out);
  run.add_input(joined(argv));
  run.add_input(text);
  std::vector<int> ns;
  for (double x : parse_grid(a.n)) {
    if (x < 1 || x != std::floor(x)) throw CliError(exit_code::bad_input, "trace: --n takes positive integers");
    ns.push_back(static_cast<int>(x));
  }
  TraceOptions opt;
  opt.r_cap = a.r_cap;
  std::vector<ZeroLine> lines(ns.size());

  run.stage("trace", [&] {
    if (a.mode == "fixed-l" && !a.radii.empty()) {
      const auto radii = parse_grid(a.radii);
      parallel_for(ns.size(), [&](std::size_t i) { lines[i] = to_zero_line(sample_energy_line(pot, a.ell, ns[i], radii)); });
    } else if (a.mode == "fixed-l") {
      if (a.E.empty()) throw CliError(exit_code::bad_input, "trace: fixed-l mode needs --E or --radii");
      const auto Es = parse_grid(a.E);
      parallel_for(ns.size(), [&](std::size_t i) { lines[i] = trace_fixed_l_line(pot, a.ell, ns[i], Es, opt); });
    } else if (a.mode == "mixed") {
      if (a.E.empty() || a.ell_grid.empty())
        throw CliError(exit_code::bad_input, "trace: mixed mode needs --E (energy branch) and --ell-grid");
      const auto Es = parse_grid(a.E), ls = parse_grid(a.ell_grid);
      parallel_for(ns.size(),
                   [&](std::size_t i) { lines[i] = trace_mixed_line(pot, a.ell, a.E0, ns[i], Es, ls, opt); });
    } else {
      throw CliError(exit_code::bad_input, "trace: --mode must be fixed-l or mixed");
    }
  });

  Table t;
  t.meta = base_meta("trace");
  t.meta.push_back("potential: " + pot.describe());
  t.meta.push_back("mode: " + a.mode);
  t.meta.push_back("ell0: " + format_double(a.ell));
  if (a.mode == "mixed") t.meta.push_back("E0: " + format_double(a.E0));
  t.header = {"n", "segment", "ell", "E", "r", "slope", "diverged"};
  for (const auto& l : lines) add_line(t, l);
  run.write("trace.csv", t);
  run.finish();
}

// ---------------------------------------------------------------------------

struct SpectralArgs {
  std::string potential, out = ".";
  double ell = 0, R = 1;
  int n_max = 5;
};

void cmd_spectral(const SpectralArgs& a, const std::vector<std::string>& argv) {
  const std::string text = read_file(a.potential);
  const Potential pot = parse_potential(text, a.potential);
  Run run("spectral", a.out);
  run.add_input(joined(argv));
  run.add_input(text);
  SpectralData s;
  run.stage("spectral data", [&] { s = spectral_data_at(pot, a.ell, a.R, a.n_max); });
  Table t;
  t.meta = base_meta("spectral");
  t.meta.push_back("potential: " + pot.describe());
  t.meta.push_back("ell: " + format_double(a.ell));
  t.meta.push_back("R: " + format_double(a.R));
  t.header = {"n", "E", "rho"};
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    t.add({static_cast<double>(i + 1), s.eigenvalues[i], s.norming[i]});
  run.write("spectral.csv", t);
  run.finish();
}

// ---------------------------------------------------------------------------

struct NodalArgs {
  std::string line, out = ".";
  int n = 0;
  int window = 9;
  double min_jump = 1e-6;
};

ZeroLine read_line(const Table& t, int want_n) {
  const auto r = t.numbers("r");
  const bool by_energy = t.has_column("E");
  const auto E = by_energy ? t.numbers("E") : std::vector<double>(r.size(), 0.0);
  const auto ell = t.has_column("ell") ? t.numbers("ell") : std::vector<double>(r.size(), 0.0);
  const auto n = t.has_column("n") ? t.numbers("n") : std::vector<double>(r.size(), 1.0);
  const auto seg = t.has_column("segment") ? t.numbers("segment") : std::vector<double>(r.size(), 1.0);
  const auto slope = t.has_column("slope") ? t.numbers("slope")
                                           : std::vector<double>(r.size(), std::numeric_limits<double>::quiet_NaN());
  const auto div = t.has_column("diverged") ? t.numbers("diverged") : std::vector<double>(r.size(), 0.0);
  if (!by_energy) throw CliError(exit_code::bad_input, "line file needs an E column");
  if (r.empty()) throw CliError(exit_code::bad_input, "line file has no rows");

  ZeroLine line;
  line.n = want_n > 0 ? want_n : static_cast<int>(*std::min_element(n.begin(), n.end()));
  bool mixed = false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (static_cast<int>(n[i]) != line.n) continue;
    LinePoint p;
    p.segment = static_cast<int>(seg[i]);
    p.ell = ell[i];
    p.E = E[i];
    p.r = r[i];
    p.slope = slope[i];
    p.diverged = div[i] != 0.0;
    mixed = mixed || p.segment == 2;
    line.points.push_back(p);
  }
  if (line.points.empty()) throw CliError(exit_code::bad_input, "line file has no points for n = " + std::to_string(line.n));
  line.kind = mixed ? PathKind::mixed : PathKind::fixed_ell;
  line.ell0 = line.points.front().ell;
  for (const auto& p : line.points)
    if (p.segment == 2) line.E0 = p.E;
  return line;
}

Table events_table(const std::vector<DiscontinuityEvent>& ev, const std::string& where) {
  Table t;
  t.header = {"branch", "location", "bracket", "jump_third", "slope", "inferred_jump", "confidence"};
  for (const auto& e : ev)
    t.add_text({where, format_double(e.location), format_double(e.bracket), format_double(e.jump_third),
                format_double(e.slope), format_double(e.inferred_jump), format_double(e.confidence)});
  return t;
}

Table steps_table(const Potential& pot) {
  Table t;
  t.header = {"r_from", "r_to", "V"};
  double lo = 0.0;
  for (double b : pot.breakpoints()) {
    t.add({lo, b, pot.left_limit(b)});
    lo = b;
  }
  t.add({lo, std::numeric_limits<double>::infinity(), 0.0});
  return t;
}

void cmd_invert_nodal(const NodalArgs& a, const std::vector<std::string>& argv) {
  Run run("invert nodal", a.out);
  run.add_input(joined(argv));
  const std::string text = in_stage("input", [&] { return read_file(a.line); });
  run.add_input(text);
  const ZeroLine line = in_stage("input", [&] { return read_line(parse_table(text, a.line), a.n); });

  DetectOptions opt;
  opt.window = a.window;
  opt.min_jump = a.min_jump;
  auto meta = base_meta("invert nodal");
  meta.push_back("n: " + std::to_string(line.n));
  Potential rec;
  Table events;
  Table profile;
  profile.header = {"branch", "r", "minus_p3_over_2p1"};
  auto add_profile = [&](const InverseLine& inv, const std::string& where) {
    for (const auto& c : jump_profile(inv, a.window))
      profile.add_text({where, format_double(c.r), format_double(c.value)});
  };

  if (line.kind == PathKind::mixed) {
    MixedReconstruction m;
    run.stage("mixed reconstruction", [&] {
      const InverseLine inner = in_stage("line inversion", [&] { return invert_line(line, 1); });
      const InverseLine outer = in_stage("line inversion", [&] { return invert_line(line, 2); });
      m = in_stage("piecewise reconstruction", [&] { return reconstruct_mixed(line, opt); });
      add_profile(inner, "energy");
      add_profile(outer, "ell");
    });
    rec = m.potential;
    events = events_table(m.inner_events, "energy");
    for (auto& r : events_table(m.outer_events, "ell").rows) events.rows.push_back(r);
    meta.push_back("junction_r0: " + format_double(m.junction.r0));
    meta.push_back("junction_v: " + format_double(m.junction.v));
    meta.push_back("junction_reliable: " + std::string(m.junction.reliable ? "true" : "false"));
  } else {
    InverseLine inv;
    std::vector<DiscontinuityEvent> ev;
    run.stage("line inversion", [&] { inv = in_stage("line inversion", [&] { return invert_line(line); }); });
    run.stage("discontinuity detection", [&] {
      ev = in_stage("discontinuity detection", [&] { return detect_discontinuities(inv, opt); });
      add_profile(inv, "energy");
    });
    run.stage("piecewise reconstruction",
              [&] { rec = in_stage("piecewise reconstruction", [&] { return reconstruct_piecewise(ev); }); });
    events = events_table(ev, "energy");
  }
  meta.push_back("events: " + std::to_string(events.rows.size()));

  Table steps = steps_table(rec);
  steps.meta = meta;
  events.meta = meta;
  profile.meta = meta;
  run.write("potential.csv", steps);
  run.write("events.csv", events);
  run.write("profile.csv", profile);
  run.finish();
  std::printf("%zu discontinuities\n", events.rows.size());
  for (const auto& r : steps.rows) std::printf("  V = %s on (%s, %s]\n", r[2].c_str(), r[0].c_str(), r[1].c_str());
}

// ---------------------------------------------------------------------------

struct JwkbArgs {
  std::string table, out = ".";
  int low_k_points = 200;
};

PhaseShiftTable read_mixed_table(const Table& t) {
  PhaseShiftTable p;
  const std::size_t cb = t.column("branch"), cl = t.column("ell"), ck = t.column("k"), cd = t.column("delta");
  bool have_energy = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& b = t.rows[i][cb];
    const double ell = t.number(i, cl), k = t.number(i, ck), d = t.number(i, cd);
    if (b == "energy") {
      if (!have_energy) p.ell0 = ell;
      have_energy = true;
      p.k.push_back(k);
      p.delta_k.push_back(d);
    } else if (b == "ell") {
      p.lambda.push_back(ell + 0.5);
      p.delta_lambda.push_back(d);
      p.k0 = k;
    } else {
      throw CliError(exit_code::bad_input, "mixed table: branch must be energy or ell, got \"" + b + "\"");
    }
  }
  if (!have_energy && !p.lambda.empty()) p.ell0 = p.lambda.front() - 0.5;
  if (p.lambda.empty() && !p.k.empty()) p.k0 = p.k.front();
  return p;
}

void cmd_invert_jwkb(const JwkbArgs& a, const std::vector<std::string>& argv) {
  Run run("invert jwkb", a.out);
  run.add_input(joined(argv));
  const std::string text = in_stage("input", [&] { return read_file(a.table); });
  run.add_input(text);
  const PhaseShiftTable table = in_stage("input", [&] { return read_mixed_table(parse_table(text, a.table)); });
  JwkbReconstruction rec;
  run.stage("jwkb inversion", [&] { rec = mixed_jwkb_invert(table, a.low_k_points); });

  auto meta = base_meta("invert jwkb");
  meta.push_back("ell0: " + format_double(table.ell0));
  meta.push_back("k0: " + format_double(table.k0));
  meta.push_back("r0: " + format_double(rec.r0));
  meta.push_back("seam_residual: " + format_double(rec.seam_residual));
  meta.push_back("seam_radius_mismatch: " + format_double(rec.seam_radius_mismatch));
  Table t;
  t.meta = meta;
  t.header = {"segment", "parameter", "r", "V"};
  auto add_curve = [&](const TurningPointCurve& c, const std::string& name) {
    const auto V = c.potential();
    for (std::size_t i = 0; i < c.radius.size(); ++i)
      t.add_text({name, format_double(c.param[i]), format_double(c.radius[i]), format_double(V[i])});
  };
  add_curve(rec.inner, "fixed-l");
  add_curve(rec.outer, "fixed-energy");
  run.write("potential.csv", t);
  Table low;
  low.meta = meta;
  low.header = {"k", "delta"};
  for (std::size_t i = 0; i < rec.low_k.x.size(); ++i) low.add({rec.low_k.x[i], rec.low_k.delta[i]});
  run.write("low_k.csv", low);
  run.finish();
  std::printf("r0 = %.6g  seam residual = %.3g\n", rec.r0, rec.seam_residual);
}

// ---------------------------------------------------------------------------

struct BornArgs {
  std::string gq, delta0, radii = "0.05:10:0.05", out = ".";
  double taper = 0.5, seam_tol = 1e-2;
};

void cmd_invert_born(const BornArgs& a, const std::vector<std::string>& argv) {
  Run run("invert born", a.out);
  run.add_input(joined(argv));
  BornTransform g;
  std::vector<double> k, d;
  in_stage("input", [&] {
    const std::string gt = read_file(a.gq);
    run.add_input(gt);
    const Table t = parse_table(gt, a.gq);
    g.q = t.numbers("q");
    g.g = t.numbers("g");
    g.source = BornSource::from_fixed_energy_data;
    if (!a.delta0.empty()) {
      const std::string dt = read_file(a.delta0);
      run.add_input(dt);
      const Table s = parse_table(dt, a.delta0);
      k = s.numbers("k");
      d = s.numbers("delta");
    }
    return 0;
  });
  const auto radii = in_stage("input", [&] { return parse_grid(a.radii); });
  BornInvertOptions opt;
  opt.taper_start = a.taper;
  BornReconstruction ext;
  ext.transform = g;
  if (!k.empty())
    run.stage("born extension",
              [&] { ext = in_stage("born extension", [&] { return born_extend_and_invert(g, k, d, {}, opt); }); });
  std::vector<double> rV;
  run.stage("born inversion",
            [&] { rV = in_stage("born inversion", [&] { return born_invert_rV(ext.transform, radii, opt); }); });
  if (!k.empty() && ext.seam_mismatch > a.seam_tol)
    std::fprintf(stderr, "warning: g(q) mismatch %.3g at the seam q = %.6g\n", ext.seam_mismatch, ext.q_seam);

  auto meta = base_meta("invert born");
  meta.push_back("q_seam: " + format_double(ext.q_seam));
  meta.push_back("seam_mismatch: " + format_double(ext.seam_mismatch));
  meta.push_back("taper_start: " + format_double(a.taper));
  Table t;
  t.meta = meta;
  t.header = {"r", "rV", "V"};
  for (std::size_t i = 0; i < radii.size(); ++i)
    t.add({radii[i], rV[i], radii[i] > 0 ? rV[i] / radii[i] : std::numeric_limits<double>::quiet_NaN()});
  run.write("potential.csv", t);
  Table gt;
  gt.meta = meta;
  gt.header = {"q", "g"};
  for (std::size_t i = 0; i < ext.transform.q.size(); ++i) gt.add({ext.transform.q[i], ext.transform.g[i]});
  run.write("born_g_extended.csv", gt);
  run.finish();
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string a, b, columns;
  double tol = 1e-8;
  bool relative = false;
};

int cmd_compare(const CompareArgs& c) {
  const Table A = load_table(c.a), B = load_table(c.b);
  std::vector<std::string> cols;
  if (!c.columns.empty()) {
    std::stringstream ss(c.columns);
    for (std::string s; std::getline(ss, s, ',');) cols.push_back(s);
  } else {
    for (const auto& h : A.header)
      if (B.has_column(h)) cols.push_back(h);
  }
  if (A.rows.size() != B.rows.size()) {
    std::printf("row counts differ: %zu vs %zu\n", A.rows.size(), B.rows.size());
    return exit_code::mismatch;
  }
  bool ok = true;
  for (const auto& name : cols) {
    const std::size_t ia = A.column(name), ib = B.column(name);
    double worst = 0;
    bool text_diff = false;
    for (std::size_t i = 0; i < A.rows.size(); ++i) {
      double x, y;
      try {
        x = A.number(i, ia);
        y = B.number(i, ib);
      } catch (const CliError&) {
        text_diff = text_diff || A.rows[i][ia] != B.rows[i][ib];
        continue;
      }
      if (std::isnan(x) && std::isnan(y)) continue;
      if (x == y) continue;
      double diff = std::abs(x - y);
      if (c.relative) diff /= std::max(std::abs(x), std::abs(y));
      worst = std::max(worst, std::isnan(diff) ? std::numeric_limits<double>::infinity() : diff);
    }
    const bool pass = worst <= c.tol && !text_diff;
    ok = ok && pass;
    std::printf("%-20s max %s diff %.3e%s  %s\n", name.c_str(), c.relative ? "rel" : "abs", worst,
                text_diff ? " (text differs)" : "", pass ? "ok" : "FAIL");
  }
  return ok ? exit_code::ok : exit_code::mismatch;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Scattering forward solves, lines of zeros and inversions"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);
  std::function<int()> action;

  ForwardArgs fa;
  auto* fw = app.add_subcommand("forward", "Zeros, phase shifts and Born transforms for one potential");
  fw->add_option("--potential", fa.potential, "Potential description (JSON)")->required();
  fw->add_option("--ell", fa.ell, "Angular momentum (l0 for mixed tables)");
  fw->add_option("--E", fa.E, "Energies: list a,b,c or start:stop:step");
  fw->add_option("--k", fa.k, "Wavenumbers");
  fw->add_option("--q", fa.q, "Momentum transfers for the Born transform g(q)");
  fw->add_option("--lambda", fa.lambda, "lambda = l + 1/2 grid; with --k writes a mixed table");
  fw->add_option("--method", fa.method, "exact, jwkb or born")->check(CLI::IsMember({"exact", "jwkb", "born"}));
  fw->add_option("--rmax", fa.rmax, "Outer radius for zeros");
  fw->add_option("--out", fa.out, "Output directory");
  fw->callback([&] { action = [&] { cmd_forward(fa, args); return 0; }; });

  TraceArgs ta;
  auto* tr = app.add_subcommand("trace", "Lines of zeros r_n(E) or mixed lines");
  tr->add_option("--potential", ta.potential, "Potential description (JSON)")->required();
  tr->add_option("--mode", ta.mode, "fixed-l or mixed")->check(CLI::IsMember({"fixed-l", "mixed"}));
  tr->add_option("--ell", ta.ell, "l (l0 in mixed mode)");
  tr->add_option("--n", ta.n, "Line indices, e.g. 1:4:1");
  tr->add_option("--E", ta.E, "Energy grid");
  tr->add_option("--radii", ta.radii, "Sample E_n(r) at these radii instead of an energy grid");
  tr->add_option("--E0", ta.E0, "Energy of the l branch (mixed mode)");
  tr->add_option("--ell-grid", ta.ell_grid, "l grid of the second branch (mixed mode)");
  tr->add_option("--r-cap", ta.r_cap, "Divergence cap (default 50 support scales)");
  tr->add_option("--out", ta.out, "Output directory");
  tr->callback([&] { action = [&] { cmd_trace(ta, args); return 0; }; });

  SpectralArgs sa;
  auto* sp = app.add_subcommand("spectral", "Dirichlet eigenvalues and norming constants on [0, R]");
  sp->add_option("--potential", sa.potential, "Potential description (JSON)")->required();
  sp->add_option("--ell", sa.ell, "Angular momentum");
  sp->add_option("--R", sa.R, "Dirichlet radius");
  sp->add_option("--n-max", sa.n_max, "Number of eigenvalues");
  sp->add_option("--out", sa.out, "Output directory");
  sp->callback([&] { action = [&] { cmd_spectral(sa, args); return 0; }; });

  auto* inv = app.add_subcommand("invert", "Reconstruct a potential");
  inv->require_subcommand(1);
  NodalArgs na;
  auto* nod = inv->add_subcommand("nodal", "Piecewise-constant potential from one line of zeros");
  nod->add_option("--line", na.line, "Line CSV (columns r, E; optional n, segment, ell, slope)")->required();
  nod->add_option("--n", na.n, "Line index to use (default: smallest present)");
  nod->add_option("--window", na.window, "Points per one-sided fit");
  nod->add_option("--min-jump", na.min_jump, "Smallest reported step");
  nod->add_option("--out", na.out, "Output directory");
  nod->callback([&] { action = [&] { cmd_invert_nodal(na, args); return 0; }; });

  JwkbArgs ja;
  auto* jw = inv->add_subcommand("jwkb", "Semiclassical inversion of mixed phase-shift data");
  jw->add_option("--table", ja.table, "Mixed table CSV (branch, ell, k, delta)")->required();
  jw->add_option("--low-k-points", ja.low_k_points, "Samples of the completed low-k branch");
  jw->add_option("--out", ja.out, "Output directory");
  jw->callback([&] { action = [&] { cmd_invert_jwkb(ja, args); return 0; }; });

  BornArgs ba;
  auto* bo = inv->add_subcommand("born", "Born inversion from g(q) and s-wave phase shifts");
  bo->add_option("--gq", ba.gq, "g(q) CSV (q, g)")->required();
  bo->add_option("--delta0", ba.delta0, "s-wave phase shifts CSV (k, delta) extending g beyond 2 k0");
  bo->add_option("--radii", ba.radii, "Output radii");
  bo->add_option("--taper", ba.taper, "Start of the cutoff taper as a fraction of the largest q");
  bo->add_option("--seam-tol", ba.seam_tol, "Warn above this g mismatch at q = 2 k0");
  bo->add_option("--out", ba.out, "Output directory");
  bo->callback([&] { action = [&] { cmd_invert_born(ba, args); return 0; }; });

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Column-wise numeric comparison of two CSV files");
  cmp->add_option("a", ca.a, "First CSV")->required();
  cmp->add_option("b", ca.b, "Second CSV")->required();
  cmp->add_option("--columns", ca.columns, "Comma-separated columns (default: all shared)");
  cmp->add_option("--tol", ca.tol, "Tolerance");
  cmp->add_flag("--relative", ca.relative, "Relative instead of absolute differences");
  cmp->callback([&] { action = [&] { return cmd_compare(ca); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return action ? action() : exit_code::ok;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const StageError& e) {
    std::fprintf(stderr, "error in stage '%s': %s\n", e.stage.c_str(), e.what());
    return stage_exit_code(e.stage);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return exit_code::solver;
  }
}

}  // namespace scatter::cli
