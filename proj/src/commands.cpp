#include "ondamp/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "ondamp/embedded_scenarios.hpp"
#include "ondamp/kernels.hpp"
#include "ondamp/output.hpp"

#ifndef ONDAMP_VERSION
#define ONDAMP_VERSION "unknown"
#endif

namespace ondamp {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct RunRecord {
  std::string system;
  std::size_t init_index = 0;
  PlantState init;
  std::string file;
  SimOutcome outcome;
};

std::string two_digits(std::size_t i) {
  std::ostringstream s;
  s << std::setw(2) << std::setfill('0') << i;
  return s.str();
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

bool failed(Termination t) {
  return t == Termination::diverged || t == Termination::singular;
}

json maybe_number(std::optional<double> v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

std::vector<RunRecord> run_all(const Scenario& s, const std::string& stem,
                               const std::filesystem::path& dir) {
  const RefProfile ref = s.build_reference();
  std::vector<SimJob> jobs;
  std::vector<RunRecord> records;
  for (const NamedSystem& sys : s.systems) {
    for (std::size_t i = 0; i < s.inits.size(); ++i) {
      jobs.push_back({sys.spec, s.inits[i], ref, s.noise, s.integrator});
      RunRecord rec;
      rec.system = sys.label;
      rec.init_index = i;
      rec.init = s.inits[i];
      rec.file = stem + (s.single_system ? "" : "_" + sys.label) + "_" +
                 two_digits(i) + ".csv";
      records.push_back(std::move(rec));
    }
  }
  std::vector<SimOutcome> outcomes = simulate_batch(jobs);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].outcome = std::move(outcomes[i]);
    write_series_csv(dir / records[i].file, records[i].outcome.series);
  }
  return records;
}

json run_json(const RunRecord& r) {
  const TimeSeries& ts = r.outcome.series;
  json j;
  j["system"] = r.system;
  j["init"] = {r.init.x1, r.init.x2};
  j["csv"] = r.file;
  j["terminated"] = to_string(r.outcome.terminated);
  j["converged_at"] = maybe_number(r.outcome.converged_at);
  j["samples"] = ts.size();
  j["final_error_norm"] =
      maybe_number(ts.empty() ? std::nullopt
                              : std::optional(ts.error_norm(ts.size() - 1)));
  if (!r.outcome.detail.empty()) {
    j["detail"] = r.outcome.detail;
  }
  return j;
}

void write_manifest(const std::filesystem::path& path, const std::string& cmd,
                    const Scenario& s, json runs, json extra,
                    Clock::time_point started) {
  json m;
  m["command"] = cmd;
  m["scenario"] = s.name;
  m["scenario_sha256"] = scenario_hash(s);
  m["tool_version"] = ONDAMP_VERSION;
  m["runs"] = std::move(runs);
  for (auto& item : extra.items()) {
    m[item.key()] = item.value();
  }
  m["wall_clock_seconds"] =
      std::chrono::duration<double>(Clock::now() - started).count();
  std::ofstream out = open_output(path);
  out << m.dump(2) << '\n';
}

void report_runs(const std::vector<RunRecord>& records, std::ostream& out) {
  for (const RunRecord& r : records) {
    out << r.file << ": " << to_string(r.outcome.terminated);
    if (r.outcome.converged_at) {
      out << ", converged at t=" << *r.outcome.converged_at;
    }
    if (!r.outcome.detail.empty()) {
      out << " (" << r.outcome.detail << ")";
    }
    out << '\n';
  }
}

void write_plotdata(const std::filesystem::path& path,
                    const std::vector<RunRecord>& records,
                    std::size_t stride) {
  std::ofstream out = open_output(path);
  CsvWriter csv(out, {"series", "t", "x1", "x2", "r", "rdot", "e1", "e2", "u"});
  for (const RunRecord& rec : records) {
    const TimeSeries& ts = rec.outcome.series;
    const std::string label = rec.file.substr(0, rec.file.size() - 4);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i % stride != 0 && i + 1 != ts.size()) {
        continue;
      }
      csv.cell(label).cell(ts.t[i]).cell(ts.x1[i]).cell(ts.x2[i]);
      csv.cell(ts.r[i]).cell(ts.rdot[i]).cell(ts.e1[i]).cell(ts.e2[i]);
      csv.cell(ts.u[i]).end_row();
    }
  }
}

bool any_failed(const std::vector<RunRecord>& records) {
  return std::any_of(records.begin(), records.end(), [](const RunRecord& r) {
    return failed(r.outcome.terminated);
  });
}

int simulate_impl(const Scenario& s, const CommandContext& ctx,
                  const std::string& cmd) {
  const auto started = Clock::now();
  std::filesystem::create_directories(ctx.out_dir);
  const std::vector<RunRecord> records = run_all(s, s.csv_stem, ctx.out_dir);
  if (s.plotdata) {
    write_plotdata(ctx.out_dir / *s.plotdata, records, s.plot_stride);
  }
  json runs = json::array();
  for (const RunRecord& r : records) {
    runs.push_back(run_json(r));
  }
  write_manifest(ctx.out_dir / (s.csv_stem + "_manifest.json"), cmd, s,
                 std::move(runs), json::object(), started);
  report_runs(records, ctx.out);
  return any_failed(records) ? kExitRunFailure : kExitOk;
}

int sweep_impl(const Scenario& s, std::vector<double> ks,
               const CommandContext& ctx, const std::string& cmd) {
  if (ks.empty()) {
    ks = s.sweep_k;
  }
  if (ks.empty()) {
    ctx.err << "sweep: no gains given (use --k-values or a sweep block)\n";
    return kExitInvalid;
  }
  const auto started = Clock::now();
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream summary_file =
      open_output(ctx.out_dir / (s.csv_stem + "_sweep.csv"));
  CsvWriter summary(summary_file, {"k", "system", "init", "terminated",
                                   "converged_at", "final_error_norm", "csv"});
  std::vector<RunRecord> all;
  json runs = json::array();
  for (double k : ks) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      ctx.err << "sweep: gain " << k << " is not positive\n";
      return kExitInvalid;
    }
    Scenario variant = s;
    for (NamedSystem& sys : variant.systems) {
      if (sys.spec.kind != SystemKind::pd) {
        sys.spec.gains.k = k;
      }
    }
    const std::string stem = s.csv_stem + "_k" + shortest(k);
    std::vector<RunRecord> records = run_all(variant, stem, ctx.out_dir);
    for (const RunRecord& r : records) {
      json j = run_json(r);
      j["k"] = k;
      runs.push_back(std::move(j));
      const TimeSeries& ts = r.outcome.series;
      summary.cell(k).cell(r.system.empty() ? "-" : r.system);
      summary.cell(std::string_view(std::to_string(r.init_index)));
      summary.cell(to_string(r.outcome.terminated));
      summary.cell(r.outcome.converged_at
                       ? format_double(*r.outcome.converged_at)
                       : std::string());
      summary.cell(ts.empty() ? std::string()
                              : format_double(ts.error_norm(ts.size() - 1)));
      summary.cell(r.file).end_row();
    }
    std::move(records.begin(), records.end(), std::back_inserter(all));
  }
  if (s.plotdata) {
    write_plotdata(ctx.out_dir / *s.plotdata, all, s.plot_stride);
  }
  write_manifest(ctx.out_dir / (s.csv_stem + "_manifest.json"), cmd, s,
                 std::move(runs), json{{"sweep_k", ks}}, started);
  report_runs(all, ctx.out);
  return any_failed(all) ? kExitRunFailure : kExitOk;
}

int energy_grid_impl(const Scenario& s, const CommandContext& ctx) {
  const auto started = Clock::now();
  const NamedSystem& sys = s.systems.front();
  if (sys.spec.kind == SystemKind::pd) {
    ctx.err << s.name << ": energy grid needs a nonlinear system\n";
    return kExitInvalid;
  }
  const EnergyGrid g =
      energy_rate_grid(sys.spec.gains, s.energy_grid->e1, s.energy_grid->e2);
  std::filesystem::create_directories(ctx.out_dir);
  const std::string file = s.plotdata.value_or(s.csv_stem + "_energy_rate.csv");
  std::ofstream out = open_output(ctx.out_dir / file);
  CsvWriter csv(out, {"e1", "e2", "abs_vdot"});
  for (std::size_t i = 0; i < g.e1.size(); ++i) {
    for (std::size_t j = 0; j < g.e2.size(); ++j) {
      csv.cell(g.e1[i]).cell(g.e2[j]).cell(g.at(i, j)).end_row();
    }
  }
  write_manifest(ctx.out_dir / (s.csv_stem + "_manifest.json"), "figure", s,
                 json::array(),
                 json{{"energy_grid", file},
                      {"points", g.abs_vdot.size()}},
                 started);
  ctx.out << file << ": " << g.abs_vdot.size() << " grid points\n";
  return kExitOk;
}

double steady_rms(const TimeSeries& ts, double from) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts.t[i] >= from) {
      sum += ts.e1[i] * ts.e1[i];
      ++n;
    }
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : std::nan("");
}

}  // namespace

int cmd_simulate(const Scenario& s, const CommandContext& ctx) {
  if (s.inits.empty()) {
    ctx.err << s.name << ": scenario has no initial states to simulate\n";
    return kExitInvalid;
  }
  return simulate_impl(s, ctx, "simulate");
}

int cmd_sweep(const Scenario& s, const std::vector<double>& ks,
              const CommandContext& ctx) {
  if (s.inits.empty()) {
    ctx.err << s.name << ": scenario has no initial states to simulate\n";
    return kExitInvalid;
  }
  return sweep_impl(s, ks, ctx, "sweep");
}

int cmd_figure(const std::string& name, const Overrides& ov,
               const CommandContext& ctx) {
  const auto text = embedded_scenario(name);
  if (!text) {
    ctx.err << "unknown figure '" << name << "' (expected one of";
    for (const std::string& f : figure_names()) {
      ctx.err << ' ' << f;
    }
    ctx.err << ")\n";
    return kExitInvalid;
  }
  const Scenario s = parse_scenario(std::string(*text), name + ".json", ov);
  if (s.energy_grid) {
    return energy_grid_impl(s, ctx);
  }
  if (!s.sweep_k.empty()) {
    sweep_impl(s, {}, ctx, "figure");
  } else {
    simulate_impl(s, ctx, "figure");
  }
  return kExitOk;
}

int cmd_certify(const CertifyOptions& opt, const CommandContext& ctx) {
  GainParams p;
  p.k = opt.k;
  p.mu = opt.mu;
  try {
    p.validate();
  } catch (const std::exception& e) {
    ctx.err << "certify: " << e.what() << '\n';
    return kExitInvalid;
  }
  for (const Axis* a : {&opt.grid.e1, &opt.grid.e2}) {
    const bool ok = std::isfinite(a->lo) && std::isfinite(a->hi) && a->n > 0 &&
                    (a->n == 1 ? a->lo == a->hi : a->lo < a->hi);
    if (!ok) {
      ctx.err << "certify: invalid grid range [" << a->lo << ", " << a->hi
              << "] with " << a->n << " points\n";
      return kExitInvalid;
    }
  }
  for (double v : opt.grid.e1_extra) {
    if (!std::isfinite(v)) {
      ctx.err << "certify: non-finite refinement abscissa\n";
      return kExitInvalid;
    }
  }

  const Certificate cert =
      grid_certificate(p, PMatrix::energy_weight(p.k), opt.grid);
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream out = open_output(ctx.out_dir / opt.csv);
  CsvWriter csv(out, {"e1", "e2", "quadform", "lambda_lo", "lambda_hi",
                      "closed_form_c075", "closed_form_c050"});
  for (const CertPoint& pt : cert.points) {
    csv.cell(pt.e1).cell(pt.e2).cell(pt.quadform).cell(pt.lambda_lo);
    csv.cell(pt.lambda_hi).cell(pt.rate_printed).cell(pt.rate_derived);
    csv.end_row();
  }

  const CertSummary& s = cert.summary;
  std::ostream& o = ctx.out;
  o << "k = " << p.k << ", mu = " << p.mu << '\n';
  o << "points evaluated: " << s.evaluated << " (" << s.skipped
    << " singular points skipped)\n";
  if (s.max_quadform <= 0.0 && s.zero_set_is_e2_axis && s.zero_count > 0) {
    o << "max quadform = 0 on e2=0; negative elsewhere\n";
  } else if (s.max_quadform < 0.0) {
    o << "max quadform = " << s.max_quadform << " (negative everywhere)\n";
  } else {
    o << "max quadform = " << s.max_quadform << "; " << s.zero_count
      << " zeros"
      << (s.zero_set_is_e2_axis ? " on e2=0" : ", not confined to e2=0")
      << '\n';
  }
  o << "J eigenvalues in [" << s.min_lambda << ", " << s.max_lambda << "]; "
    << s.lambda_nonneg_count << " of " << s.evaluated
    << " points have a non-negative eigenvalue"
    << (s.lambda_nonneg_count ? " (J is not negative definite as a matrix)"
                              : "")
    << '\n';
  o << "closed-form coefficient 0.5: max rel err " << s.max_rel_err_derived
    << "; 0.75: max rel err " << s.max_rel_err_printed << '\n';
  if (s.matched_coefficient) {
    o << "matched coefficient: " << *s.matched_coefficient << '\n';
  } else {
    o << "matched coefficient: none\n";
  }
  return kExitOk;
}

int cmd_compare(const Scenario& s, const CommandContext& ctx) {
  const NamedSystem* nl = s.find("nonlinear");
  const NamedSystem* pd = s.find("pd");
  if (!nl || !pd) {
    ctx.err << s.name
            << ": compare needs systems labelled 'nonlinear' and 'pd'\n";
    return kExitInvalid;
  }
  if (nl->spec.stiffness() != pd->spec.stiffness()) {
    ctx.err << s.name << ": compared systems must share the same gain ("
            << nl->spec.stiffness() << " vs " << pd->spec.stiffness() << ")\n";
    return kExitInvalid;
  }
  const auto started = Clock::now();
  const RefProfile ref = s.build_reference();
  std::vector<SimJob> jobs;
  for (const NamedSystem* sys : {nl, pd}) {
    for (const PlantState& init : s.inits) {
      jobs.push_back({sys->spec, init, ref, std::nullopt, s.integrator});
      if (s.noise) {
        jobs.push_back({sys->spec, init, ref, s.noise, s.integrator});
      }
    }
  }
  const std::vector<SimOutcome> outcomes = simulate_batch(jobs);

  std::filesystem::create_directories(ctx.out_dir);
  const std::string file = s.csv_stem + "_compare.csv";
  std::ofstream out = open_output(ctx.out_dir / file);
  CsvWriter csv(out, {"system", "init", "terminated", "convergence_time", "c0",
                      "c1", "c2", "fit_samples", "noise_terminated",
                      "noise_rms_e1"});
  auto cell_or_blank = [&](std::optional<double> v) {
    csv.cell(v && std::isfinite(*v) ? format_double(*v) : std::string());
  };

  std::ostream& o = ctx.out;
  o << std::left << std::setw(10) << "system" << std::setw(6) << "init"
    << std::setw(11) << "outcome" << std::setw(14) << "t_conv" << std::setw(14)
    << "c1" << std::setw(14) << "c2" << "noise_rms_e1\n";
  json runs = json::array();
  bool bad = false;
  std::size_t next = 0;
  for (const NamedSystem* sys : {nl, pd}) {
    for (std::size_t i = 0; i < s.inits.size(); ++i) {
      const SimOutcome& clean = outcomes[next++];
      const SimOutcome* noisy = s.noise ? &outcomes[next++] : nullptr;
      bad = bad || failed(clean.terminated) ||
            (noisy && failed(noisy->terminated));
      const auto t_conv = clean.series.empty()
                              ? std::nullopt
                              : detect_convergence(clean.series,
                                                   s.integrator.conv_eps,
                                                   s.integrator.conv_hold);
      std::optional<LogFit> fit;
      try {
        fit = logscale_fit(clean.series, s.analysis.fit_floor,
                           s.analysis.t_from(sys->label));
      } catch (const DegenerateInput&) {
      }
      std::optional<double> rms;
      if (noisy && !failed(noisy->terminated)) {
        rms = steady_rms(noisy->series, s.analysis.rms_from);
      }

      csv.cell(sys->label).cell(std::string_view(std::to_string(i)));
      csv.cell(to_string(clean.terminated));
      cell_or_blank(t_conv);
      cell_or_blank(fit ? std::optional(fit->c0) : std::nullopt);
      cell_or_blank(fit ? std::optional(fit->c1) : std::nullopt);
      cell_or_blank(fit ? std::optional(fit->c2) : std::nullopt);
      csv.cell(std::string_view(fit ? std::to_string(fit->samples) : ""));
      csv.cell(noisy ? to_string(noisy->terminated) : std::string());
      cell_or_blank(rms);
      csv.end_row();

      auto show = [](std::optional<double> v) {
        std::ostringstream s;
        if (v && std::isfinite(*v)) {
          s << std::setprecision(6) << *v;
        } else {
          s << "-";
        }
        return s.str();
      };
      o << std::left << std::setw(10) << sys->label << std::setw(6) << i
        << std::setw(11) << to_string(clean.terminated) << std::setw(14)
        << show(t_conv) << std::setw(14)
        << show(fit ? std::optional(fit->c1) : std::nullopt) << std::setw(14)
        << show(fit ? std::optional(fit->c2) : std::nullopt) << show(rms)
        << '\n';

      json j;
      j["system"] = sys->label;
      j["init"] = {s.inits[i].x1, s.inits[i].x2};
      j["terminated"] = to_string(clean.terminated);
      j["convergence_time"] = maybe_number(t_conv);
      if (noisy) {
        j["noise_terminated"] = to_string(noisy->terminated);
        j["noise_rms_e1"] = maybe_number(rms);
      }
      runs.push_back(std::move(j));
    }
  }
  write_manifest(ctx.out_dir / (s.csv_stem + "_manifest.json"), "compare", s,
                 std::move(runs), json{{"table", file}}, started);
  return bad ? kExitRunFailure : kExitOk;
}

std::vector<std::string> figure_names() {
  std::vector<std::string> names;
  for (const auto& entry : kEmbeddedScenarios) {
    names.emplace_back(entry.name);
  }
  return names;
}

std::optional<std::string_view> embedded_scenario(std::string_view name) {
  for (const auto& entry : kEmbeddedScenarios) {
    if (entry.name == name) {
      return entry.text;
    }
  }
  return std::nullopt;
}

}  // namespace ondamp
