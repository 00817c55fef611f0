// Copyright 2026 The qbf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qbf_cli/commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qbf/closed_form.hpp"
#include "qbf/errors.hpp"
#include "qbf/interval.hpp"
#include "qbf/oracle.hpp"
#include "qbf/protocol.hpp"
#include "qbf/report.hpp"
#include "qbf/spb.hpp"
#include "qbf/stats.hpp"

namespace qbf::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const char* what) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError(std::string("bad ") + what + " '" + text + "'");
  return v;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Stream per p value, so a row does not depend on which other p values are in the run.
RandomStream stream_for(std::uint64_t seed, double p) {
  return RandomStream(seed, derive_stream_id(0x71626600u, std::bit_cast<std::uint64_t>(p)));
}

std::vector<double> sorted_unique(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

void check_common(const RunConfig& cfg) {
  if (cfg.p.empty()) throw ConfigError("no p values given (use --p or --p-grid)");
  if (cfg.budget < 1) throw ConfigError("budget must be at least 1");
  if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("format must be json or csv");
}

void check_unit(const std::vector<double>& p) {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("p=" + format_double(x) + " outside [0,1]");
}

Protocol load_protocol(const std::string& ref) {
  const std::string t = trim(ref);
  if (t.empty()) throw ConfigError("empty protocol reference");
  if (t.front() != '{' && t.front() != '[') {
    const auto names = builtin_protocol_names();
    if (std::find(names.begin(), names.end(), t) != names.end()) return builtin_protocol(t);
  }
  return protocol_from_json(load_json_ref(t, "protocol"));
}

json base_meta(const RunConfig& cfg, const char* command) {
  json m;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["trials"] = cfg.trials;
  m["budget"] = cfg.budget;
  m["z"] = kFourSigma;
  return m;
}

std::string render(const Report& r, const std::string& format) {
  return format == "csv" ? r.to_csv() : dump(r.to_json());
}

int exit_for(const Report& r) {
  for (const auto& row : r.rows)
    if (row.stats.exhausted > 0) return kBudget;
  return kOk;
}

template <class F>
CommandResult guarded(F&& body) {
  CommandResult res;
  try {
    res = body();
  } catch (const ConfigError& e) {
    res.exit_code = kConfig;
    res.diagnostic = e.what();
  } catch (const json::exception& e) {
    res.exit_code = kConfig;
    res.diagnostic = e.what();
  } catch (const CertificationError& e) {
    res.exit_code = kCertification;
    res.diagnostic = e.what();
  } catch (const UnsupportedStructure& e) {
    res.exit_code = kUnsupported;
    res.diagnostic = e.what();
  }
  return res;
}

}  // namespace

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, "p value"));
  if (out.empty()) throw ConfigError("empty p list");
  return out;
}

std::vector<double> parse_p_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("p grid must be lo:hi:count, got '" + text + "'");
  const double lo = parse_number(parts[0], "grid start");
  const double hi = parse_number(parts[1], "grid end");
  const double cnt = parse_number(parts[2], "grid count");
  if (cnt < 1 || cnt != std::floor(cnt) || cnt > 1e7) throw ConfigError("grid count must be a positive integer");
  if (hi < lo) throw ConfigError("grid end below grid start");
  const auto n = static_cast<std::size_t>(cnt);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) out.back() = hi;
  return out;
}

std::uint64_t parse_budget(const std::string& text) {
  const std::string t = trim(text);
  if (t == "unlimited") return kUnlimitedBudget;
  std::uint64_t v = 0;
  const auto parsed = parse_seed(t);
  if (!parsed) throw ConfigError("bad budget '" + text + "'");
  v = *parsed;
  if (v < 1) throw ConfigError("budget must be at least 1");
  return v;
}

json load_json_ref(const std::string& ref, const char* what) {
  const std::string t = trim(ref);
  if (t.empty()) throw ConfigError(std::string("empty ") + what + " reference");
  try {
    if (t.front() == '{' || t.front() == '[') return json::parse(t);
    std::ifstream in(t);
    if (!in) throw ConfigError(std::string("cannot open ") + what + " file '" + t + "'");
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " JSON: " + e.what());
  }
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  return guarded([&]() -> CommandResult {
    check_common(cfg);
    if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
    const int sources = !cfg.protocol.empty() + !cfg.certificate.empty() + !cfg.target.empty();
    if (sources != 1) throw ConfigError("give exactly one of --protocol, --certificate, --target");

    EstimateOptions eo;
    eo.budget = cfg.budget;
    eo.threads = std::max(1u, cfg.threads);
    const std::vector<double> ps = sorted_unique(cfg.p);
    Report report;
    report.meta = base_meta(cfg, "simulate");

    if (!cfg.protocol.empty()) {
      check_unit(ps);
      const Protocol proto = load_protocol(cfg.protocol);
      report.meta["protocol"] = to_json(proto);
      for (double p : ps) {
        ReportRow row;
        row.p = p;
        try {
          row.target = closed::protocol_value(proto, p);
        } catch (const UnsupportedStructure&) {
          try {
            row.target = exact_prob_enum(proto, p);
          } catch (const UnsupportedStructure&) {
          }
        }
        row.stats = estimate_bias(proto, HiddenBias(p), cfg.trials, stream_for(cfg.seed, p), eo);
        report.rows.push_back(std::move(row));
      }
    } else if (!cfg.certificate.empty()) {
      check_unit(ps);
      const SpbCertificate cert = SpbCertificate::from_json(load_json_ref(cfg.certificate, "certificate"));
      const SpbReport vr = verify_spb(cert, cfg.grid_points);
      if (!vr.pass) {
        CommandResult r;
        r.exit_code = kCertification;
        r.output = dump(vr.to_json());
        r.diagnostic = vr.diagnostic();
        return r;
      }
      report.meta["certificate"] = cert.to_json();
      GkChain chain(cert);
      for (double p : ps) {
        ReportRow row;
        row.p = p;
        row.target = cert.f(p);
        const HiddenBias bias(p);
        row.stats = estimate_trials([&](SamplingContext& ctx) { return spb_sample(chain, bias, ctx); }, cfg.trials,
                                    stream_for(cfg.seed, p), eo);
        report.rows.push_back(std::move(row));
      }
      report.meta["levels_built"] = chain.built();
      report.meta["coupled_draws"] = chain.coupled_draws();
      report.meta["nesting_violations"] = chain.nesting_violations();
    } else {
      PiecewiseTarget target = PiecewiseTarget::from_json(load_json_ref(cfg.target, "target"));
      for (double p : ps) {
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("p=" + format_double(p) + " outside (0,1)");
        const auto& ex = target.domain.exclusions;
        if (std::find(ex.begin(), ex.end(), p) != ex.end())
          throw ConfigError("p=" + format_double(p) + " is an excluded point");
      }
      report.meta["target"] = target.to_json();
      DyadicSampler sampler(target);
      for (double p : ps) {
        ReportRow row;
        row.p = p;
        row.target = target(p);
        const HiddenBias bias(p);
        row.stats = estimate_trials([&](SamplingContext& ctx) { return sampler.sample(bias, ctx); }, cfg.trials,
                                    stream_for(cfg.seed, p), eo);
        report.rows.push_back(std::move(row));
      }
      report.meta["levels_built"] = sampler.built();
    }
    CommandResult r;
    r.output = render(report, cfg.format);
    r.exit_code = exit_for(report);
    if (r.exit_code == kBudget) r.diagnostic = "some trials ran out of budget";
    return r;
  });
}

CommandResult cmd_verify_spb(const RunConfig& cfg) {
  return guarded([&]() -> CommandResult {
    const SpbCertificate cert = SpbCertificate::from_json(load_json_ref(cfg.certificate, "certificate"));
    const SpbReport vr = verify_spb(cert, cfg.grid_points);
    CommandResult r;
    r.output = dump(json{{"kind", "spb-verification"}, {"certificate", cert.to_json()}, {"verification", vr.to_json()}});
    if (!vr.pass) {
      r.exit_code = kCertification;
      r.diagnostic = vr.diagnostic();
    }
    return r;
  });
}

CommandResult cmd_compile_spb(const RunConfig& cfg) {
  return guarded([&]() -> CommandResult {
    const SpbCertificate cert = SpbCertificate::from_json(load_json_ref(cfg.certificate, "certificate"));
    const SpbReport vr = verify_spb(cert, cfg.grid_points);
    json out{{"kind", "spb-compiled"}, {"certificate", cert.to_json()}, {"verification", vr.to_json()}};
    CommandResult r;
    if (!vr.pass) {
      out["params"] = nullptr;
      r.output = dump(out);
      r.exit_code = kCertification;
      r.diagnostic = vr.diagnostic();
      return r;
    }
    SearchOptions so;
    so.grid_points = cfg.grid_points;
    try {
      const SearchResult sr = search_bounding_params_full(cert, so);
      out["params"] = sr.params.to_json();
      out["audit"] = sr.audit.to_json();
      out["candidates"] = sr.candidates;
    } catch (const CertificationError& e) {
      out["params"] = nullptr;
      out["search_error"] = e.what();
      r.output = dump(out);
      r.exit_code = kCertification;
      r.diagnostic = e.what();
      return r;
    }
    r.output = dump(out);
    return r;
  });
}

CommandResult cmd_enumerate(const RunConfig& cfg) {
  return guarded([&]() -> CommandResult {
    check_common(cfg);
    if (cfg.protocol.empty()) throw ConfigError("enumerate needs --protocol");
    const std::vector<double> ps = sorted_unique(cfg.p);
    check_unit(ps);
    const Protocol proto = load_protocol(cfg.protocol);
    json rows = json::array();
    std::string csv = "p,probability\n";
    for (double p : ps) {
      const double v = exact_prob_enum(proto, p);
      rows.push_back({{"p", p}, {"probability", v}});
      csv += format_double(p) + "," + format_double(v) + "\n";
    }
    CommandResult r;
    if (cfg.format == "csv") {
      r.output = csv;
    } else {
      r.output = dump(json{{"meta", {{"command", "enumerate"}, {"protocol", to_json(proto)}}}, {"rows", rows}});
    }
    return r;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qbf: quantum Bernoulli factory simulator"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string p_list, p_grid, seed_text, budget_text = "10000000";
  if (const char* env = std::getenv("QBF_SEED")) seed_text = env;

  auto add_p = [&](CLI::App* c) {
    auto* a = c->add_option("--p", p_list, "comma-separated p values");
    auto* b = c->add_option("--p-grid", p_grid, "lo:hi:count");
    a->excludes(b);
  };
  auto add_out = [&](CLI::App* c) {
    c->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    c->add_option("--out", cfg.out, "output file (default stdout)");
  };

  auto* sim = app.add_subcommand("simulate", "estimate the output bias over a set of p values");
  sim->add_option("--protocol", cfg.protocol, "builtin name, protocol JSON or file");
  sim->add_option("--certificate", cfg.certificate, "SPB certificate JSON or file");
  sim->add_option("--target", cfg.target, "piecewise target JSON or file");
  add_p(sim);
  sim->add_option("--trials", cfg.trials, "trials per p value");
  sim->add_option("--seed", seed_text, "master seed, decimal or 0x hex (default $QBF_SEED or 1)");
  sim->add_option("--budget", budget_text, "raw samples per trial, or 'unlimited'");
  sim->add_option("--threads", cfg.threads, "worker threads");
  sim->add_option("--grid", cfg.grid_points, "certificate check grid size");
  add_out(sim);

  auto* comp = app.add_subcommand("compile-spb", "verify a certificate and search level-1 bounding params");
  comp->add_option("--certificate", cfg.certificate, "SPB certificate JSON or file")->required();
  comp->add_option("--grid", cfg.grid_points, "audit grid size");
  comp->add_option("--out", cfg.out, "output file (default stdout)");

  auto* ver = app.add_subcommand("verify-spb", "grid checks of an SPB certificate");
  ver->add_option("--certificate", cfg.certificate, "SPB certificate JSON or file")->required();
  ver->add_option("--grid", cfg.grid_points, "check grid size");
  ver->add_option("--out", cfg.out, "output file (default stdout)");

  auto* en = app.add_subcommand("enumerate", "exact output probabilities from the enumeration oracle");
  en->add_option("--protocol", cfg.protocol, "builtin name, protocol JSON or file")->required();
  add_p(en);
  add_out(en);

  auto* lst = app.add_subcommand("list", "builtin protocols and closed forms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "qbf: error: " << e.what() << "\n";
    return kConfig;
  }

  CommandResult res;
  try {
    if (!p_list.empty()) cfg.p = parse_p_list(p_list);
    if (!p_grid.empty()) cfg.p = parse_p_grid(p_grid);
    if (!seed_text.empty()) {
      const auto s = parse_seed(trim(seed_text));
      if (!s) throw ConfigError("bad seed '" + seed_text + "'");
      cfg.seed = *s;
    }
    cfg.budget = parse_budget(budget_text);
  } catch (const ConfigError& e) {
    err << "qbf: error: " << e.what() << "\n";
    return kConfig;
  }

  if (*sim) {
    cfg.command = "simulate";
    res = cmd_simulate(cfg);
  } else if (*comp) {
    cfg.command = "compile-spb";
    res = cmd_compile_spb(cfg);
  } else if (*ver) {
    cfg.command = "verify-spb";
    res = cmd_verify_spb(cfg);
  } else if (*en) {
    cfg.command = "enumerate";
    res = cmd_enumerate(cfg);
  } else if (*lst) {
    json j{{"protocols", builtin_protocol_names()}, {"closed_forms", closed_form_names()}};
    res.output = dump(j);
  }

  if (!res.output.empty()) {
    if (cfg.out.empty()) {
      out << res.output;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) {
        err << "qbf: error: cannot write '" << cfg.out << "'\n";
        return kConfig;
      }
      f << res.output;
    }
  }
  if (!res.diagnostic.empty()) err << "qbf: " << (res.exit_code == kOk ? "" : "error: ") << res.diagnostic << "\n";
  return res.exit_code;
}

}  // namespace qbf::cli
