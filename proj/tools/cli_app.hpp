#pragma once

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clockforge/clockforge.hpp"

namespace clockforge::cli {

enum ExitCode { kOk = 0, kDomainFailure = 1, kInputError = 2 };

/// Unreadable files and bad flag values.
class InputError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Rational parse_frequency_flag(const std::string& text, const std::string& flag) {
  try {
    auto r = Rational::parse(text);
    if (!r.is_positive()) throw InputError(flag + " must be positive");
    return r;
  } catch (const InputError&) {
    throw;
  } catch (const Error&) {
    throw InputError(flag + ": '" + text + "' is not a frequency in Hz");
  }
}

inline JensenOptions jensen_options_from_env() {
  JensenOptions opt;
  if (const char* s = std::getenv("CLOCKFORGE_MAX_SUBSETS"); s && *s) {
    char* end = nullptr;
    errno = 0;
    auto v = std::strtoull(s, &end, 10);
    if (errno != 0 || *end != '\0' || v == 0)
      throw InputError("CLOCKFORGE_MAX_SUBSETS must be a positive integer, got '" + std::string(s) + "'");
    opt.max_subsets = v;
  }
  return opt;
}

inline std::string join_periods(const std::vector<TimerPeriod>& ps, TimeUnit unit) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? ", " : "") + format_period(ps[i], unit);
  return s;
}

inline AllocationResult run_algorithm(Algorithm a, const TimerSet& reduced, std::size_t hw,
                                      const std::optional<Rational>& fixed, std::ostream& err) {
  switch (a) {
    case Algorithm::jensen: {
      auto opt = jensen_options_from_env();
      if (reduced.size() > kJensenWarnSize && hw >= 2)
        err << "warning: " << reduced.size() << " timers after reduction; the stage graph grows as 2^n\n";
      return optimal_partition(reduced, hw, opt);
    }
    case Algorithm::greedy: return greedy_allocate(reduced, hw);
    case Algorithm::global_gcd: return global_gcd_allocate(reduced);
    case Algorithm::fixed: return fixed_frequency_allocate(reduced, *fixed);
    case Algorithm::brute_force: return brute_force_optimal(reduced, hw);
  }
  throw ValidationError("unknown algorithm");
}

inline void print_allocation(const AllocationResult& a, TimeUnit unit, std::ostream& out) {
  out << "algorithm: " << to_string(a.algorithm) << "  hardware timers: " << a.hw_count << " (" << a.unused_hw
      << " unused)\n";
  out << std::left << std::setw(7) << "timer" << std::setw(14) << "gcd" << std::setw(16) << "frequency"
      << "members\n";
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    const auto& c = a.clusters[i];
    out << std::left << std::setw(7) << i << std::setw(14) << format_period(c.gcd, unit) << std::setw(16)
        << format_hz(c.frequency_hz) << join_periods(c.members, unit) << "\n";
  }
  out << "W = " << format_hz(a.weight) << " (" << a.weight << " Hz)\n";
}

struct Common {
  bool json = false;
};

inline int cmd_separate(const std::string& timers_file, const Common& c, std::ostream& out) {
  auto req = parse_timer_requirements(read_file(timers_file));
  auto part = separate_into_multiples(req.timer_set());
  if (c.json) {
    out << to_json(part, req.unit).dump() << "\n";
    return kOk;
  }
  out << part.groups.size() << " groups of multiples\n";
  out << std::left << std::setw(12) << "minimum" << "members\n";
  for (const auto& g : part.groups)
    out << std::left << std::setw(12) << format_period(g.minimum, req.unit) << join_periods(g.members, req.unit)
        << "\n";
  return kOk;
}

inline int cmd_allocate(const std::string& timers_file, std::size_t hw, const std::string& algorithm,
                        const std::optional<std::string>& fixed_freq, const Common& c, std::ostream& out,
                        std::ostream& err) {
  auto alg = parse_algorithm(algorithm);
  std::optional<Rational> fixed;
  if (alg == Algorithm::fixed) {
    if (!fixed_freq) throw InputError("--fixed-freq is required with --algorithm fixed");
    fixed = parse_frequency_flag(*fixed_freq, "--fixed-freq");
  } else if (fixed_freq) {
    throw InputError("--fixed-freq only applies to --algorithm fixed");
  }
  if (hw == 0) throw InputError("--hw must be at least 1");
  auto req = parse_timer_requirements(read_file(timers_file));
  auto reduced = reduced_set(separate_into_multiples(req.timer_set()));
  auto result = run_algorithm(alg, reduced, hw, fixed, err);
  if (c.json)
    out << to_json(result).dump() << "\n";
  else
    print_allocation(result, req.unit, out);
  return kOk;
}

inline int cmd_compare(const std::string& timers_file, std::size_t hw, const std::string& fixed_freq,
                       const Common& c, std::ostream& out, std::ostream& err) {
  if (hw == 0) throw InputError("--hw must be at least 1");
  auto fixed = parse_frequency_flag(fixed_freq, "--fixed-freq");
  auto req = parse_timer_requirements(read_file(timers_file));
  auto reduced = reduced_set(separate_into_multiples(req.timer_set()));

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::vector<std::string> lines;
  for (auto a : {Algorithm::jensen, Algorithm::greedy, Algorithm::global_gcd, Algorithm::fixed}) {
    nlohmann::ordered_json row;
    row["algorithm"] = std::string(to_string(a));
    std::ostringstream line;
    line << std::left << std::setw(12) << to_string(a);
    try {
      auto r = run_algorithm(a, reduced, hw, fixed, err);
      row["hw_used"] = r.clusters.size();
      row["frequencies_hz"] = nlohmann::ordered_json::array();
      std::string fs;
      for (const auto& cl : r.clusters) {
        row["frequencies_hz"].push_back(nlohmann::ordered_json(detail::rational_to_json(cl.frequency_hz)));
        fs += (fs.empty() ? "" : ", ") + format_hz(cl.frequency_hz);
      }
      row["weight_hz"] = detail::rational_to_json(r.weight);
      line << std::setw(6) << r.clusters.size() << std::setw(16) << format_hz(r.weight) << fs;
    } catch (const ResolutionError& e) {
      row["error"] = e.what();
      line << "infeasible: " << e.what();
    }
    rows.push_back(std::move(row));
    lines.push_back(line.str());
  }
  if (c.json) {
    nlohmann::ordered_json doc;
    doc["input"] = {{"timers", timers_file}, {"hw", hw}, {"reduced_ns", reduced.ns_values()}};
    doc["rows"] = std::move(rows);
    out << doc.dump() << "\n";
    return kOk;
  }
  out << "reduced set: " << join_periods(reduced.periods(), req.unit) << "  hardware timers: " << hw << "\n";
  out << std::left << std::setw(12) << "algorithm" << std::setw(6) << "hw" << std::setw(16) << "W"
      << "per-timer frequencies\n";
  for (const auto& l : lines) out << l << "\n";
  return kOk;
}

inline int cmd_enumerate(const std::string& desc_file, const std::string& constraints_file, std::size_t limit,
                         const std::optional<std::string>& max_freq, const Common&, std::ostream& out,
                         std::ostream& err) {
  auto g = parse_description(read_file(desc_file));
  auto cs = parse_constraint_set(read_file(constraints_file));
  if (limit == 0) throw InputError("--limit must be at least 1");
  EnumerateOptions opt;
  opt.limit = limit;
  if (max_freq) opt.max_freq = parse_frequency_flag(*max_freq, "--max-freq");
  auto res = enumerate_configurations(g, cs, opt);
  auto eff = g.with_constraints(cs.by_sink());
  for (const auto& cfg : res.configurations) out << to_json(eff, cfg).dump() << "\n";
  err << res.configurations.size() << (res.configurations.size() == 1 ? " configuration" : " configurations");
  if (res.truncated) err << " (truncated from " << res.total << ")";
  err << "\n";
  return kOk;
}

inline int cmd_validate(const std::string& desc_file, const std::string& config_file,
                        const std::optional<std::string>& constraints_file, const Common& c, std::ostream& out) {
  auto g = parse_description(read_file(desc_file));
  if (constraints_file) g = g.with_constraints(parse_constraint_set(read_file(*constraints_file)).by_sink());
  std::istringstream in(read_file(config_file));
  std::string line;
  std::size_t lineno = 0, checked = 0, failed = 0;
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Configuration cfg;
    try {
      cfg = parse_configuration(g, line);
    } catch (const ValidationError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
    ++checked;
    auto v = validate_configuration(g, cfg);
    if (!v.empty()) ++failed;
    nlohmann::ordered_json r;
    r["line"] = lineno;
    r["violations"] = nlohmann::ordered_json::array();
    for (const auto& x : v) r["violations"].push_back({{"vertex", x.vertex}, {"message", x.message}});
    results.push_back(std::move(r));
    if (!c.json) {
      if (v.empty())
        out << "line " << lineno << ": ok\n";
      else
        for (const auto& x : v) out << "line " << lineno << ": " << x.str() << "\n";
    }
  }
  if (checked == 0) throw InputError("no configuration in '" + config_file + "'");
  if (c.json) {
    nlohmann::ordered_json doc;
    doc["checked"] = checked;
    doc["failed"] = failed;
    doc["results"] = std::move(results);
    out << doc.dump() << "\n";
  }
  return failed ? kDomainFailure : kOk;
}

inline int cmd_export_dot(const std::string& desc_file, const Common& c, std::ostream& out) {
  auto g = parse_description(read_file(desc_file));
  if (c.json)
    out << nlohmann::ordered_json{{"dot", export_dot(g)}}.dump() << "\n";
  else
    out << export_dot(g);
  return kOk;
}

/// Runs one invocation; `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hardware timer allocation and clock-tree configuration search", "clockforge"};
  app.require_subcommand(1);
  Common common;

  std::string timers, desc, constraints, config, algorithm, fixed_default = "4000000";
  std::optional<std::string> fixed, max_freq, constraints_opt;
  std::size_t hw = 0, limit = 10000;

  auto json_flag = [&](CLI::App* sub) { sub->add_flag("--json", common.json, "Machine-readable output"); };

  auto* sep = app.add_subcommand("separate", "Split timers into sets of multiples");
  sep->add_option("--timers", timers, "Timer requirements file")->required();
  json_flag(sep);

  auto* alloc = app.add_subcommand("allocate", "Assign timers to hardware timers");
  alloc->add_option("--timers", timers, "Timer requirements file")->required();
  alloc->add_option("--hw", hw, "Number of hardware timers")->required();
  alloc->add_option("--algorithm", algorithm, "jensen | greedy | gcd | fixed")->required();
  alloc->add_option("--fixed-freq", fixed, "Imposed frequency (Hz) for --algorithm fixed");
  json_flag(alloc);

  auto* cmp = app.add_subcommand("compare", "Compare allocation strategies");
  cmp->add_option("--timers", timers, "Timer requirements file")->required();
  cmp->add_option("--hw", hw, "Number of hardware timers")->required();
  cmp->add_option("--fixed-freq", fixed_default, "Fixed-frequency baseline in Hz")->capture_default_str();
  json_flag(cmp);

  auto* en = app.add_subcommand("enumerate", "Enumerate clock-tree configurations");
  en->add_option("--hw-desc", desc, "Hardware description file")->required();
  en->add_option("--constraints", constraints, "Constraint file")->required();
  en->add_option("--limit", limit, "Maximum number of configurations")->capture_default_str();
  en->add_option("--max-freq", max_freq, "Override the frequency upper bound (Hz)");
  json_flag(en);

  auto* val = app.add_subcommand("validate", "Check configurations (JSON lines)");
  val->add_option("--hw-desc", desc, "Hardware description file")->required();
  val->add_option("--config", config, "Configuration file, one JSON object per line")->required();
  val->add_option("--constraints", constraints_opt, "Constraint file overriding the description");
  json_flag(val);

  auto* dot = app.add_subcommand("export-dot", "Render the clock graph as Graphviz DOT");
  dot->add_option("--hw-desc", desc, "Hardware description file")->required();
  json_flag(dot);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sep) return cmd_separate(timers, common, out);
    if (*alloc) return cmd_allocate(timers, hw, algorithm, fixed, common, out, err);
    if (*cmp) return cmd_compare(timers, hw, fixed ? *fixed : fixed_default, common, out, err);
    if (*en) return cmd_enumerate(desc, constraints, limit, max_freq, common, out, err);
    if (*val) return cmd_validate(desc, config, constraints_opt, common, out);
    if (*dot) return cmd_export_dot(desc, common, out);
  } catch (const DescriptionError& e) {
    for (const auto& d : e.diagnostics()) err << "error: " << d.str() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kInputError;
}

}  // namespace clockforge::cli
