// Acceptance checks, one PASS/FAIL line each. Exit status 1 if any fails.

#include <sys/resource.h>

#include <chrono>
#include <functional>
#include <iostream>

#include "cli_app.hpp"
#include "support.hpp"

using namespace clockforge;
using testsupport::Rng;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

nlohmann::json cli_json(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(std::move(args), out, err);
  check(code == 0, "cli exit " + std::to_string(code) + ": " + err.str());
  return nlohmann::json::parse(out.str());
}

std::vector<std::uint64_t> us(std::vector<std::uint64_t> xs) {
  for (auto& x : xs) x *= 1000;
  return xs;
}

Rational rat(const nlohmann::json& j) { return detail::rational_from_json(j, ""); }

std::vector<std::vector<std::uint64_t>> cluster_members(const AllocationResult& a) {
  std::vector<std::vector<std::uint64_t>> out;
  for (const auto& c : a.clusters) {
    std::vector<std::uint64_t> m;
    for (auto p : c.members) m.push_back(p.ns());
    out.push_back(m);
  }
  return out;
}

TimerSet zigbee_reduced() {
  auto ts = parse_timer_requirements(testsupport::slurp(testsupport::data_path("zigbee.json"))).timer_set();
  return reduced_set(separate_into_multiples(ts));
}

std::string criterion1() {
  auto t0 = Clock::now();
  auto j = cli_json({"separate", "--timers", testsupport::data_path("zigbee.json"), "--json"});
  double dt = seconds_since(t0);
  std::vector<std::uint64_t> minima = us({128, 192, 320, 1000});
  std::vector<std::vector<std::uint64_t>> members = {
      us({640, 768, 15360, 30720, 64000, 122880, 491520, 1280000, 1600000, 10000000, 15360000}),
      us({960, 1344}),
      us({2240, 1000000}),
      us({3000, 9000, 254000}),
  };
  check(j["groups"].size() == 4, "expected 4 groups");
  for (std::size_t i = 0; i < 4; ++i) {
    check(j["groups"][i]["minimum_ns"].get<std::uint64_t>() == minima[i], "group minimum " + std::to_string(i));
    check(j["groups"][i]["members_ns"].get<std::vector<std::uint64_t>>() == members[i],
          "group members " + std::to_string(i));
  }
  check(dt < 1.0, "took " + std::to_string(dt) + " s");
  return "4 groups, " + std::to_string(dt) + " s";
}

std::string criterion2() {
  auto t0 = Clock::now();
  auto j = cli_json({"allocate", "--timers", testsupport::data_path("zigbee.json"), "--hw", "2", "--algorithm",
                     "jensen", "--json"});
  double dt = seconds_since(t0);
  check(j["clusters"].size() == 2, "expected 2 clusters");
  check(j["clusters"][0]["members_ns"].get<std::vector<std::uint64_t>>() == us({128, 192, 320}), "cluster 0");
  check(j["clusters"][0]["gcd_ns"].get<std::uint64_t>() == 64000, "gcd 64 us");
  check(rat(j["clusters"][0]["frequency_hz"]) == Rational(15625), "15625 Hz");
  check(j["clusters"][1]["members_ns"].get<std::vector<std::uint64_t>>() == us({1000}), "cluster 1");
  check(rat(j["clusters"][1]["frequency_hz"]) == Rational(1000), "1000 Hz");
  check(rat(j["weight_hz"]) == Rational(16625), "W = 16625");
  check(dt < 1.0, "took " + std::to_string(dt) + " s");
  return "W = 16625 Hz, " + std::to_string(dt) + " s";
}

std::string criterion3() {
  auto red = zigbee_reduced();
  auto g = greedy_allocate(red, 2);
  check(g.frequency_multiset() == std::vector<Rational>{Rational(15625), Rational(125000)}, "greedy multiset");
  check(cluster_members(g) == std::vector<std::vector<std::uint64_t>>{us({192, 1000}), us({128, 320})},
        "greedy trace");
  check(g.weight == Rational(140625), "greedy W");
  check(global_gcd_allocate(red).weight == Rational(125000), "global gcd W");
  check(fixed_frequency_allocate(red, Rational(4000000)).weight == Rational(4000000), "fixed W");
  return "greedy 140625, gcd 125000, fixed 4000000";
}

std::string criterion4() {
  Rng rng(2024);
  auto t0 = Clock::now();
  for (int c = 0; c < 200; ++c) {
    auto n = rng.uniform(1, 10);
    auto hw = rng.uniform(2, 3);
    auto red = testsupport::random_reduced(rng, n);
    auto j = optimal_partition(red, hw);
    auto b = brute_force_optimal(red, hw);
    check(j.weight == b.weight, "case " + std::to_string(c) + " differs");
  }
  double dt = seconds_since(t0);
  check(dt < 300.0, "took " + std::to_string(dt) + " s");
  return "200 sets, " + std::to_string(dt) + " s";
}

std::vector<ClockGraph> acceptance_graphs() {
  Rng rng(77);
  testsupport::GraphShape shape;
  shape.sources_max = 3;
  shape.internal_min = 5;
  shape.internal_max = 10;
  std::vector<ClockGraph> out;
  while (out.size() < 25) {
    auto g = testsupport::random_clock_graph(rng, shape);
    if (testsupport::register_space(g) < 2000) continue;
    if (enumerate_configurations(g).configurations.empty()) continue;
    out.push_back(std::move(g));
  }
  return out;
}

std::string criterion5(const std::vector<ClockGraph>& graphs) {
  auto t0 = Clock::now();
  std::size_t points = 0, configs = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    check(testsupport::register_space(g) <= 1000000, "register space too large");
    auto bf = testsupport::brute_force_configurations(g);
    check(bf.oracle_disagreements == 0, "validator disagrees with direct evaluation on graph " + std::to_string(i));
    auto res = enumerate_configurations(g);
    check(!res.truncated, "truncated");
    check(testsupport::as_set(res) == bf.projected, "graph " + std::to_string(i) + " differs from brute force");
    for (const auto& cfg : res.configurations)
      check(validate_configuration(g, cfg).empty(), "invalid configuration on graph " + std::to_string(i));
    points += bf.points;
    configs += res.configurations.size();
  }
  double dt = seconds_since(t0);
  check(dt < 600.0, "took " + std::to_string(dt) + " s");
  return std::to_string(graphs.size()) + " graphs, " + std::to_string(points) + " assignments, " +
         std::to_string(configs) + " configurations, " + std::to_string(dt) + " s";
}

std::string criterion6(const std::vector<ClockGraph>& graphs) {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    EnumerateOptions off;
    off.use_upper_bound = false;
    check(enumerate_configurations(graphs[i]).configurations ==
              enumerate_configurations(graphs[i], off).configurations,
          "graph " + std::to_string(i));
  }
  return std::to_string(graphs.size()) + " graphs";
}

std::string criterion7() {
  Rng rng(14);
  auto red = testsupport::random_reduced(rng, 14);
  check(red.size() == 14, "generator size");
  auto t0 = Clock::now();
  auto a = optimal_partition(red, 3);
  double dt = seconds_since(t0);
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  double rss_mb = static_cast<double>(ru.ru_maxrss) / 1024.0;  // ru_maxrss is KiB on Linux
  check(a.weight == testsupport::oracle_min_weight(red.ns_values(), 3), "not optimal");
  check(dt < 120.0, "took " + std::to_string(dt) + " s");
  check(rss_mb < 4096.0, "max RSS " + std::to_string(rss_mb) + " MB");
  return std::to_string(dt) + " s, max RSS " + std::to_string(rss_mb) + " MB";
}

std::string criterion8() {
  Rng rng(8);
  const int n = 1000;
  for (int c = 0; c < n; ++c) {
    // separation
    auto xs = testsupport::random_periods(rng, rng.uniform(1, 40));
    std::vector<TimerPeriod> ps;
    for (auto x : xs) ps.emplace_back(x);
    auto part = separate_into_multiples(TimerSet(ps));
    auto oracle = testsupport::oracle_groups(xs);
    check(part.groups.size() == oracle.size(), "group count");
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      check(part.groups[i].minimum.ns() == oracle[i].first, "group minimum");
      std::vector<std::uint64_t> m;
      for (auto p : part.groups[i].members) m.push_back(p.ns());
      check(m == oracle[i].second, "group members");
    }
    check(is_antichain(reduced_set(part)), "reduced set not an antichain");

    // allocation
    auto red = testsupport::random_reduced(rng, rng.uniform(1, 7));
    auto hw = rng.uniform(1, 4);
    auto opt = optimal_partition(red, hw);
    check(opt.weight == testsupport::oracle_min_weight(red.ns_values(), std::min<std::size_t>(hw, red.size())),
          "jensen not minimal");
    check(opt.weight <= greedy_allocate(red, hw).weight, "greedy beats jensen");
    check(opt.weight <= global_gcd_allocate(red).weight, "gcd beats jensen");
    check(opt.clusters.size() <= hw, "too many clusters");
    for (const auto& cl : opt.clusters)
      for (auto m : cl.members) check(m.ns() % cl.gcd.ns() == 0, "member not a multiple of its clock");

    // configuration search
    auto g = testsupport::random_clock_graph(rng);
    auto res = enumerate_configurations(g);
    for (const auto& cfg : res.configurations) check(validate_configuration(g, cfg).empty(), "unsound configuration");
    check(parse_description(serialize_description(g)) == g, "description round trip");
  }
  return std::to_string(n) + " cases per invariant";
}

}  // namespace

int main() {
  std::vector<ClockGraph> graphs;
  try {
    graphs = acceptance_graphs();
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << "\n";
    return 1;
  }
  std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"1 separation of the ZigBee timers", criterion1},
      {"2 optimal allocation of the ZigBee timers", criterion2},
      {"3 baseline allocations", criterion3},
      {"4 optimal allocation matches exhaustive search", criterion4},
      {"5 configuration search matches exhaustive search", [&] { return criterion5(graphs); }},
      {"6 pruning leaves results unchanged", [&] { return criterion6(graphs); }},
      {"7 fourteen timers on three hardware timers", criterion7},
      {"8 invariants", criterion8},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    try {
      auto detail = fn();
      std::cout << "PASS " << name << " (" << detail << ")" << std::endl;
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << ": " << e.what() << std::endl;
      ++failed;
    }
  }
  return failed == 0 ? 0 : 1;
}
