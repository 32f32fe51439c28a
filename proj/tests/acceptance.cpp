// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "vplat/annotations.hpp"
#include "vplat/metrics.hpp"
#include "vplat/persistence.hpp"
#include "vplat/replay.hpp"

#ifndef VPLAT_PROPERTY_TEST
#error "VPLAT_PROPERTY_TEST must name the property test executable"
#endif

namespace {

namespace fs = std::filesystem;
using namespace vplat;

// Failed checks of the criterion being evaluated.
struct Checks {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Criterion {
  int number;
  const char* title;
  double limit_seconds;
  std::function<void(Checks&)> body;
};

constexpr double kBreakEvenTarget = 54.9;
constexpr double kBreakEvenTolerance = 0.1;
constexpr int kFeatureModelRoundTrips = 500;

CostModel at(double t) {
  CostModel m;  // 900 s per location, 900 s per detection, omission factor 10
  m.cost_per_invocation = t;
  return m;
}

void break_even(Checks& c) {
  const UsageCounts u = aggregate_counts(724, 39, 61, 7);
  const double t = break_even_seconds(u, at(60));
  std::ostringstream got;
  got << "break-even " << t;
  c.expect(std::fabs(t - kBreakEvenTarget) <= kBreakEvenTolerance, got.str());
  c.expect(total_benefit(u, at(54)) > 0, "benefit at t=54 is not positive");
  c.expect(total_benefit(u, at(56)) < 0, "benefit at t=56 is not negative");
}

void calculator(Checks& c) {
  const auto first = testing::run_calculator();
  const auto second = testing::run_calculator();
  const auto files = serialize_state(first.ws);
  c.expect(files == serialize_state(second.ws), "two runs serialize differently");
  const fs::path golden = fs::path(VPLAT_GOLDEN_DIR) / "calculator";
  std::size_t on_disk = 0;
  for (const auto& entry : fs::directory_iterator(golden)) {
    ++on_disk;
    const std::string name = entry.path().filename().string();
    c.expect(files.count(name) && files.at(name) == testing::read_file(entry.path()), "golden mismatch: " + name);
  }
  c.expect(on_disk == files.size(), "golden file count differs");

  testing::TempDir dir;
  save_workspace(first.ws, dir.path());
  for (const auto& [name, bytes] : files) {
    c.expect(testing::read_file(dir.path() / kStateDir / name) == bytes, "saved .vp differs: " + name);
  }

  const auto& r = first;
  c.expect(r.global_before_divide == 3 && r.global_after_divide == 4, "AddAsset divide is not 3 -> 4");
  c.expect(r.traces_after_clone_asset == 1 && r.clone_version_at_clone == r.divide_version_at_clone,
           "CloneAsset divide trace");
  const Workspace& ws = r.ws;
  c.expect(ws.resolve_feature("SC/UNASSIGNED/DIV") != FeatureId{}, "DIV not under SC/UNASSIGNED");
  c.expect(r.divide_version_before_propagation == 8 && r.clone_version_before_propagation == 4,
           "PropagateAsset versions are not 8 vs 4");
  c.expect(r.model_before_exp == 1 && r.model_after_exp == 2, "AddFeature EXP is not model 1 -> 2");
  c.expect(ws.traces.is_clone(ws.resolve_asset("BC/src/Operators.js"), ws.resolve_asset("SC/src/Operators.js")),
           "Operators.js container was not sliced into SC");
  c.expect(ws.traces.is_clone(ws.resolve_feature("BC/EXP"), ws.resolve_feature("SC/EXP")), "EXP not cloned");
}

void properties(Checks& c) {
  const std::string command = std::string("\"") + VPLAT_PROPERTY_TEST + "\" --gtest_brief=1 > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  c.expect(status == 0, "property suite failed (status " + std::to_string(status) + ")");
}

void parsers(Checks& c) {
  testing::Rng rng(2024);
  int round_trips = 0;
  for (int i = 0; i < kFeatureModelRoundTrips; ++i) {
    const auto doc = testing::random_feature_model(rng);
    const std::string text = serialize_feature_model(doc);
    const auto back = parse_feature_model_file(text);
    if (back == doc && serialize_feature_model(back) == text) ++round_trips;
  }
  c.expect(round_trips == kFeatureModelRoundTrips,
           std::to_string(kFeatureModelRoundTrips - round_trips) + " feature models did not round-trip");

  for (const auto& k : testing::annotation_corpus()) {
    try {
      const auto spans = parse_annotations(k.text);
      c.expect(!k.error, std::string(k.name) + ": accepted, expected " + std::string(error_name(*k.error)));
      if (!k.error) c.expect(spans.size() == k.top_level_spans, std::string(k.name) + ": span count");
    } catch (const Error& e) {
      c.expect(k.error && e.code() == *k.error, std::string(k.name) + ": " + e.what());
    }
  }

  const auto doc = parse_feature_model_file("BC\n\txor PRE\n\tPOST\n\t\tor A\n\t\tB\n");
  c.expect(doc.root.group == GroupKind::Xor, "first-child keyword did not set the root group");
  c.expect(doc.root.children[1].group == GroupKind::Or, "nested keyword did not set POST's group");
  c.expect(doc.root.children[0].group == GroupKind::And, "PRE should keep the And group");
  try {
    parse_feature_model_file("BC\n\tA\n\tor B\n");
    c.expect(false, "keyword on a later child was accepted");
  } catch (const Error& e) {
    c.expect(e.code() == ErrorCode::MisplacedGroupKeyword, e.what());
  }
}

void replay_determinism(Checks& c) {
  testing::TempDir dir;
  const auto h = testing::write_synthetic_history(dir.path());
  c.expect(h.steps == 10 && h.clone_entries == 5, "history is not 10 steps with 5 clone entries");
  const auto steps = read_history_manifest(h.manifest);
  const auto clones = read_clone_log(h.clone_log);
  const ReplayResult a = replay(steps, clones);
  const ReplayResult b = replay(steps, clones);
  if (a.error || b.error) {
    c.expect(false, std::string("replay failed: ") + (a.error ? a.error->what() : b.error->what()));
    return;
  }
  c.expect(serialize_state(a.workspace) == serialize_state(b.workspace), "serialized states differ");
  c.expect(a.workspace.log == b.workspace.log, "operator logs differ");
  std::vector<std::pair<std::string, std::string>> found;
  for (const auto& p : detect_propagations(a.workspace)) {
    found.emplace_back(a.workspace.asset_path(p.source), a.workspace.asset_path(p.target));
  }
  std::sort(found.begin(), found.end());
  c.expect(found == h.planted, "detected pairs differ from the planted ones");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "break-even reproduction", 1.0, break_even},
      {2, "calculator golden replay", 5.0, calculator},
      {3, "property suite", 60.0, properties},
      {4, "parser conformance", 10.0, parsers},
      {5, "replay determinism", 10.0, replay_determinism},
  };
  int failed = 0;
  for (const auto& k : criteria) {
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      k.body(checks);
    } catch (const std::exception& e) {
      checks.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= k.limit_seconds) {
      checks.failures.push_back("took " + std::to_string(seconds) + " s, limit " + std::to_string(k.limit_seconds));
    }
    const bool ok = checks.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %d: %s (%.3f s)\n", ok ? "PASS" : "FAIL", k.number, k.title, seconds);
    for (const auto& f : checks.failures) std::printf("  - %s\n", f.c_str());
  }
  return failed == 0 ? 0 : 1;
}
