// SPDX-License-Identifier: Apache-2.0
#include "vplat/replay.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vplat/annotations.hpp"
#include "vplat/feature_ops.hpp"
#include "vplat/names.hpp"
#include "vplat/sync.hpp"

namespace vplat {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p, ErrorCode code) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(code, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_number(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string entry_name(const CloneLogEntry& e) {
  return "clone log line " + std::to_string(e.line) + " (" + e.feature + " " + e.source_repo + " -> " +
         e.target_repo + ")";
}

void run_clone_directive(Workspace& ws, const CloneLogEntry& e) {
  auto repo = [&](const std::string& name) {
    auto id = ws.tree.find_child(ws.tree.root(), name);
    if (!id) fail(ErrorCode::CloneLogEntryInvalid, entry_name(e) + ": repository '" + name + "' not found");
    return *id;
  };
  const AssetId source_repo = repo(e.source_repo);
  const AssetId target_repo = repo(e.target_repo);
  FeatureId source;
  try {
    source = ws.resolve_feature(e.source_repo + "/" + e.feature);
  } catch (const Error&) {
    fail(ErrorCode::CloneLogEntryInvalid, entry_name(e) + ": feature '" + e.feature + "' not found");
  }
  (void)source_repo;
  auto target_model = ws.model_in_scope(target_repo);
  if (!target_model) {
    fail(ErrorCode::CloneLogEntryInvalid, entry_name(e) + ": '" + e.target_repo + "' has no feature model");
  }
  const FeatureId target_root = ws.features.model(*target_model).root;
  ops::clone_feature(ws, source, target_root, CloneFeatureOptions{true});
}

}  // namespace

std::vector<HistoryStep> parse_history_manifest(std::string_view text, const fs::path& base_dir) {
  std::vector<HistoryStep> steps;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "history line " + std::to_string(i + 1);
    if (trim(lines[i]).empty() || lines[i][0] == '#') continue;
    const auto f = split(lines[i], '\t');
    if (i == 0 && !f.empty() && !is_number(f[0])) continue;  // header
    if (f.size() < 2 || f.size() > 3 || !is_number(f[0]) || f[1].empty()) {
      fail(ErrorCode::BadManifest, where + ": expected index<TAB>snapshotDir[<TAB>ref]");
    }
    HistoryStep s;
    s.index = std::stoull(f[0]);
    if (!steps.empty() && s.index <= steps.back().index) {
      fail(ErrorCode::BadManifest, where + ": indices must increase");
    }
    fs::path dir(f[1]);
    s.snapshot_dir = dir.is_absolute() ? dir : base_dir / dir;
    s.ref = f.size() == 3 && !f[2].empty() ? f[2] : f[0];
    steps.push_back(std::move(s));
  }
  if (steps.empty()) fail(ErrorCode::BadManifest, "history has no steps");
  return steps;
}

std::vector<HistoryStep> read_history_manifest(const fs::path& manifest) {
  return parse_history_manifest(slurp(manifest, ErrorCode::BadManifest), manifest.parent_path());
}

std::vector<CloneLogEntry> parse_clone_log(std::string_view text) {
  std::vector<CloneLogEntry> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || lines[i][0] == '#') continue;
    const auto f = split(lines[i], '\t');
    if (i == 0 && f.size() == 5 && f[0] == "feature") continue;  // header
    if (f.size() != 5 || std::any_of(f.begin(), f.end(), [](const std::string& x) { return x.empty(); })) {
      fail(ErrorCode::CloneLogEntryInvalid, "clone log line " + std::to_string(i + 1) + ": expected 5 fields");
    }
    out.push_back(CloneLogEntry{f[0], f[1], f[2], f[3], f[4], i + 1});
  }
  return out;
}

std::vector<CloneLogEntry> read_clone_log(const fs::path& path) {
  return parse_clone_log(slurp(path, ErrorCode::CloneLogEntryInvalid));
}

std::vector<PropagationCandidate> detect_propagations(const Workspace& ws) {
  std::vector<PropagationCandidate> out;
  std::set<std::pair<FeatureId, FeatureId>> pairs;
  for (const auto& t : ws.traces.feature_traces()) {
    if (ws.features.exists(t.source) && ws.features.exists(t.clone)) pairs.emplace(t.source, t.clone);
  }
  std::set<std::pair<AssetId, AssetId>> seen;
  for (const auto& [sf, tf] : pairs) {
    const auto source_owner = ws.model_owner(ws.features.get(sf).model);
    if (!source_owner || !ws.model_owner(ws.features.get(tf).model)) continue;
    for (AssetId target : ws.mapped_assets(tf)) {
      for (AssetId source : ws.traces.linked(target)) {
        if (!ws.tree.exists(source) || !ws.tree.attached(source)) continue;
        if (source != *source_owner && !ws.tree.is_ancestor(*source_owner, source)) continue;
        const auto tr = ws.traces.latest_trace(source, target);
        if (ws.tree.get(source).version <= tr->version_at) continue;
        if (!seen.emplace(source, target).second) continue;
        out.push_back(PropagationCandidate{source, target, sf, tf});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.target, a.source) < std::tie(b.target, b.source);
  });
  return out;
}

ReplayResult replay(const std::vector<HistoryStep>& steps, const std::vector<CloneLogEntry>& clone_log,
                    const ReplayOptions& options) {
  ReplayResult result;
  Workspace& ws = result.workspace;
  bool first = true;
  for (const auto& step : steps) {
    try {
      const DirSnapshot snap = read_directory(step.snapshot_dir);
      if (first) {
        ws.layout = detect_layout(snap);
        if (ws.layout == Layout::SingleRepo) ws.repo_name = options.repo_name;
        first = false;
      }
      std::set<AssetId> pre_existing;
      for (const auto& [id, a] : ws.tree.all()) {
        if (ws.tree.attached(id)) pre_existing.insert(id);
      }
      const std::size_t log_start = ws.log.size();
      std::vector<PropagationCandidate> found;

      ApplyHooks hooks;
      hooks.clone_directives = [&](Workspace& w) {
        for (const auto& e : clone_log) {
          if (e.target_ref == step.ref) run_clone_directive(w, e);
        }
      };
      hooks.propagations = [&](Workspace& w) {
        found = detect_propagations(w);
        if (!options.apply_propagations) return;
        std::set<std::pair<FeatureId, FeatureId>> done;
        for (const auto& c : found) {
          if (done.emplace(c.source_feature, c.target_feature).second) {
            ops::propagate_feature(w, c.source_feature, c.target_feature);
          }
        }
      };
      apply_change_set(ws, diff_snapshots(snapshot_of(ws), snap), hooks);

      // Mappings added to assets that already existed before this step.
      std::set<std::string> late_features;
      for (std::size_t i = log_start; i < ws.log.size(); ++i) {
        auto& e = ws.log[i];
        if (e.op != opname::kMapAssetToFeature || e.args.size() < 2) continue;
        auto id = ws.tree.try_resolve(AssetPath::parse(e.args[0]));
        if (id && pre_existing.count(*id)) {
          e.late = true;
          late_features.insert(e.args[1]);
        }
      }
      for (std::size_t i = log_start; i < ws.log.size() && !late_features.empty(); ++i) {
        auto& e = ws.log[i];
        if ((e.op != opname::kCloneFeature && e.op != opname::kPropagateFeature) || e.args.empty()) continue;
        try {
          const FeatureId f = ws.resolve_feature(e.args[0]);
          for (FeatureId g : ws.features.subtree(f)) {
            if (late_features.count(ws.features.get(g).name)) e.late = true;
          }
        } catch (const Error&) {
        }
      }
      for (const auto& c : found) result.propagations.emplace_back(step.index, c);
    } catch (const Error& err) {
      result.error = err;
      result.failed_step = step.index;
      return result;
    }
  }
  return result;
}

}  // namespace vplat
