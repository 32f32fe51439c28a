// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "vplat/annotations.hpp"
#include "vplat/asset_ops.hpp"
#include "vplat/error.hpp"
#include "vplat/feature_ops.hpp"
#include "vplat/metrics.hpp"
#include "vplat/names.hpp"
#include "vplat/persistence.hpp"
#include "vplat/replay.hpp"
#include "vplat/sync.hpp"

namespace vplat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Rows = std::vector<std::vector<std::string>>;

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Environment& env;
  bool as_json = false;
  std::string root_option;

  fs::path cwd() const { return env.cwd.empty() ? fs::current_path() : fs::path(env.cwd); }

  fs::path absolute(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : cwd() / path;
  }

  fs::path root() const {
    if (!root_option.empty()) return absolute(root_option);
    if (env.vplat_root) return absolute(*env.vplat_root);
    for (fs::path dir = fs::weakly_canonical(cwd());; dir = dir.parent_path()) {
      if (has_workspace(dir)) return dir;
      if (dir == dir.parent_path()) break;
    }
    fail(ErrorCode::NoWorkspace, "no .vp directory in " + cwd().string() + " or its ancestors");
  }

  // Prints rows as TSV, or as a JSON array of objects keyed by `keys`.
  void rows(const std::vector<std::string>& keys, const Rows& data) const {
    if (as_json) {
      json arr = json::array();
      for (const auto& r : data) {
        json obj = json::object();
        for (std::size_t i = 0; i < keys.size() && i < r.size(); ++i) obj[keys[i]] = r[i];
        arr.push_back(std::move(obj));
      }
      out << arr.dump(2) << '\n';
      return;
    }
    for (const auto& r : data) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
      out << '\n';
    }
  }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_entry(const Context& c, const OperatorApplication& e) {
  if (c.as_json) {
    c.out << json{{"op", e.op}, {"args", e.args}, {"result_version", e.result_version}, {"derived", e.derived},
                  {"late", e.late}}
                 .dump(2)
          << '\n';
    return;
  }
  c.out << e.op;
  for (const auto& a : e.args) c.out << '\t' << a;
  c.out << '\t' << e.result_version << '\n';
}

void print_log(const Context& c, const std::vector<OperatorApplication>& log) {
  if (c.as_json) {
    json arr = json::array();
    for (const auto& e : log) {
      arr.push_back(json{{"op", e.op}, {"args", e.args}, {"result_version", e.result_version},
                         {"derived", e.derived}, {"late", e.late}});
    }
    c.out << arr.dump(2) << '\n';
    return;
  }
  for (const auto& e : log) print_entry(c, e);
}

// Loads under the writer lock, runs `fn`, mirrors file changes onto the
// directory and saves.
int mutate(const Context& c, const std::function<void(Workspace&)>& fn) {
  const fs::path root = c.root();
  WorkspaceLock lock(root, true);
  Workspace ws = load_workspace(root);
  const DirSnapshot before = snapshot_of(ws);
  fn(ws);
  apply_to_directory(root, diff_snapshots(before, snapshot_of(ws)));
  save_workspace(ws, root);
  return 0;
}

// Runs a single logged operator and prints its log entry.
int mutate_op(const Context& c, const std::function<void(Workspace&)>& fn) {
  return mutate(c, [&](Workspace& ws) {
    const std::size_t n = ws.log.size();
    fn(ws);
    if (ws.log.size() > n) {
      print_entry(c, ws.log.back());
    } else if (!c.as_json) {
      c.out << "unchanged\n";
    } else {
      c.out << json{{"op", nullptr}}.dump() << '\n';
    }
  });
}

int inspect(const Context& c, const std::function<void(const Workspace&)>& fn) {
  const fs::path root = c.root();
  WorkspaceLock lock(root, false);
  fn(load_workspace(root));
  return 0;
}

std::set<AssetId> asset_ids(const Workspace& ws) {
  std::set<AssetId> s;
  for (const auto& [id, a] : ws.tree.all()) {
    if (ws.tree.attached(id)) s.insert(id);
  }
  return s;
}

std::set<FeatureId> feature_ids(const Workspace& ws) {
  std::set<FeatureId> s;
  for (const auto& [id, f] : ws.features.all()) s.insert(id);
  return s;
}

// Rows for assets and features created since the given id sets.
Rows created_rows(const Workspace& ws, const std::set<AssetId>& assets, const std::set<FeatureId>& features) {
  Rows rows;
  for (FeatureId f : feature_ids(ws)) {
    if (!features.count(f) && ws.model_owner(ws.features.get(f).model)) rows.push_back({"feature", ws.feature_path(f)});
  }
  for (AssetId a : ws.tree.subtree(ws.tree.root())) {
    if (!assets.count(a)) rows.push_back({"asset", ws.asset_path(a)});
  }
  return rows;
}

std::string pc_text(const Asset& a) { return a.pc.to_string(); }

AssetId build_asset(Workspace& ws, const std::string& name, AssetType type, const std::string& content) {
  const AssetId id = ws.tree.create_detached(name, type, content);
  if (type != AssetType::File) return id;
  std::function<AssetId(const BlockSpec&)> block = [&](const BlockSpec& spec) {
    const AssetId b = ws.tree.create_detached(spec.name, AssetType::Block, spec.content);
    ws.tree.get_mut(b).pc = spec.pc;
    for (const auto& child : spec.children) ws.tree.attach(block(child), b);
    return b;
  };
  for (const auto& spec : build_file_structure(content)) ws.tree.attach(block(spec), id);
  return id;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env) {
  Context c{out, err, env, false, {}};
  CLI::App app{"Virtual platform: asset trees, feature models and clone traces for clone-and-own development",
               "vplat"};
  app.require_subcommand(1);
  app.add_flag("--json", c.as_json, "Emit JSON instead of TSV");
  app.add_option("--root", c.root_option, "Workspace directory (default: $VPLAT_ROOT or nearest ancestor with .vp/)");

  std::function<int()> action;
  std::string a1, a2, a3;
  std::optional<std::string> content, content_file, new_name;
  std::string type_name = "File";
  bool apply = false;
  std::string clones_path, state_dir, repo_name = "repo";
  CostModel cost;
  std::string counts_text;

  auto* init = app.add_subcommand("init", "Scan a directory into a new workspace");
  init->add_option("dir", a1, "Directory to bind (default: --root or the working directory)");
  init->callback([&] {
    action = [&] {
      const fs::path root = !a1.empty() ? c.absolute(a1) : !c.root_option.empty() ? c.absolute(c.root_option) : c.cwd();
      if (has_workspace(root)) fail(ErrorCode::InvalidArgument, root.string() + " already has a workspace");
      WorkspaceLock lock(root, true);
      Workspace ws = scan(root);
      save_workspace(ws, root);
      c.rows({"key", "value"}, {{"assets", std::to_string(asset_ids(ws).size())},
                                {"feature_models", std::to_string(ws.features.models().size())},
                                {"global_version", std::to_string(ws.tree.global_version())},
                                {"operations", std::to_string(ws.log.size())}});
      return 0;
    };
  });

  auto* sync = app.add_subcommand("sync", "Reconcile filesystem changes into operator applications");
  sync->callback([&] {
    action = [&] {
      return mutate(c, [&](Workspace& ws) {
        const fs::path root = c.root();
        print_log(c, apply_change_set(ws, diff_snapshots(ws, root)));
      });
    };
  });

  auto* add_asset = app.add_subcommand("add-asset", "Create an asset under a target");
  add_asset->add_option("name", a1)->required();
  add_asset->add_option("target", a2)->required();
  add_asset->add_option("--type", type_name, "Repository, Folder, File, Class, Method or Block");
  add_asset->add_option("--content", content);
  add_asset->add_option("--content-file", content_file);
  add_asset->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        auto type = parse_asset_type(type_name);
        if (!type) fail(ErrorCode::InvalidArgument, "unknown asset type '" + type_name + "'");
        const std::string body = content_file ? read_text(c.absolute(*content_file)) : content.value_or("");
        const AssetId target = ws.resolve_asset(a2);
        ws.transact([&] {
          const AssetId id = build_asset(ws, a1, *type, body);
          ops::add_asset(ws, id, target);
        });
      });
    };
  });

  auto* change_asset = app.add_subcommand("change-asset", "Update an asset's payload or name");
  change_asset->add_option("path", a1)->required();
  change_asset->add_option("--content", content);
  change_asset->add_option("--content-file", content_file);
  change_asset->add_option("--name", new_name);
  change_asset->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        std::optional<std::string> body = content;
        if (content_file) body = read_text(c.absolute(*content_file));
        ops::change_asset(ws, ws.resolve_asset(a1), body, new_name);
      });
    };
  });

  auto* remove_asset = app.add_subcommand("remove-asset", "Remove an asset and its subtree");
  remove_asset->add_option("path", a1)->required();
  remove_asset->callback([&] {
    action = [&] { return mutate_op(c, [&](Workspace& ws) { ops::remove_asset(ws, ws.resolve_asset(a1)); }); };
  });

  auto* move_asset = app.add_subcommand("move-asset", "Move an asset under a new parent");
  move_asset->add_option("source", a1)->required();
  move_asset->add_option("target", a2)->required();
  move_asset->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) { ops::move_asset(ws, ws.resolve_asset(a1), ws.resolve_asset(a2)); });
    };
  });

  auto* map = app.add_subcommand("map", "Map an asset to a feature");
  map->add_option("path", a1)->required();
  map->add_option("feature", a2)->required();
  map->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        ops::map_asset_to_feature(ws, ws.resolve_asset(a1), a2);
        if (!c.as_json) c.out << "pc\t" << pc_text(ws.tree.get(ws.resolve_asset(a1))) << '\n';
      });
    };
  });

  auto* unmap = app.add_subcommand("unmap", "Replace a feature by false in an asset's presence condition");
  unmap->add_option("path", a1)->required();
  unmap->add_option("feature", a2)->required();
  unmap->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) { ops::unmap_asset_from_feature(ws, ws.resolve_asset(a1), a2); });
    };
  });

  auto* clone_asset = app.add_subcommand("clone-asset", "Clone an asset subtree under a target");
  clone_asset->add_option("source", a1)->required();
  clone_asset->add_option("target", a2)->required();
  clone_asset->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        const auto assets = asset_ids(ws);
        const auto features = feature_ids(ws);
        ops::clone_asset(ws, ws.resolve_asset(a1), ws.resolve_asset(a2));
        c.rows({"kind", "path"}, created_rows(ws, assets, features));
      });
    };
  });

  auto* propagate_asset = app.add_subcommand("propagate-asset", "Propagate source changes to a clone");
  propagate_asset->add_option("source", a1)->required();
  propagate_asset->add_option("target", a2)->required();
  propagate_asset->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        ops::propagate_asset(ws, ws.resolve_asset(a1), ws.resolve_asset(a2));
      });
    };
  });

  auto* add_feature = app.add_subcommand("add-feature", "Add a feature below a parent feature");
  add_feature->add_option("name", a1)->required();
  add_feature->add_option("parent", a2)->required();
  add_feature->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) { ops::add_feature(ws, a1, ws.resolve_feature(a2)); });
    };
  });

  auto* add_fm = app.add_subcommand("add-fm", "Attach a feature model file to an asset");
  add_fm->add_option("path", a1)->required();
  add_fm->add_option("fm-file", a2)->required();
  add_fm->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        ops::add_feature_model_from_text(ws, ws.resolve_asset(a1), read_text(c.absolute(a2)));
      });
    };
  });

  auto* remove_feature = app.add_subcommand("remove-feature", "Remove a feature and its sub-features");
  remove_feature->add_option("feature", a1)->required();
  remove_feature->callback([&] {
    action = [&] { return mutate_op(c, [&](Workspace& ws) { ops::remove_feature(ws, ws.resolve_feature(a1)); }); };
  });

  auto* move_feature = app.add_subcommand("move-feature", "Move a feature below a new parent");
  move_feature->add_option("feature", a1)->required();
  move_feature->add_option("parent", a2)->required();
  move_feature->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        ops::move_feature(ws, ws.resolve_feature(a1), ws.resolve_feature(a2));
      });
    };
  });

  auto* rename_feature = app.add_subcommand("rename-feature", "Rename a feature and the mappings naming it");
  rename_feature->add_option("feature", a1)->required();
  rename_feature->add_option("name", a2)->required();
  rename_feature->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) { ops::rename_feature(ws, ws.resolve_feature(a1), a2); });
    };
  });

  auto* make_optional = app.add_subcommand("make-optional", "Mark a feature optional");
  make_optional->add_option("feature", a1)->required();
  make_optional->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) { ops::make_feature_optional(ws, ws.resolve_feature(a1)); });
    };
  });

  auto* clone_feature = app.add_subcommand("clone-feature", "Clone a feature and its assets into another model");
  clone_feature->add_option("source", a1)->required();
  clone_feature->add_option("target", a2, "Target parent feature (a model-owning asset path means its root)")
      ->required();
  clone_feature->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        const auto assets = asset_ids(ws);
        const auto features = feature_ids(ws);
        ops::clone_feature(ws, ws.resolve_feature(a1), ws.resolve_feature(a2));
        c.rows({"kind", "path"}, created_rows(ws, assets, features));
      });
    };
  });

  auto* propagate_feature = app.add_subcommand("propagate-feature", "Propagate feature changes to its clone");
  propagate_feature->add_option("source", a1)->required();
  propagate_feature->add_option("target", a2)->required();
  propagate_feature->callback([&] {
    action = [&] {
      return mutate_op(c, [&](Workspace& ws) {
        ops::propagate_feature(ws, ws.resolve_feature(a1), ws.resolve_feature(a2));
      });
    };
  });

  auto* query = app.add_subcommand("query", "Read-only reports");
  query->require_subcommand(1);
  auto* q_mapped = query->add_subcommand("mapped-assets", "Assets mapped to a feature");
  q_mapped->add_option("feature", a1)->required();
  q_mapped->callback([&] {
    action = [&] {
      return inspect(c, [&](const Workspace& ws) {
        Rows rows;
        for (AssetId a : ws.mapped_assets(ws.resolve_feature(a1))) {
          rows.push_back({ws.asset_path(a), pc_text(ws.tree.get(a))});
        }
        std::stable_sort(rows.begin(), rows.end());
        c.rows({"asset", "pc"}, rows);
      });
    };
  });
  auto* q_clones = query->add_subcommand("clones", "Trace links of an asset");
  q_clones->add_option("path", a1)->required();
  q_clones->callback([&] {
    action = [&] {
      return inspect(c, [&](const Workspace& ws) {
        const AssetId id = ws.resolve_asset(a1);
        Rows rows;
        for (AssetId other : ws.traces.linked(id)) {
          const auto t = ws.traces.latest_trace(id, other);
          const std::string role = t->source == id ? "clone" : "source";
          const std::string path = ws.tree.exists(other) && ws.tree.attached(other) ? ws.asset_path(other)
                                                                                    : "<removed>";
          rows.push_back({role, path, std::to_string(t->version_at)});
        }
        std::stable_sort(rows.begin(), rows.end());
        c.rows({"role", "asset", "version_at"}, rows);
      });
    };
  });
  auto* q_changes = query->add_subcommand("changes", "Clones whose source changed since the last sync");
  q_changes->callback([&] {
    action = [&] {
      return inspect(c, [&](const Workspace& ws) {
        Rows rows;
        for (const auto& p : detect_propagations(ws)) {
          const auto t = ws.traces.latest_trace(p.source, p.target);
          rows.push_back({ws.asset_path(p.source), ws.asset_path(p.target),
                          std::to_string(ws.tree.get(p.source).version), std::to_string(t->version_at),
                          ws.feature_path(p.source_feature), ws.feature_path(p.target_feature)});
        }
        c.rows({"source", "target", "source_version", "version_at", "source_feature", "target_feature"}, rows);
      });
    };
  });
  auto* q_tree = query->add_subcommand("tree", "All assets");
  q_tree->callback([&] {
    action = [&] {
      return inspect(c, [&](const Workspace& ws) {
        Rows rows;
        for (AssetId a : ws.tree.subtree(ws.tree.root())) {
          const Asset& x = ws.tree.get(a);
          rows.push_back({ws.asset_path(a), std::string(to_string(x.type)), std::to_string(x.version), pc_text(x)});
        }
        c.rows({"asset", "type", "version", "pc"}, rows);
      });
    };
  });
  auto* q_features = query->add_subcommand("features", "All features of attached models");
  q_features->callback([&] {
    action = [&] {
      return inspect(c, [&](const Workspace& ws) {
        Rows rows;
        for (const auto& [mid, m] : ws.features.models()) {
          if (!ws.model_owner(mid)) continue;
          for (FeatureId f : ws.features.subtree(m.root)) {
            const Feature& x = ws.features.get(f);
            rows.push_back({ws.feature_path(f), x.name, std::to_string(x.version), x.optional ? "optional" : "mandatory",
                            std::string(to_string(x.group)), x.incomplete ? "incomplete" : "complete"});
          }
        }
        c.rows({"feature", "name", "version", "optional", "group", "incomplete"}, rows);
      });
    };
  });
  auto* q_log = query->add_subcommand("log", "Operator log");
  q_log->callback([&] {
    action = [&] { return inspect(c, [&](const Workspace& ws) { print_log(c, ws.log); }); };
  });

  auto* replay_cmd = app.add_subcommand("replay", "Replay a snapshot history into a fresh workspace");
  replay_cmd->add_option("manifest", a1)->required();
  replay_cmd->add_flag("--apply", apply, "Apply detected propagations");
  replay_cmd->add_option("--clones", clones_path, "Clone log (clones.tsv)");
  replay_cmd->add_option("--state", state_dir, "Directory receiving the resulting .vp/ (default: no save)");
  replay_cmd->add_option("--repo-name", repo_name, "Repository name for single-repository histories");
  replay_cmd->callback([&] {
    action = [&] {
      const auto steps = read_history_manifest(c.absolute(a1));
      const auto clone_log = clones_path.empty() ? std::vector<CloneLogEntry>{} : read_clone_log(c.absolute(clones_path));
      ReplayResult r = replay(steps, clone_log, ReplayOptions{apply, repo_name});
      const Workspace& ws = r.workspace;
      print_log(c, ws.log);
      Rows rows;
      for (const auto& [step, p] : r.propagations) {
        const auto t = ws.traces.latest_trace(p.source, p.target);
        const bool live = ws.tree.exists(p.source) && ws.tree.exists(p.target);
        rows.push_back({"propagation", std::to_string(step), live ? ws.asset_path(p.source) : "<removed>",
                        live ? ws.asset_path(p.target) : "<removed>", std::to_string(t ? t->version_at : 0)});
      }
      if (!c.as_json) c.rows({}, rows);
      if (!state_dir.empty()) {
        const fs::path dir = c.absolute(state_dir);
        WorkspaceLock lock(dir, true);
        save_workspace(ws, dir);
      }
      if (r.error) {
        c.err << "vplat: step " << *r.failed_step << ": " << r.error->what() << '\n';
        return 1;
      }
      return 0;
    };
  });

  auto* metrics = app.add_subcommand("metrics", "Cost-benefit report over the operator log");
  metrics->add_option("--cost-per-invocation", cost.cost_per_invocation, "Seconds per feature-oriented invocation")
      ->check(CLI::PositiveNumber);
  metrics->add_option("--omission-factor", cost.omission_factor)->check(CLI::PositiveNumber);
  metrics->add_option("--feature-location-seconds", cost.feature_location_seconds)->check(CLI::PositiveNumber);
  metrics->add_option("--clone-detection-seconds", cost.clone_detection_seconds)->check(CLI::PositiveNumber);
  metrics->add_option("--counts", counts_text,
                      "Use aggregate counts TOTAL,LATE,SAVED_LOC,SAVED_CLONE instead of the workspace log");
  metrics->callback([&] {
    action = [&] {
      auto report = [&](const UsageCounts& u) {
        Rows rows;
        for (const auto& [op, n] : u.per_operator) rows.push_back({"operator", op, std::to_string(n)});
        auto num = [](double v) {
          std::ostringstream s;
          s.precision(6);
          s << std::fixed << v;
          return s.str();
        };
        rows.push_back({"count", "total", std::to_string(u.total())});
        rows.push_back({"count", "late", std::to_string(u.late)});
        rows.push_back({"count", "saved_feature_locations", std::to_string(u.saved_feature_locations)});
        rows.push_back({"count", "saved_clone_detections", std::to_string(u.saved_clone_detections)});
        rows.push_back({"seconds", "cost_per_invocation", num(cost.cost_per_invocation)});
        rows.push_back({"seconds", "cost_feat", num(cost_feat(u, cost))});
        rows.push_back({"seconds", "total_benefit", num(total_benefit(u, cost))});
        try {
          rows.push_back({"seconds", "break_even", num(break_even_seconds(u, cost))});
        } catch (const vplat::Error& e) {
          if (e.code() != ErrorCode::NoFeatureOps) throw;
          rows.push_back({"seconds", "break_even", "undefined"});
        }
        c.rows({"kind", "name", "value"}, rows);
      };
      if (!counts_text.empty()) {
        const auto parts = split(counts_text, ',');
        std::vector<std::uint64_t> v;
        for (const auto& p : parts) {
          if (p.empty() || !std::all_of(p.begin(), p.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            fail(ErrorCode::InvalidArgument, "--counts expects four non-negative integers");
          }
          v.push_back(std::stoull(p));
        }
        if (v.size() != 4) fail(ErrorCode::InvalidArgument, "--counts expects four non-negative integers");
        report(aggregate_counts(v[0], v[1], v[2], v[3]));
        return 0;
      }
      return inspect(c, [&](const Workspace& ws) { report(tally(ws.log)); });
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const vplat::Error& e) {
    err << "vplat: " << e.what() << '\n';
    return 1;
  }
  if (!action) {
    err << app.help();
    return 2;
  }
  try {
    return action();
  } catch (const vplat::Error& e) {
    err << "vplat: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "vplat: IoFailure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace vplat::cli
