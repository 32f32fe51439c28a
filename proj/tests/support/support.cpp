// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <stdlib.h>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vplat/asset_ops.hpp"
#include "vplat/feature_ops.hpp"
#include "vplat/persistence.hpp"

namespace vplat::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "vplat-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

AssetId make_asset(Workspace& ws, const std::string& name, AssetType type, const std::string& content) {
  return ws.tree.create_detached(name, type, content);
}

AssetId make_child(Workspace& ws, AssetId parent, const std::string& name, AssetType type,
                   const std::string& content) {
  const AssetId id = ws.tree.create_detached(name, type, content);
  ws.tree.attach(id, parent);
  return id;
}

std::string canonical_dump(const Workspace& ws, bool include_traces) {
  std::ostringstream out;
  auto asset_label = [&](AssetId id) {
    return ws.tree.exists(id) && ws.tree.attached(id) ? "/" + ws.asset_path(id) : std::string("-");
  };
  auto feature_label = [&](FeatureId id) {
    if (!ws.features.exists(id) || !ws.model_owner(ws.features.get(id).model)) return std::string("-");
    return ws.feature_path(id);
  };
  for (AssetId id : ws.tree.subtree(ws.tree.root())) {
    const Asset& a = ws.tree.get(id);
    out << "A\t" << asset_label(id) << '\t' << to_string(a.type) << '\t' << a.version << '\t' << a.pc.to_string()
        << '\t' << escape_field(a.content) << '\t' << (a.model ? "fm" : "") << '\n';
    if (!a.model) continue;
    for (FeatureId f : ws.features.subtree(ws.features.model(*a.model).root)) {
      const Feature& x = ws.features.get(f);
      out << "F\t" << ws.feature_path(f) << '\t' << x.optional << x.incomplete << '\t' << to_string(x.group)
          << '\t' << x.version << '\n';
    }
  }
  if (include_traces) {
    for (const auto& t : ws.traces.asset_traces()) {
      out << "T\t" << asset_label(t.source) << '\t' << asset_label(t.clone) << '\t' << t.version_at << '\n';
    }
    for (const auto& t : ws.traces.feature_traces()) {
      out << "FT\t" << feature_label(t.source) << '\t' << feature_label(t.clone) << '\t' << t.version_at << '\n';
    }
  }
  return out.str();
}

// ---- calculator ------------------------------------------------------------

CalculatorRun run_calculator() {
  CalculatorRun r;
  Workspace& ws = r.ws;
  const AssetId root = ws.tree.root();

  const AssetId bc = make_asset(ws, "BC", AssetType::Repository);
  const AssetId bc_src = make_child(ws, bc, "src", AssetType::Folder);
  const AssetId ops_js = make_child(ws, bc_src, "Operators.js", AssetType::File, "// BasicCalculator operators\n");
  make_child(ws, ops_js, "add", AssetType::Method, "function add(a, b) { return a + b; }\n");
  make_child(ws, ops_js, "subtract", AssetType::Method, "function subtract(a, b) { return a - b; }\n");
  ops::add_asset(ws, bc, root);
  ops::add_feature_model_from_text(ws, bc, "BC\n\tADD\n\tSUB\n");

  const AssetId divide = make_asset(ws, "divide", AssetType::Method, "function divide(a, b) { return a / b; }\n");
  ws.tree.get_mut(divide).pc = PresenceCondition::literal("DIV");
  r.global_before_divide = ws.tree.global_version();
  ops::add_asset(ws, divide, ops_js);
  r.global_after_divide = ws.tree.global_version();

  const AssetId sc = make_asset(ws, "SC", AssetType::Repository);
  const AssetId sc_src = make_child(ws, sc, "src", AssetType::Folder);
  const AssetId arith = make_child(ws, sc_src, "Arithmetic.js", AssetType::File, "// ScientificCalculator\n");
  make_child(ws, arith, "log", AssetType::Method, "function log(a) { return Math.log(a); }\n");
  ops::add_asset(ws, sc, root);
  ops::add_feature_model_from_text(ws, sc, "SC\n\tLOG\n");

  const std::size_t traces_before = ws.traces.asset_traces().size();
  const std::size_t ftraces_before = ws.traces.feature_traces().size();
  const AssetId divide_clone = ops::clone_asset(ws, divide, arith);
  r.divide_version_at_clone = ws.tree.get(divide).version;
  r.clone_version_at_clone = ws.tree.get(divide_clone).version;
  r.traces_after_clone_asset = ws.traces.asset_traces().size() - traces_before;
  r.feature_traces_after_clone_asset = ws.traces.feature_traces().size() - ftraces_before;

  ops::change_asset(ws, divide,
                    std::string("function divide(a, b) {\n  if (b === 0) throw new Error('division by zero');\n"
                                "  return a / b;\n}\n"));
  r.divide_version_before_propagation = ws.tree.get(divide).version;
  r.clone_version_before_propagation = ws.tree.get(divide_clone).version;
  ops::propagate_asset(ws, divide, divide_clone);

  const ModelId bc_model = *ws.tree.get(bc).model;
  r.model_before_exp = ws.features.model_version(bc_model);
  ops::add_feature(ws, "EXP", ws.features.model(bc_model).root);
  r.model_after_exp = ws.features.model_version(bc_model);

  const AssetId exponent =
      make_asset(ws, "exponent", AssetType::Method, "function exponent(a, b) { return Math.pow(a, b); }\n");
  ops::add_asset(ws, exponent, ops_js);
  const AssetId exp_txt = make_asset(ws, "exp.txt", AssetType::File, "exponent(a, b) raises a to the power b.\n");
  ops::add_asset(ws, exp_txt, bc);
  ops::map_asset_to_feature(ws, exponent, "EXP");
  ops::map_asset_to_feature(ws, exp_txt, "EXP");

  const ModelId sc_model = *ws.tree.get(sc).model;
  ops::clone_feature(ws, ws.resolve_feature("BC/EXP"), ws.features.model(sc_model).root);

  const AssetId multiply =
      make_asset(ws, "multiply", AssetType::Method, "function multiply(a, b) { return a * b; }\n");
  ops::add_asset(ws, multiply, ops_js);
  ops::map_asset_to_feature(ws, multiply, "MULT");
  return r;
}

// ---- synthetic history ---------------------------------------------------

namespace {

std::string block(const std::string& feature, const std::string& body) {
  return "// &begin[" + feature + "]\n" + body + "\n// &end[" + feature + "]\n";
}

const std::string kAdd1 = "function add(a, b) { return a + b; }";
const std::string kAdd2 = "function add(a, b) { return Number(a) + Number(b); }";
const std::string kSub1 = "function sub(a, b) { return a - b; }";
const std::string kDiv1 = "function div(a, b) { return a / b; }";
const std::string kDiv2 = "function div(a, b) { if (b === 0) { return NaN; } return a / b; }";
const std::string kDivLocal = "function div(a, b) { return b === 0 ? Infinity : a / b; }";
const std::string kMult1 = "function mult(a, b) { return a * b; }";
const std::string kMult2 = "function mult(a, b) { return Math.fround(a * b); }";
const std::string kLog1 = "function log(a) { return Math.log(a); }";
const std::string kLog2 = "function log(a) { return a > 0 ? Math.log(a) : NaN; }";
const std::string kPlot1 = "function plot(f) { return [0, 1, 2].map(f); }";

std::string bc_ops(const std::string& add, const std::string& div, const std::string& mult) {
  return "const ops = {};\n" + block("ADD", add) + block("SUB", kSub1) + block("DIV", div) + block("MULT", mult);
}

}  // namespace

SyntheticHistory write_synthetic_history(const fs::path& dir) {
  std::map<std::string, std::string> files;
  std::vector<std::pair<std::string, std::string>> clones;  // (row, target ref)
  SyntheticHistory h;
  std::ostringstream manifest;
  manifest << "index\tsnapshot\tref\n";

  auto snapshot = [&](int index) {
    char name[16];
    std::snprintf(name, sizeof name, "step%02d", index);
    for (const auto& [rel, bytes] : files) write_file(dir / "steps" / name / rel, bytes);
    manifest << index << "\tsteps/" << name << "\tr" << index << '\n';
    ++h.steps;
  };

  // 1: three repositories with their feature models.
  files["BC/BC.vp-project"] = "BC\n\tADD\n\tSUB\n\tDIV\n\tMULT\n";
  files["BC/src/Ops.js"] = bc_ops(kAdd1, kDiv1, kMult1);
  files["SC/SC.vp-project"] = "SC\n\tLOG\n";
  files["SC/src/Sci.js"] = "const sci = {};\n" + block("LOG", kLog1);
  files["GC/GC.vp-project"] = "GC\n\tPLOT\n";
  files["GC/src/Plot.js"] = "const plot = {};\n" + block("PLOT", kPlot1);
  snapshot(1);

  // 2: DIV and MULT copied into SC.
  files["SC/src/Ops.js"] = "// copied from BC\n" + block("DIV", kDiv1) + block("MULT", kMult1);
  clones.emplace_back("DIV\tBC\tSC\tr1\tr2", "r2");
  clones.emplace_back("MULT\tBC\tSC\tr1\tr2", "r2");
  snapshot(2);

  // 3: ADD reworked in BC (never cloned); the operators file mapped late.
  files["BC/src/Ops.js"] = bc_ops(kAdd2, kDiv1, kMult1);
  files["BC/src/.vp-files"] = "Ops.js\tCALC\n";
  snapshot(3);

  // 4: division-by-zero fix in BC, not yet propagated to SC.
  files["BC/src/Ops.js"] = bc_ops(kAdd2, kDiv2, kMult1);
  snapshot(4);

  // 5: the fixed DIV copied into GC.
  files["GC/src/Ops.js"] = "// graphing operators\n" + block("DIV", kDiv2);
  clones.emplace_back("DIV\tBC\tGC\tr4\tr5", "r5");
  snapshot(5);

  // 6: LOG copied from SC into GC; BC declares an optional EXP.
  files["GC/src/Sci.js"] = "// from SC\n" + block("LOG", kLog1);
  files["BC/BC.vp-project"] = "BC\n\tADD\n\tSUB\n\tDIV\n\tMULT\n\tEXP?\n";
  clones.emplace_back("LOG\tSC\tGC\tr5\tr6", "r6");
  snapshot(6);

  // 7: LOG changes in SC.
  files["SC/src/Sci.js"] = "const sci = {};\n" + block("LOG", kLog2);
  snapshot(7);

  // 8: GC edits its own DIV copy; the source is not ahead.
  files["GC/src/Ops.js"] = "// graphing operators\n" + block("DIV", kDivLocal);
  snapshot(8);

  // 9: MULT copied into GC.
  files["GC/src/Ops.js"] = "// graphing operators\n" + block("DIV", kDivLocal) + block("MULT", kMult1);
  clones.emplace_back("MULT\tBC\tGC\tr8\tr9", "r9");
  snapshot(9);

  // 10: MULT changes in BC; both copies fall behind.
  files["BC/src/Ops.js"] = bc_ops(kAdd2, kDiv2, kMult2);
  snapshot(10);

  h.manifest = dir / "history.tsv";
  write_file(h.manifest, manifest.str());
  std::string log = "feature\tsourceRepo\ttargetRepo\tsourceRef\ttargetRef\n";
  for (const auto& [row, ref] : clones) log += row + "\n";
  h.clone_log = dir / "clones.tsv";
  write_file(h.clone_log, log);
  h.clone_entries = clones.size();

  h.planted = {
      {"BC/src/Ops.js/block[DIV]", "SC/src/Ops.js/block[DIV]"},
      {"BC/src/Ops.js/block[MULT]", "GC/src/Ops.js/block[MULT]"},
      {"BC/src/Ops.js/block[MULT]", "SC/src/Ops.js/block[MULT]"},
      {"SC/src/Sci.js/block[LOG]", "GC/src/Sci.js/block[LOG]"},
  };
  return h;
}

// ---- randomized fixtures -------------------------------------------------

namespace {

const std::vector<std::string> kFeaturePool = {"A", "B", "C", "D", "E", "F"};

std::string random_model_text(Rng& rng, const std::string& root) {
  std::string text = root + "\n";
  int depth = 0;
  std::vector<std::string> pool = kFeaturePool;
  std::shuffle(pool.begin(), pool.end(), rng);
  const int n = uniform(rng, 1, 4);
  for (int i = 0; i < n; ++i) {
    depth = uniform(rng, 1, depth + 1);
    text += std::string(static_cast<std::size_t>(depth), '\t') + pool[static_cast<std::size_t>(i)] +
            (coin(rng, 0.3) ? "?" : "") + "\n";
  }
  return text;
}

std::vector<AssetType> child_types(AssetType parent) {
  std::vector<AssetType> out;
  for (AssetType t : {AssetType::Folder, AssetType::File, AssetType::Class, AssetType::Method, AssetType::Block}) {
    if (containable(t, parent)) out.push_back(t);
  }
  return out;
}

}  // namespace

Workspace random_workspace(Rng& rng) {
  Workspace ws;
  const int repos = uniform(rng, 2, 3);
  std::vector<AssetId> pool;
  for (int r = 0; r < repos; ++r) {
    const std::string name = "R" + std::to_string(r);
    const AssetId repo = make_asset(ws, name, AssetType::Repository);
    ops::add_asset(ws, repo, ws.tree.root());
    ops::add_feature_model_from_text(ws, repo, random_model_text(rng, name));
    pool.push_back(repo);
    const int n = uniform(rng, 3, 8);
    for (int i = 0; i < n; ++i) {
      std::vector<AssetId> in_repo;
      for (AssetId a : ws.tree.subtree(repo)) {
        if (!child_types(ws.tree.get(a).type).empty()) in_repo.push_back(a);
      }
      const AssetId parent = pick(rng, in_repo);
      const AssetType type = pick(rng, child_types(ws.tree.get(parent).type));
      const std::string child = "n" + std::to_string(uniform(rng, 0, 5));
      if (ws.tree.find_child(parent, child)) continue;
      const AssetId a = make_asset(ws, child, type, "body " + std::to_string(uniform(rng, 0, 99)) + "\n");
      ops::add_asset(ws, a, parent);
      pool.push_back(a);
    }
  }
  for (AssetId a : pool) {
    if (ws.tree.get(a).type == AssetType::Repository || !coin(rng, 0.5)) continue;
    ops::map_asset_to_feature(ws, a, pick(rng, kFeaturePool));
    if (coin(rng, 0.2)) ops::map_asset_to_feature(ws, a, pick(rng, kFeaturePool));
  }
  return ws;
}

std::vector<AssetId> attached_assets(const Workspace& ws, bool include_root) {
  std::vector<AssetId> out;
  for (AssetId id : ws.tree.subtree(ws.tree.root())) {
    if (include_root || id != ws.tree.root()) out.push_back(id);
  }
  return out;
}

std::vector<FeatureId> live_features(const Workspace& ws) {
  std::vector<FeatureId> out;
  for (const auto& [mid, m] : ws.features.models()) {
    if (!ws.model_owner(mid)) continue;
    for (FeatureId f : ws.features.subtree(m.root)) out.push_back(f);
  }
  return out;
}

namespace {

void grow(Rng& rng, FeatureSpec& parent, int depth, int& next, int budget) {
  const int n = depth >= 3 ? 0 : uniform(rng, 0, 3);
  for (int i = 0; i < n && next < budget; ++i) {
    FeatureSpec c;
    c.name = "F" + std::to_string(next++);
    c.optional = coin(rng, 0.3);
    const int g = uniform(rng, 0, 2);
    c.group = g == 0 ? GroupKind::And : g == 1 ? GroupKind::Or : GroupKind::Xor;
    grow(rng, c, depth + 1, next, budget);
    parent.children.push_back(std::move(c));
  }
}

}  // namespace

FeatureModelDocument random_feature_model(Rng& rng) {
  FeatureModelDocument doc;
  int next = 0;
  const int budget = uniform(rng, 1, 20);
  doc.root.name = "Root";
  doc.root.optional = coin(rng, 0.1);
  const int g = uniform(rng, 0, 2);
  doc.root.group = g == 0 ? GroupKind::And : g == 1 ? GroupKind::Or : GroupKind::Xor;
  grow(rng, doc.root, 0, next, budget);
  if (coin(rng, 0.3)) {
    FeatureSpec holder;
    grow(rng, holder, 1, next, budget + 5);
    doc.unassigned = std::move(holder.children);
  }
  // A group keyword only exists on a first child; childless features keep And.
  std::vector<FeatureSpec*> stack{&doc.root};
  for (auto& u : doc.unassigned) stack.push_back(&u);
  while (!stack.empty()) {
    FeatureSpec* f = stack.back();
    stack.pop_back();
    if (f->children.empty()) f->group = GroupKind::And;
    for (auto& c : f->children) stack.push_back(&c);
  }
  if (doc.root.children.empty() && doc.unassigned.empty()) doc.root.group = GroupKind::And;
  return doc;
}

const std::vector<AnnotationCase>& annotation_corpus() {
  static const std::vector<AnnotationCase> corpus = {
      {"plain", "int x;\nint y;\n", std::nullopt, 0},
      {"single_block", "// &begin[DIV]\nfn div() {}\n// &end[DIV]\n", std::nullopt, 1},
      {"line_marker", "x = a/b; // &line[DIV]\n", std::nullopt, 1},
      {"hash_comment", "# &begin[PY]\npass\n# &end[PY]\n", std::nullopt, 1},
      {"html_comment", "<!-- &begin[DOC] -->\n<p/>\n<!-- &end[DOC] -->\n", std::nullopt, 1},
      {"multi_feature", "// &begin[INT, FLOAT]\nnum x;\n// &end[INT,FLOAT]\n", std::nullopt, 1},
      {"nested", "// &begin[A]\n// &begin[B]\nb\n// &end[B]\n// &end[A]\n", std::nullopt, 1},
      {"siblings", "// &begin[A]\na\n// &end[A]\n// &begin[A]\na2\n// &end[A]\n", std::nullopt, 2},
      {"line_inside_block", "// &begin[A]\nx; // &line[B]\n// &end[A]\n", std::nullopt, 1},
      {"same_feature_nested", "// &begin[A]\n// &begin[A]\n// &end[A]\n// &end[A]\n", std::nullopt, 1},
      {"crlf", "// &begin[A]\r\nx\r\n// &end[A]\r\n", std::nullopt, 1},
      {"unclosed", "// &begin[A]\nx\n", ErrorCode::UnbalancedAnnotation},
      {"stray_end", "x\n// &end[A]\n", ErrorCode::UnbalancedAnnotation},
      {"unclosed_inner", "// &begin[A]\n// &begin[B]\n// &end[B]\n", ErrorCode::UnbalancedAnnotation},
      {"mismatched", "// &begin[A]\nx\n// &end[B]\n", ErrorCode::MismatchedEnd},
      {"list_order_matters", "// &begin[A,B]\n// &end[B,A]\n", ErrorCode::MismatchedEnd},
      {"overlap", "// &begin[A]\n// &begin[B]\n// &end[A]\n// &end[B]\n", ErrorCode::OverlapWithoutNesting},
      {"overlap_deep", "// &begin[A]\n// &begin[B]\n// &begin[C]\n// &end[B]\n", ErrorCode::OverlapWithoutNesting},
      {"empty_list", "// &begin[]\n// &end[]\n", ErrorCode::BadFeatureList},
      {"bad_name", "// &line[two words]\n", ErrorCode::BadFeatureList},
      {"trailing_comma", "// &begin[A,]\n// &end[A,]\n", ErrorCode::BadFeatureList},
  };
  return corpus;
}

}  // namespace vplat::testing
