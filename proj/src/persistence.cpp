// SPDX-License-Identifier: Apache-2.0
#include "vplat/persistence.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "vplat/error.hpp"
#include "vplat/names.hpp"

namespace vplat {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "vplat-1";

const char* const kStateFiles[] = {"meta",        "assets.tsv", "features.tsv", "pcs.tsv",
                                   "traces.tsv",  "ftraces.tsv", "log.tsv",     "feature_files.tsv"};

std::string row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += '\t';
    out += f;
    first = false;
  }
  out += '\n';
  return out;
}

std::string num(std::uint64_t v) { return std::to_string(v); }
std::string opt_id(const auto& id) { return id ? num(id->value) : "-"; }

[[noreturn]] void corrupt(const std::string& file, std::size_t line, const std::string& why) {
  fail(ErrorCode::CorruptState, file + ":" + std::to_string(line) + ": " + why);
}

struct Table {
  std::string file;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

// Splits a table, checks the header and per-row arity (min_fields, or exact
// when max_fields equals it).
Table read_table(const std::map<std::string, std::string>& files, const std::string& name,
                 const std::string& header, std::size_t min_fields, std::size_t max_fields) {
  auto it = files.find(name);
  if (it == files.end()) fail(ErrorCode::CorruptState, "missing " + name);
  Table t;
  t.file = name;
  std::istringstream in(it->second);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (n == 1) {
      if (line != header) corrupt(name, n, "unexpected header");
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() < min_fields || fields.size() > max_fields) corrupt(name, n, "wrong number of fields");
    for (auto& f : fields) f = unescape_field(f);
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(n);
  }
  if (n == 0) corrupt(name, 1, "missing header");
  return t;
}

std::uint64_t parse_num(const Table& t, std::size_t r, const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    corrupt(t.file, t.line_numbers[r], "'" + text + "' is not a number");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    corrupt(t.file, t.line_numbers[r], "'" + text + "' is out of range");
  }
}

bool parse_bool(const Table& t, std::size_t r, const std::string& text) {
  if (text == "1") return true;
  if (text == "0") return false;
  corrupt(t.file, t.line_numbers[r], "'" + text + "' is not 0/1");
}

const std::string kAssetsHeader = "id\tparent\ttype\tname\tversion\tmodel\tordinal\tcontent";
const std::string kFeaturesHeader = "id\tmodel\tparent\tordinal\tname\toptional\tgroup\tincomplete\tversion";
const std::string kPcsHeader = "asset\tpc";
const std::string kTracesHeader = "seq\tsource\tclone\tversion_at";
const std::string kLogHeader = "index\top\tresult_version\tderived\tlate\targs";
const std::string kFeatureFilesHeader = "path\tcontent";

std::string traces_table(const auto& traces) {
  std::string out = kTracesHeader + "\n";
  for (const auto& t : traces) {
    out += row({num(t.seq), num(t.source.value), num(t.clone.value), num(t.version_at)});
  }
  return out;
}

template <typename IdT>
std::vector<Trace<IdT>> read_traces(const Table& t) {
  std::vector<Trace<IdT>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    out.push_back(Trace<IdT>{IdT(parse_num(t, r, f[1])), IdT(parse_num(t, r, f[2])), parse_num(t, r, f[3]),
                             parse_num(t, r, f[0])});
  }
  return out;
}

}  // namespace

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\' || i + 1 == text.size()) {
      out += text[i];
      continue;
    }
    switch (text[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += text[i];
    }
  }
  return out;
}

std::map<std::string, std::string> serialize_state(const Workspace& ws) {
  std::map<std::string, std::string> files;

  std::string meta;
  meta += row({"format", kFormat});
  meta += row({"global_version", num(ws.tree.global_version())});
  meta += row({"root", num(ws.tree.root().value)});
  meta += row({"next_asset_id", num(ws.tree.next_id())});
  meta += row({"next_model_id", num(ws.features.next_model_id())});
  meta += row({"next_feature_id", num(ws.features.next_feature_id())});
  meta += row({"next_seq", num(ws.traces.next_seq())});
  meta += row({"layout", ws.layout == Layout::MultiRepo ? "multi" : "single"});
  meta += row({"repo_name", escape_field(ws.repo_name)});
  files["meta"] = meta;

  std::string assets = kAssetsHeader + "\n";
  std::string pcs = kPcsHeader + "\n";
  std::set<ModelId> owned;
  for (const auto& [id, a] : ws.tree.all()) {
    if (!ws.tree.attached(id)) continue;
    std::size_t ordinal = 0;
    if (a.parent) {
      const auto& sib = ws.tree.get(*a.parent).children;
      ordinal = static_cast<std::size_t>(std::find(sib.begin(), sib.end(), id) - sib.begin());
    }
    if (a.model) owned.insert(*a.model);
    assets += row({num(id.value), opt_id(a.parent), std::string(to_string(a.type)), escape_field(a.name),
                   num(a.version), opt_id(a.model), num(ordinal), escape_field(a.content)});
    if (!(a.pc == PresenceCondition())) pcs += row({num(id.value), escape_field(a.pc.to_string())});
  }
  files["assets.tsv"] = assets;
  files["pcs.tsv"] = pcs;

  std::string feats = kFeaturesHeader + "\n";
  for (const auto& [id, f] : ws.features.all()) {
    if (!owned.count(f.model)) continue;
    std::size_t ordinal = 0;
    if (f.parent) {
      const auto& sib = ws.features.get(*f.parent).children;
      ordinal = static_cast<std::size_t>(std::find(sib.begin(), sib.end(), id) - sib.begin());
    }
    feats += row({num(id.value), num(f.model.value), opt_id(f.parent), num(ordinal), escape_field(f.name),
                  f.optional ? "1" : "0", std::string(to_string(f.group)), f.incomplete ? "1" : "0",
                  num(f.version)});
  }
  files["features.tsv"] = feats;

  files["traces.tsv"] = traces_table(ws.traces.asset_traces());
  files["ftraces.tsv"] = traces_table(ws.traces.feature_traces());

  std::string log = kLogHeader + "\n";
  for (std::size_t i = 0; i < ws.log.size(); ++i) {
    const auto& e = ws.log[i];
    std::string line = num(i + 1) + "\t" + escape_field(e.op) + "\t" + num(e.result_version) + "\t" +
                       (e.derived ? "1" : "0") + "\t" + (e.late ? "1" : "0");
    for (const auto& a : e.args) line += "\t" + escape_field(a);
    log += line + "\n";
  }
  files["log.tsv"] = log;

  std::string ff = kFeatureFilesHeader + "\n";
  for (const auto& [path, content] : ws.feature_files) ff += row({escape_field(path), escape_field(content)});
  files["feature_files.tsv"] = ff;
  return files;
}

Workspace deserialize_state(const std::map<std::string, std::string>& files) {
  Workspace ws;

  // meta
  std::map<std::string, std::string> meta;
  {
    auto it = files.find("meta");
    if (it == files.end()) fail(ErrorCode::CorruptState, "missing meta");
    std::istringstream in(it->second);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto f = split(line, '\t');
      if (f.size() != 2) corrupt("meta", n, "expected key<TAB>value");
      meta[f[0]] = unescape_field(f[1]);
    }
  }
  auto meta_num = [&](const std::string& key) -> std::uint64_t {
    auto it = meta.find(key);
    if (it == meta.end()) fail(ErrorCode::CorruptState, "meta lacks " + key);
    Table t{"meta", {}, {0}};
    return parse_num(t, 0, it->second);
  };
  if (meta["format"] != kFormat) fail(ErrorCode::CorruptState, "unsupported format '" + meta["format"] + "'");
  const std::string layout = meta["layout"];
  if (layout == "multi") {
    ws.layout = Layout::MultiRepo;
  } else if (layout == "single") {
    ws.layout = Layout::SingleRepo;
  } else {
    fail(ErrorCode::CorruptState, "unknown layout '" + layout + "'");
  }
  ws.repo_name = meta["repo_name"];

  // assets
  const Table at = read_table(files, "assets.tsv", kAssetsHeader, 8, 8);
  std::map<AssetId, Asset> assets;
  std::map<AssetId, std::vector<std::pair<std::uint64_t, AssetId>>> kids;
  for (std::size_t r = 0; r < at.rows.size(); ++r) {
    const auto& f = at.rows[r];
    Asset a;
    a.id = AssetId(parse_num(at, r, f[0]));
    if (f[1] != "-") a.parent = AssetId(parse_num(at, r, f[1]));
    auto type = parse_asset_type(f[2]);
    if (!type) corrupt(at.file, at.line_numbers[r], "unknown asset type '" + f[2] + "'");
    a.type = *type;
    a.name = f[3];
    a.version = parse_num(at, r, f[4]);
    if (f[5] != "-") a.model = ModelId(parse_num(at, r, f[5]));
    a.content = f[7];
    if (a.parent) kids[*a.parent].emplace_back(parse_num(at, r, f[6]), a.id);
    if (!assets.emplace(a.id, std::move(a)).second) corrupt(at.file, at.line_numbers[r], "duplicate asset id");
  }
  for (auto& [parent, list] : kids) {
    auto it = assets.find(parent);
    if (it == assets.end()) fail(ErrorCode::CorruptState, "asset parent #" + num(parent.value) + " missing");
    std::sort(list.begin(), list.end());
    for (auto& [ord, id] : list) it->second.children.push_back(id);
  }

  const Table pt = read_table(files, "pcs.tsv", kPcsHeader, 2, 2);
  for (std::size_t r = 0; r < pt.rows.size(); ++r) {
    auto it = assets.find(AssetId(parse_num(pt, r, pt.rows[r][0])));
    if (it == assets.end()) corrupt(pt.file, pt.line_numbers[r], "presence condition for unknown asset");
    try {
      it->second.pc = PresenceCondition::parse(pt.rows[r][1]);
    } catch (const Error& e) {
      corrupt(pt.file, pt.line_numbers[r], e.what());
    }
  }
  const AssetId root(meta_num("root"));
  if (!assets.count(root)) fail(ErrorCode::CorruptState, "root asset missing");
  if (assets.at(root).version != meta_num("global_version")) {
    fail(ErrorCode::CorruptState, "global version disagrees with root");
  }
  ws.tree = AssetTree::from_rows(std::move(assets), root, meta_num("next_asset_id"));

  // features
  const Table ft = read_table(files, "features.tsv", kFeaturesHeader, 9, 9);
  std::map<FeatureId, Feature> feats;
  std::map<FeatureId, std::vector<std::pair<std::uint64_t, FeatureId>>> fkids;
  for (std::size_t r = 0; r < ft.rows.size(); ++r) {
    const auto& f = ft.rows[r];
    Feature x;
    x.id = FeatureId(parse_num(ft, r, f[0]));
    x.model = ModelId(parse_num(ft, r, f[1]));
    if (f[2] != "-") x.parent = FeatureId(parse_num(ft, r, f[2]));
    x.name = f[4];
    x.optional = parse_bool(ft, r, f[5]);
    auto g = parse_group_kind(f[6]);
    if (!g) corrupt(ft.file, ft.line_numbers[r], "unknown group '" + f[6] + "'");
    x.group = *g;
    x.incomplete = parse_bool(ft, r, f[7]);
    x.version = parse_num(ft, r, f[8]);
    if (x.parent) fkids[*x.parent].emplace_back(parse_num(ft, r, f[3]), x.id);
    if (!feats.emplace(x.id, std::move(x)).second) corrupt(ft.file, ft.line_numbers[r], "duplicate feature id");
  }
  for (auto& [parent, list] : fkids) {
    auto it = feats.find(parent);
    if (it == feats.end()) fail(ErrorCode::CorruptState, "feature parent #" + num(parent.value) + " missing");
    std::sort(list.begin(), list.end());
    for (auto& [ord, id] : list) it->second.children.push_back(id);
  }
  std::map<ModelId, FeatureModel> models;
  for (const auto& [id, f] : feats) {
    if (f.parent) continue;
    FeatureModel m{f.model, id, FeatureId(0)};
    for (FeatureId c : f.children) {
      if (feats.at(c).name == kUnassigned) m.unassigned = c;
    }
    if (m.unassigned.value == 0) fail(ErrorCode::CorruptState, "model #" + num(f.model.value) + " lacks UNASSIGNED");
    if (!models.emplace(f.model, m).second) {
      fail(ErrorCode::CorruptState, "model #" + num(f.model.value) + " has two roots");
    }
  }
  for (const auto& [id, f] : feats) {
    if (!models.count(f.model)) fail(ErrorCode::CorruptState, "feature #" + num(id.value) + " has no model root");
  }
  for (const auto& [id, a] : ws.tree.all()) {
    if (a.model && !models.count(*a.model)) {
      fail(ErrorCode::CorruptState, "asset #" + num(id.value) + " owns a missing model");
    }
  }
  ws.features = FeatureStore::from_rows(std::move(models), std::move(feats), meta_num("next_model_id"),
                                        meta_num("next_feature_id"));

  ws.traces = TraceDatabase::from_rows(
      read_traces<AssetId>(read_table(files, "traces.tsv", kTracesHeader, 4, 4)),
      read_traces<FeatureId>(read_table(files, "ftraces.tsv", kTracesHeader, 4, 4)), meta_num("next_seq"));

  const Table lt = read_table(files, "log.tsv", kLogHeader, 5, SIZE_MAX);
  for (std::size_t r = 0; r < lt.rows.size(); ++r) {
    const auto& f = lt.rows[r];
    if (parse_num(lt, r, f[0]) != r + 1) corrupt(lt.file, lt.line_numbers[r], "log index out of sequence");
    OperatorApplication e;
    e.op = f[1];
    e.result_version = parse_num(lt, r, f[2]);
    e.derived = parse_bool(lt, r, f[3]);
    e.late = parse_bool(lt, r, f[4]);
    e.args.assign(f.begin() + 5, f.end());
    ws.log.push_back(std::move(e));
  }

  const Table fft = read_table(files, "feature_files.tsv", kFeatureFilesHeader, 2, 2);
  for (const auto& f : fft.rows) ws.feature_files[f[0]] = f[1];

  for (const auto& t : ws.traces.asset_traces()) {
    if (t.seq >= ws.traces.next_seq()) fail(ErrorCode::CorruptState, "trace seq beyond next_seq");
  }
  for (const auto& t : ws.traces.feature_traces()) {
    if (t.seq >= ws.traces.next_seq()) fail(ErrorCode::CorruptState, "trace seq beyond next_seq");
  }
  for (const auto& [id, a] : ws.tree.all()) {
    if (id.value >= ws.tree.next_id()) fail(ErrorCode::CorruptState, "asset id beyond next_asset_id");
  }
  // Parent cycles leave rows unreachable from the roots; reject them before
  // anything walks ancestor chains.
  std::set<AssetId> seen_assets;
  std::vector<AssetId> todo{ws.tree.root()};
  while (!todo.empty()) {
    const AssetId id = todo.back();
    todo.pop_back();
    if (!seen_assets.insert(id).second) continue;
    for (AssetId c : ws.tree.get(id).children) todo.push_back(c);
  }
  for (const auto& [id, a] : ws.tree.all()) {
    if (!seen_assets.count(id)) fail(ErrorCode::CorruptState, "asset #" + num(id.value) + " is not reachable");
  }
  std::set<FeatureId> seen_features;
  std::vector<FeatureId> ftodo;
  for (const auto& [mid, m] : ws.features.models()) ftodo.push_back(m.root);
  while (!ftodo.empty()) {
    const FeatureId id = ftodo.back();
    ftodo.pop_back();
    if (!seen_features.insert(id).second) continue;
    for (FeatureId c : ws.features.get(id).children) ftodo.push_back(c);
  }
  for (const auto& [id, f] : ws.features.all()) {
    if (!seen_features.count(id)) fail(ErrorCode::CorruptState, "feature #" + num(id.value) + " is not reachable");
  }
  const auto problems = ws.check_invariants();
  if (!problems.empty()) fail(ErrorCode::CorruptState, problems.front());
  return ws;
}

bool has_workspace(const fs::path& root) { return fs::is_regular_file(root / kStateDir / "meta"); }

void save_workspace(const Workspace& ws, const fs::path& root) {
  const fs::path dir = root / kStateDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, dir.string() + ": " + ec.message());
  for (const auto& [name, bytes] : serialize_state(ws)) {
    const fs::path tmp = dir / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << bytes;
      if (!out) fail(ErrorCode::IoFailure, tmp.string() + ": write failed");
    }
    fs::rename(tmp, dir / name, ec);
    if (ec) fail(ErrorCode::IoFailure, (dir / name).string() + ": " + ec.message());
  }
}

Workspace load_workspace(const fs::path& root) {
  const fs::path dir = root / kStateDir;
  if (!has_workspace(root)) fail(ErrorCode::NoWorkspace, root.string() + " has no " + kStateDir + " directory");
  std::map<std::string, std::string> files;
  for (const char* name : kStateFiles) {
    const fs::path p = dir / name;
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorCode::CorruptState, "missing " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    files[name] = buf.str();
  }
  return deserialize_state(files);
}

WorkspaceLock::WorkspaceLock(const fs::path& root, bool exclusive) {
  const fs::path dir = root / kStateDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path p = dir / "lock";
  fd_ = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(ErrorCode::IoFailure, p.string() + ": " + std::strerror(errno));
  if (::flock(fd_, (exclusive ? LOCK_EX : LOCK_SH) | LOCK_NB) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (err == EWOULDBLOCK) fail(ErrorCode::LockHeld, p.string() + " is held by another process");
    fail(ErrorCode::IoFailure, p.string() + ": " + std::strerror(err));
  }
}

WorkspaceLock::~WorkspaceLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace vplat
