#include "mmalign/kgio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "mmalign/errors.hpp"

namespace mmalign {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("missing file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t parse_index(std::string_view field, const std::string& file,
                        std::size_t lineno, const char* what) {
  std::uint64_t value = 0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw ParseError(file, lineno,
                     std::string("malformed ") + what + " '" +
                         std::string(field) + "'");
  }
  return static_cast<std::size_t>(value);
}

std::size_t parse_bounded(std::string_view field, const std::string& file,
                          std::size_t lineno, const char* what,
                          std::size_t bound) {
  const std::size_t v = parse_index(field, file, lineno, what);
  if (v >= bound) {
    throw ParseError(file, lineno,
                     std::string(what) + " " + std::to_string(v) +
                         " out of range (vocabulary size " +
                         std::to_string(bound) + ")");
  }
  return v;
}

// Id-map files "<int>\t<label>"; vocabulary size is max id + 1.
struct IdMap {
  std::size_t count = 0;
  std::vector<std::string> labels;
};

IdMap load_id_map(const fs::path& path) {
  IdMap map;
  const std::string file = path.filename().string();
  const auto lines = read_lines(path);
  std::vector<std::pair<std::size_t, std::string>> entries;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() < 2) {
      throw ParseError(file, i + 1, "expected '<id>\\t<label>'");
    }
    const std::size_t id = parse_index(fields[0], file, i + 1, "id");
    entries.emplace_back(id, std::string(fields[1]));
    map.count = std::max(map.count, id + 1);
  }
  map.labels.assign(map.count, "");
  for (auto& [id, label] : entries) map.labels[id] = std::move(label);
  return map;
}

std::vector<Quad> load_triples(const fs::path& path, std::size_t n_entities,
                               std::size_t n_relations,
                               std::size_t n_timestamps) {
  const std::string file = path.filename().string();
  const auto lines = read_lines(path);
  std::vector<Quad> quads;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError(file, i + 1, "expected 3 or 4 tab-separated fields");
    }
    Quad q;
    q.head = parse_bounded(fields[0], file, i + 1, "entity index", n_entities);
    q.rel =
        parse_bounded(fields[1], file, i + 1, "relation index", n_relations);
    q.tail = parse_bounded(fields[2], file, i + 1, "entity index", n_entities);
    if (fields.size() == 4) {
      const std::size_t t = parse_index(fields[3], file, i + 1, "timestamp");
      if (t >= n_timestamps) {
        throw ParseError(file, i + 1,
                         "timestamp index " + std::to_string(t) +
                             " >= declared vocabulary size " +
                             std::to_string(n_timestamps));
      }
      q.time = t;
    }
    quads.push_back(q);
  }
  std::sort(quads.begin(), quads.end());
  return quads;
}

std::vector<AttrTriple> load_attr_triples(const fs::path& path,
                                          std::size_t n_entities) {
  const std::string file = path.filename().string();
  const auto lines = read_lines(path);
  std::vector<AttrTriple> triples;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string_view line = lines[i];
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 =
        tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) {
      throw ParseError(file, i + 1, "expected '<ent>\\t<name_id>\\t<value>'");
    }
    AttrTriple t;
    t.entity = parse_bounded(line.substr(0, tab1), file, i + 1, "entity index",
                             n_entities);
    t.name = parse_index(line.substr(tab1 + 1, tab2 - tab1 - 1), file, i + 1,
                         "attr name index");
    t.value = std::string(line.substr(tab2 + 1));  // may itself contain tabs
    triples.push_back(std::move(t));
  }
  std::sort(triples.begin(), triples.end());
  return triples;
}

struct FmatHeader {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

std::uint64_t read_le(const unsigned char* p, std::size_t n_bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n_bytes; ++i) {
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return v;
}

constexpr std::size_t kFmatHeaderBytes = 4 + 4 + 8 + 8;

FmatHeader parse_fmat_header(const std::vector<unsigned char>& buf,
                             const std::string& file) {
  if (buf.size() < kFmatHeaderBytes ||
      !(buf[0] == 'F' && buf[1] == 'M' && buf[2] == 'A' && buf[3] == 'T')) {
    throw DataError(file + ": FMAT magic mismatch");
  }
  if (read_le(buf.data() + 4, 4) != 1) {
    throw DataError(file + ": unsupported FMAT version");
  }
  FmatHeader h;
  h.rows = read_le(buf.data() + 8, 8);
  h.cols = read_le(buf.data() + 16, 8);
  return h;
}

std::vector<unsigned char> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("missing file: " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

FmatHeader read_fmat_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("missing file: " + path.string());
  }
  std::vector<unsigned char> buf(kFmatHeaderBytes);
  in.read(reinterpret_cast<char*>(buf.data()), kFmatHeaderBytes);
  if (static_cast<std::size_t>(in.gcount()) < kFmatHeaderBytes) {
    throw DataError(path.filename().string() + ": FMAT magic mismatch");
  }
  return parse_fmat_header(buf, path.filename().string());
}

AlignmentSet load_seed_file(const fs::path& path, std::size_t n_src,
                            std::size_t n_tgt) {
  const std::string file = path.filename().string();
  const auto lines = read_lines(path);
  AlignmentSet set;
  std::unordered_set<std::size_t> seen_src, seen_tgt;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(file, i + 1, "expected '<src_ent>\\t<tgt_ent>'");
    }
    const std::size_t src =
        parse_bounded(fields[0], file, i + 1, "entity index", n_src);
    const std::size_t tgt =
        parse_bounded(fields[1], file, i + 1, "entity index", n_tgt);
    if (!seen_src.insert(src).second) {
      throw ParseError(file, i + 1,
                       "duplicate seed entity " + std::to_string(src) +
                           " on source side");
    }
    if (!seen_tgt.insert(tgt).second) {
      throw ParseError(file, i + 1,
                       "duplicate seed entity " + std::to_string(tgt) +
                           " on target side");
    }
    set.pairs.emplace_back(src, tgt);
  }
  set.sort_by_src();
  return set;
}

// Image links, capped at max_images per entity in file order, validated
// against the feature file's declared row count.
std::vector<ImageLink> load_image_links(const fs::path& owner_path,
                                        std::size_t n_entities,
                                        std::size_t n_rows,
                                        std::size_t max_images) {
  const std::string file = owner_path.filename().string();
  const auto lines = read_lines(owner_path);
  std::vector<ImageLink> links;
  std::unordered_set<std::size_t> seen_rows;
  std::unordered_map<std::size_t, std::size_t> per_entity;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(file, i + 1, "expected '<row>\\t<ent>'");
    }
    const std::size_t row =
        parse_bounded(fields[0], file, i + 1, "image row index", n_rows);
    const std::size_t ent =
        parse_bounded(fields[1], file, i + 1, "entity index", n_entities);
    if (!seen_rows.insert(row).second) {
      throw ParseError(file, i + 1,
                       "image row " + std::to_string(row) +
                           " referenced more than once");
    }
    if (per_entity[ent] >= max_images) continue;  // excess dropped, file order
    ++per_entity[ent];
    links.push_back({ent, row});
  }
  std::sort(links.begin(), links.end());
  return links;
}

void check_disjoint(const AlignmentSet& train, const AlignmentSet& test) {
  std::unordered_set<std::size_t> src, tgt;
  for (const auto& [s, t] : train.pairs) {
    src.insert(s);
    tgt.insert(t);
  }
  for (const auto& [s, t] : test.pairs) {
    if (src.count(s)) {
      throw DataError("train and test seeds overlap on source entity " +
                      std::to_string(s));
    }
    if (tgt.count(t)) {
      throw DataError("train and test seeds overlap on target entity " +
                      std::to_string(t));
    }
  }
}

}  // namespace

bool AlignmentSet::is_one_to_one() const {
  std::unordered_set<std::size_t> src, tgt;
  for (const auto& [s, t] : pairs) {
    if (!src.insert(s).second || !tgt.insert(t).second) return false;
  }
  return true;
}

void AlignmentSet::sort_by_src() {
  if (scores.empty()) {
    std::sort(pairs.begin(), pairs.end());
    return;
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a] < pairs[b];
  });
  AlignmentSet sorted;
  sorted.pairs.reserve(pairs.size());
  sorted.scores.reserve(scores.size());
  for (std::size_t idx : order) {
    sorted.pairs.push_back(pairs[idx]);
    sorted.scores.push_back(scores[idx]);
  }
  *this = std::move(sorted);
}

KgPair load_kg_pair(const fs::path& dir, const PipelineConfig& config) {
  KgPair pair;

  const IdMap ents_1 = load_id_map(dir / "ent_ids_1");
  const IdMap ents_2 = load_id_map(dir / "ent_ids_2");
  const IdMap rels_1 = load_id_map(dir / "rel_ids_1");
  const IdMap rels_2 = load_id_map(dir / "rel_ids_2");
  pair.source.n_entities = ents_1.count;
  pair.source.n_relations = rels_1.count;
  pair.source.entity_labels = ents_1.labels;
  pair.target.n_entities = ents_2.count;
  pair.target.n_relations = rels_2.count;
  pair.target.entity_labels = ents_2.labels;

  if (fs::exists(dir / "time_ids")) {
    pair.n_timestamps = load_id_map(dir / "time_ids").count;
  }

  pair.source.quads =
      load_triples(dir / "triples_1", pair.source.n_entities,
                   pair.source.n_relations, pair.n_timestamps);
  pair.target.quads =
      load_triples(dir / "triples_2", pair.target.n_entities,
                   pair.target.n_relations, pair.n_timestamps);

  for (int side = 0; side < 2; ++side) {
    Mmkg& kg = side == 0 ? pair.source : pair.target;
    const std::string suffix = side == 0 ? "_1" : "_2";
    const fs::path attr_path = dir / ("attr_triples" + suffix);
    if (fs::exists(attr_path)) {
      kg.attr_triples = load_attr_triples(attr_path, kg.n_entities);
      std::size_t max_name = 0;
      for (const auto& t : kg.attr_triples) {
        max_name = std::max(max_name, t.name + 1);
      }
      const fs::path names_path = dir / ("attr_name_ids" + suffix);
      if (fs::exists(names_path)) {
        kg.attr_name_count = load_id_map(names_path).count;
        for (const auto& t : kg.attr_triples) {
          if (t.name >= kg.attr_name_count) {
            throw DataError(attr_path.filename().string() +
                            ": attr name index " + std::to_string(t.name) +
                            " out of range (vocabulary size " +
                            std::to_string(kg.attr_name_count) + ")");
          }
        }
      } else {
        kg.attr_name_count = max_name;
      }
    }

    const fs::path rows_path = dir / ("img_rows" + suffix);
    const fs::path feat_path = dir / ("img_feat" + suffix + ".fmat");
    if (fs::exists(rows_path) || fs::exists(feat_path)) {
      // Both halves of the visual data must be present together.
      const FmatHeader header = read_fmat_header(feat_path);
      kg.entity_images = load_image_links(
          rows_path, kg.n_entities, header.rows, config.max_images);
    }
  }

  pair.train_seeds = load_seed_file(dir / "seeds_train", pair.source.n_entities,
                                    pair.target.n_entities);
  pair.test_seeds = load_seed_file(dir / "seeds_test", pair.source.n_entities,
                                   pair.target.n_entities);
  check_disjoint(pair.train_seeds, pair.test_seeds);

  return pair;
}

DenseMatrix read_fmat(const fs::path& path) {
  const std::string file = path.filename().string();
  const auto buf = read_binary(path);
  const FmatHeader h = parse_fmat_header(buf, file);
  if (h.cols != 0 && h.rows > (buf.size() / 4) / h.cols) {
    throw DataError(file + ": truncated payload (header declares " +
                    std::to_string(h.rows) + "x" + std::to_string(h.cols) +
                    " values)");
  }
  const std::uint64_t n_values = h.rows * h.cols;
  const std::uint64_t expected = kFmatHeaderBytes + n_values * 4;
  if (buf.size() < expected) {
    throw DataError(file + ": truncated payload (expected " +
                    std::to_string(expected) + " bytes, got " +
                    std::to_string(buf.size()) + ")");
  }
  if (buf.size() > expected) {
    throw DataError(file + ": trailing bytes after payload");
  }
  DenseMatrix m(h.rows, h.cols);
  const unsigned char* p = buf.data() + kFmatHeaderBytes;
  for (std::uint64_t k = 0; k < n_values; ++k, p += 4) {
    const auto bits = static_cast<std::uint32_t>(read_le(p, 4));
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) {
      throw DataError(file + ": non-finite value at row " +
                      std::to_string(k / h.cols) + ", col " +
                      std::to_string(k % h.cols));
    }
    m.data()[k] = static_cast<double>(v);
  }
  return m;
}

void write_fmat(const fs::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  unsigned char header[kFmatHeaderBytes] = {'F', 'M', 'A', 'T'};
  header[4] = 1;  // version, little-endian u32
  const std::uint64_t rows = m.rows(), cols = m.cols();
  for (std::size_t i = 0; i < 8; ++i) {
    header[8 + i] = static_cast<unsigned char>(rows >> (8 * i));
    header[16 + i] = static_cast<unsigned char>(cols >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(header), kFmatHeaderBytes);
  for (double v : m.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    unsigned char b[4];
    for (std::size_t i = 0; i < 4; ++i) {
      b[i] = static_cast<unsigned char>(bits >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

FeatureTable load_feature_table(const fs::path& fmat_path,
                                const std::optional<fs::path>& owner_path) {
  FeatureTable table;
  table.matrix = read_fmat(fmat_path);
  const std::size_t n_rows = table.matrix.rows();
  if (!owner_path.has_value()) {
    table.owner.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) table.owner[r] = r;
    return table;
  }
  const std::string file = owner_path->filename().string();
  const auto lines = read_lines(*owner_path);
  table.owner.assign(n_rows, 0);
  std::vector<bool> seen(n_rows, false);
  std::size_t n_lines = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++n_lines;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw ParseError(file, i + 1, "expected '<row>\\t<owner_id>'");
    }
    const std::size_t row =
        parse_bounded(fields[0], file, i + 1, "row index", n_rows);
    if (seen[row]) {
      throw ParseError(file, i + 1,
                       "row " + std::to_string(row) + " listed more than once");
    }
    seen[row] = true;
    table.owner[row] = parse_index(fields[1], file, i + 1, "owner id");
  }
  if (n_lines != n_rows) {
    throw DataError(file + ": owner/row count mismatch (" +
                    std::to_string(n_lines) + " lines for " +
                    std::to_string(n_rows) + " rows)");
  }
  return table;
}

void write_predictions(const AlignmentSet& pairs, const fs::path& path) {
  AlignmentSet sorted = pairs;
  sorted.sort_by_src();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  char buf[64];
  for (std::size_t i = 0; i < sorted.pairs.size(); ++i) {
    const double score = sorted.scores.empty() ? 0.0 : sorted.scores[i];
    std::snprintf(buf, sizeof buf, "%.6f", score);
    out << sorted.pairs[i].first << '\t' << sorted.pairs[i].second << '\t'
        << buf << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

void write_pairs(const AlignmentSet& pairs, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  for (const auto& [src, tgt] : pairs.pairs) {
    out << src << '\t' << tgt << '\n';
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

AlignmentSet read_pairs(const fs::path& path, bool one_to_one) {
  const std::string file = path.filename().string();
  const auto lines = read_lines(path);
  AlignmentSet set;
  bool any_scores = false;
  std::unordered_set<std::size_t> seen_src, seen_tgt;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2 && fields.size() != 3) {
      throw ParseError(file, i + 1, "expected 2 or 3 tab-separated fields");
    }
    const std::size_t src =
        parse_index(fields[0], file, i + 1, "entity index");
    const std::size_t tgt =
        parse_index(fields[1], file, i + 1, "entity index");
    if (one_to_one) {
      if (!seen_src.insert(src).second) {
        throw ParseError(file, i + 1,
                         "duplicate entity " + std::to_string(src) +
                             " on source side");
      }
      if (!seen_tgt.insert(tgt).second) {
        throw ParseError(file, i + 1,
                         "duplicate entity " + std::to_string(tgt) +
                             " on target side");
      }
    }
    set.pairs.emplace_back(src, tgt);
    if (fields.size() == 3) {
      any_scores = true;
      double score = 0.0;
      const auto* b = fields[2].data();
      const auto* e = fields[2].data() + fields[2].size();
      const auto [ptr, ec] = std::from_chars(b, e, score);
      if (ec != std::errc{} || ptr != e) {
        throw ParseError(file, i + 1,
                         "malformed score '" + std::string(fields[2]) + "'");
      }
      set.scores.push_back(score);
    } else {
      set.scores.push_back(0.0);
    }
  }
  if (!any_scores) set.scores.clear();
  return set;
}

std::string DatasetBundle::unavailable_reason(ModalityKind kind) const {
  const auto it = unavailable.find(kind);
  return it == unavailable.end() ? "" : it->second;
}

namespace {

std::string missing_list(const fs::path& dir,
                         std::initializer_list<const char*> names) {
  std::string out;
  for (const char* name : names) {
    if (fs::exists(dir / name)) continue;
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

DatasetBundle load_dataset(const fs::path& dir, const PipelineConfig& config) {
  DatasetBundle bundle;
  bundle.pair = load_kg_pair(dir, config);

  if (!bundle.pair.source.quads.empty() && !bundle.pair.target.quads.empty()) {
    bundle.available.insert(ModalityKind::Relational);
  } else {
    bundle.unavailable[ModalityKind::Relational] =
        "no triples in one of the graphs";
  }

  const std::string visual_missing = missing_list(
      dir, {"img_rows_1", "img_feat_1.fmat", "img_rows_2", "img_feat_2.fmat"});
  if (visual_missing.empty()) {
    bundle.src_images =
        load_feature_table(dir / "img_feat_1.fmat", dir / "img_rows_1");
    bundle.tgt_images =
        load_feature_table(dir / "img_feat_2.fmat", dir / "img_rows_2");
    bundle.available.insert(ModalityKind::Visual);
  } else {
    bundle.unavailable[ModalityKind::Visual] =
        "missing file(s): " + visual_missing;
  }

  const std::string attr_missing =
      missing_list(dir, {"attr_triples_1", "attr_triples_2",
                         "attrname_feat_1.fmat", "attrname_feat_2.fmat"});
  if (attr_missing.empty()) {
    bundle.src_attr_names = load_feature_table(dir / "attrname_feat_1.fmat");
    bundle.tgt_attr_names = load_feature_table(dir / "attrname_feat_2.fmat");
    bundle.available.insert(ModalityKind::Attribute);
  } else {
    bundle.unavailable[ModalityKind::Attribute] =
        "missing file(s): " + attr_missing;
  }

  if (!fs::exists(dir / "time_ids")) {
    bundle.unavailable[ModalityKind::Temporal] = "missing file(s): time_ids";
  } else if (bundle.pair.n_timestamps == 0 ||
             !bundle.pair.source.has_timestamped_quads() ||
             !bundle.pair.target.has_timestamped_quads()) {
    bundle.unavailable[ModalityKind::Temporal] = "no timestamped quadruples";
  } else {
    bundle.available.insert(ModalityKind::Temporal);
  }

  return bundle;
}

}  // namespace mmalign
