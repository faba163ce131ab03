#include "mmalign/simpath.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "mmalign/errors.hpp"
#include "mmalign/rng.hpp"

namespace mmalign {

namespace {

std::optional<double> parse_decimal(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e || s.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

DenseMatrix maybe_cosine_rows(const DenseMatrix& m, bool cosine) {
  return cosine ? row_l2_normalize(m) : m;
}

// Unit vector for one anchor pair.  Keyed by the pair's source entity
// (unique, since anchors are one-to-one): the vector survives anchor-set
// growth and target relabeling, so embeddings change only where a new
// anchor is actually reachable.
std::vector<double> anchor_vector(std::uint64_t global_seed, std::size_t src,
                                  std::size_t dim) {
  Rng rng(mix_key(global_seed, src));
  std::vector<double> v(dim);
  double sq = 0.0;
  for (double& x : v) {
    x = rng.gaussian();
    sq += x * x;
  }
  if (sq == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

// Propagates features L hops and concatenates the per-hop results.
DenseMatrix propagate_concat(const DenseMatrix& adj, const DenseMatrix& f0,
                             std::size_t hops) {
  DenseMatrix concat(f0.rows(), f0.cols() * hops);
  DenseMatrix f = f0;
  for (std::size_t l = 0; l < hops; ++l) {
    f = matmul(adj, f);
    for (std::size_t i = 0; i < f.rows(); ++i) {
      std::copy(f.row(i).begin(), f.row(i).end(),
                concat.row(i).begin() + l * f0.cols());
    }
  }
  return concat;
}

// Binary entity-to-item membership matrix.
DenseMatrix membership_matrix(std::size_t n_entities, std::size_t n_items,
                              const std::vector<ImageLink>& links) {
  DenseMatrix m(n_entities, n_items);
  for (const auto& link : links) m(link.entity, link.row) = 1.0;
  return m;
}

}  // namespace

DenseMatrix normalized_adjacency(const Mmkg& kg) {
  const std::size_t n = kg.n_entities;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& q : kg.quads) {
    edges.insert({q.head, q.tail});
    edges.insert({q.tail, q.head});
  }
  DenseMatrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i) adj(i, i) = 1.0;
  for (const auto& [u, v] : edges) adj(u, v) = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = adj.row(i);
    double sum = 0.0;
    for (double v : row) sum += v;
    const double inv = 1.0 / sum;  // >= 1 from the self-loop
    for (double& v : row) v *= inv;
  }
  return adj;
}

std::pair<DenseMatrix, DenseMatrix> SeedPropagationEncoder::encode(
    const KgPair& pair, const AlignmentSet& anchors,
    const PipelineConfig& config) const {
  if (anchors.empty()) {
    throw DataError("relational encoder requires a non-empty anchor set");
  }
  if (!anchors.is_one_to_one()) {
    throw DataError("anchor set is not one-to-one");
  }
  const std::size_t d = config.embed_dim;
  DenseMatrix f0_src(pair.source.n_entities, d);
  DenseMatrix f0_tgt(pair.target.n_entities, d);
  for (const auto& [src, tgt] : anchors.pairs) {
    const auto v = anchor_vector(config.global_seed, src, d);
    std::copy(v.begin(), v.end(), f0_src.row(src).begin());
    std::copy(v.begin(), v.end(), f0_tgt.row(tgt).begin());
  }
  const DenseMatrix adj_src = normalized_adjacency(pair.source);
  const DenseMatrix adj_tgt = normalized_adjacency(pair.target);
  DenseMatrix h_src =
      row_l2_normalize(propagate_concat(adj_src, f0_src, config.hops_l));
  DenseMatrix h_tgt =
      row_l2_normalize(propagate_concat(adj_tgt, f0_tgt, config.hops_l));
  return {std::move(h_src), std::move(h_tgt)};
}

SimMatrix build_relational(const KgPair& pair, const AlignmentSet& anchors,
                           const PipelineConfig& config,
                           const RelationalEncoder* encoder) {
  static const SeedPropagationEncoder default_encoder;
  if (encoder == nullptr) encoder = &default_encoder;
  auto [h_src, h_tgt] = encoder->encode(pair, anchors, config);
  return matmul(row_l2_normalize(h_src), transpose(row_l2_normalize(h_tgt)));
}

SimMatrix build_visual(const KgPair& pair, const FeatureTable& src_images,
                       const FeatureTable& tgt_images,
                       const PipelineConfig& config) {
  if (src_images.matrix.cols() != tgt_images.matrix.cols()) {
    throw DataError("visual feature dimension mismatch: " +
                    std::to_string(src_images.matrix.cols()) + " vs " +
                    std::to_string(tgt_images.matrix.cols()));
  }
  const DenseMatrix src_feats = maybe_cosine_rows(src_images.matrix, config.cosine);
  const DenseMatrix tgt_feats = maybe_cosine_rows(tgt_images.matrix, config.cosine);
  const DenseMatrix cross = matmul(src_feats, transpose(tgt_feats));
  const DenseMatrix member_src = membership_matrix(
      pair.source.n_entities, src_feats.rows(), pair.source.entity_images);
  const DenseMatrix member_tgt = membership_matrix(
      pair.target.n_entities, tgt_feats.rows(), pair.target.entity_images);
  return max_compose(member_src, cross, member_tgt);
}

namespace {

// Distinct (name, value) items of one graph, with parsed values and the
// entity memberships, in sorted item order.
struct AttrItems {
  std::vector<std::pair<std::size_t, std::string>> items;
  std::vector<std::optional<double>> numeric;
  DenseMatrix membership;  // |E| x |items|
};

AttrItems collect_attr_items(const Mmkg& kg, std::size_t n_embedding_rows,
                             const char* side) {
  AttrItems out;
  std::set<std::pair<std::size_t, std::string>> distinct;
  for (const auto& t : kg.attr_triples) {
    if (t.name >= n_embedding_rows) {
      throw DataError(std::string(side) + " graph: attr name index " +
                      std::to_string(t.name) +
                      " has no embedding row (table has " +
                      std::to_string(n_embedding_rows) + " rows)");
    }
    distinct.insert({t.name, t.value});
  }
  out.items.assign(distinct.begin(), distinct.end());
  out.numeric.reserve(out.items.size());
  for (const auto& item : out.items) {
    out.numeric.push_back(parse_decimal(item.second));
  }
  std::map<std::pair<std::size_t, std::string>, std::size_t> index;
  for (std::size_t i = 0; i < out.items.size(); ++i) index[out.items[i]] = i;
  out.membership = DenseMatrix(kg.n_entities, out.items.size());
  for (const auto& t : kg.attr_triples) {
    out.membership(t.entity, index.at({t.name, t.value})) = 1.0;
  }
  return out;
}

double value_similarity_parsed(const std::optional<double>& a_num,
                               const std::string& a_raw,
                               const std::optional<double>& b_num,
                               const std::string& b_raw, double epsilon) {
  if (a_num.has_value() && b_num.has_value()) {
    return 1.0 / std::max(std::abs(*a_num - *b_num), epsilon);
  }
  return a_raw == b_raw ? 1.0 : 0.0;
}

}  // namespace

double value_similarity(const std::string& a, const std::string& b,
                        double epsilon) {
  return value_similarity_parsed(parse_decimal(a), a, parse_decimal(b), b,
                                 epsilon);
}

SimMatrix build_attribute(const KgPair& pair,
                          const FeatureTable& src_attr_names,
                          const FeatureTable& tgt_attr_names,
                          const PipelineConfig& config) {
  if (src_attr_names.matrix.cols() != tgt_attr_names.matrix.cols()) {
    throw DataError("attribute name embedding dimension mismatch: " +
                    std::to_string(src_attr_names.matrix.cols()) + " vs " +
                    std::to_string(tgt_attr_names.matrix.cols()));
  }
  const AttrItems src = collect_attr_items(
      pair.source, src_attr_names.matrix.rows(), "source");
  const AttrItems tgt = collect_attr_items(
      pair.target, tgt_attr_names.matrix.rows(), "target");

  const DenseMatrix name_sim =
      matmul(maybe_cosine_rows(src_attr_names.matrix, config.cosine),
             transpose(maybe_cosine_rows(tgt_attr_names.matrix, config.cosine)));

  DenseMatrix cross(src.items.size(), tgt.items.size());
  for (std::size_t a = 0; a < src.items.size(); ++a) {
    for (std::size_t b = 0; b < tgt.items.size(); ++b) {
      const double vs = value_similarity_parsed(
          src.numeric[a], src.items[a].second, tgt.numeric[b],
          tgt.items[b].second, config.epsilon_v);
      cross(a, b) =
          name_sim(src.items[a].first, tgt.items[b].first) * vs;
    }
  }
  return matmul(matmul(src.membership, cross), transpose(tgt.membership));
}

SimMatrix build_temporal(const KgPair& pair, const PipelineConfig& config) {
  if (pair.n_timestamps == 0 || !pair.source.has_timestamped_quads() ||
      !pair.target.has_timestamped_quads()) {
    throw DataError(
        "temporal modality requested but no timestamped quadruples");
  }
  const auto theta = [&](const Mmkg& kg) {
    DenseMatrix counts(kg.n_entities, pair.n_timestamps);
    for (const auto& q : kg.quads) {
      if (!q.time.has_value()) continue;
      counts(q.head, *q.time) += 1.0;
      if (q.tail != q.head) counts(q.tail, *q.time) += 1.0;
    }
    return row_l2_normalize(
        propagate_concat(normalized_adjacency(kg), counts, config.hops_l));
  };
  return matmul(theta(pair.source), transpose(theta(pair.target)));
}

ModalityMatrices build_all(const DatasetBundle& bundle,
                           const AlignmentSet& anchors,
                           const PipelineConfig& config, Diag diag) {
  ModalityMatrices out;
  for (ModalityKind kind : config.enabled) {
    if (!bundle.available.count(kind)) {
      diag.emit({{"event", "modality_skipped"},
                 {"modality", to_string(kind)},
                 {"reason", bundle.unavailable_reason(kind)}});
      continue;
    }
    switch (kind) {
      case ModalityKind::Relational:
        out.emplace(kind, build_relational(bundle.pair, anchors, config));
        break;
      case ModalityKind::Visual:
        out.emplace(kind, build_visual(bundle.pair, *bundle.src_images,
                                       *bundle.tgt_images, config));
        break;
      case ModalityKind::Attribute:
        out.emplace(kind,
                    build_attribute(bundle.pair, *bundle.src_attr_names,
                                    *bundle.tgt_attr_names, config));
        break;
      case ModalityKind::Temporal:
        out.emplace(kind, build_temporal(bundle.pair, config));
        break;
    }
  }
  if (out.empty()) {
    throw DataError("no available modalities to build");
  }
  return out;
}

}  // namespace mmalign
