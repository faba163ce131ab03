#pragma once

#include <map>
#include <memory>
#include <string>

#include "mmalign/config.hpp"
#include "mmalign/diag.hpp"
#include "mmalign/kg.hpp"
#include "mmalign/kgio.hpp"

namespace mmalign {

// Each modality contributes one |E_s| x |E_t| similarity matrix, built by
// composing three bridges: entity -> modality item (source side), item ->
// item (cross-graph), and entity -> item (target side).  The composition
// aggregates with either sum (a matrix product) or max, depending on the
// modality.

using ModalityMatrices = std::map<ModalityKind, SimMatrix>;

// Pluggable producer of entity embeddings in a shared space.  Row counts
// must equal the entity counts and the output must be deterministic for
// fixed inputs and seed.
class RelationalEncoder {
 public:
  virtual ~RelationalEncoder() = default;
  virtual std::pair<DenseMatrix, DenseMatrix> encode(
      const KgPair& pair, const AlignmentSet& anchors,
      const PipelineConfig& config) const = 0;
};

// Default encoder: seed-anchored propagation.  Every anchor pair gets a
// deterministic pseudo-random unit vector keyed by (global_seed, source
// entity); both of its entities start from that vector, everyone else
// from zero.
// Features are pushed L hops through the row-normalized undirected
// adjacency (self-loops added, relation labels ignored), the per-hop
// results are concatenated and the rows L2-normalized.
class SeedPropagationEncoder final : public RelationalEncoder {
 public:
  std::pair<DenseMatrix, DenseMatrix> encode(
      const KgPair& pair, const AlignmentSet& anchors,
      const PipelineConfig& config) const override;
};

// Row-normalized undirected unweighted adjacency with self-loops.
DenseMatrix normalized_adjacency(const Mmkg& kg);

// M_R[i][j] = <H_s row i, H_t row j> with rows L2-normalized first.
// A null encoder selects the default SeedPropagationEncoder.
SimMatrix build_relational(const KgPair& pair, const AlignmentSet& anchors,
                           const PipelineConfig& config,
                           const RelationalEncoder* encoder = nullptr);

// Max-composition over image bridges: binary entity-image memberships on
// both sides, image-to-image dot products (cosine unless config.cosine is
// off) across graphs.  Entities without images yield all-zero rows/columns.
SimMatrix build_visual(const KgPair& pair, const FeatureTable& src_images,
                       const FeatureTable& tgt_images,
                       const PipelineConfig& config);

// Sum-composition over distinct (name, value) attribute items.  Item-item
// similarity is nameSim * valueSim; nameSim comes from the name embedding
// tables, valueSim from value_similarity below.
SimMatrix build_attribute(const KgPair& pair,
                          const FeatureTable& src_attr_names,
                          const FeatureTable& tgt_attr_names,
                          const PipelineConfig& config);

// Sum-composition over the shared timestamp vocabulary: per graph, the
// entity-timestamp count matrix is pushed through 1..L adjacency hops,
// hop results concatenated and row-normalized, then multiplied across.
SimMatrix build_temporal(const KgPair& pair, const PipelineConfig& config);

// Similarity of two raw attribute values: when both parse as decimal
// numbers, 1 / max(|a - b|, epsilon); otherwise 1 for byte-equal strings
// and 0 for different ones.
double value_similarity(const std::string& a, const std::string& b,
                        double epsilon);

// One matrix per enabled modality with data present; enabled modalities
// whose files are absent are skipped with a diagnostic record.  Throws
// DataError when nothing can be built.
ModalityMatrices build_all(const DatasetBundle& bundle,
                           const AlignmentSet& anchors,
                           const PipelineConfig& config, Diag diag = Diag());

}  // namespace mmalign
