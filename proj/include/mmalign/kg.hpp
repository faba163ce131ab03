#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmalign/matrix.hpp"

namespace mmalign {

// Relational fact; `time` is absent for plain triples.
struct Quad {
  std::size_t head = 0;
  std::size_t rel = 0;
  std::size_t tail = 0;
  std::optional<std::size_t> time;

  auto operator<=>(const Quad&) const = default;
};

struct AttrTriple {
  std::size_t entity = 0;
  std::size_t name = 0;
  std::string value;  // raw string, parsed downstream

  auto operator<=>(const AttrTriple&) const = default;
};

// Link from an entity to one row of the visual feature table.
struct ImageLink {
  std::size_t entity = 0;
  std::size_t row = 0;

  auto operator<=>(const ImageLink&) const = default;
};

// One knowledge graph.  Immutable after loading; loaders store quads,
// attribute triples, image links and seeds in sorted order so that the
// result does not depend on input line order (the per-entity image cap is
// the one place where file order matters, and it is applied first).
struct Mmkg {
  std::size_t n_entities = 0;
  std::size_t n_relations = 0;
  std::vector<Quad> quads;
  std::vector<AttrTriple> attr_triples;
  std::vector<ImageLink> entity_images;
  std::size_t attr_name_count = 0;
  std::vector<std::string> entity_labels;

  bool has_timestamped_quads() const {
    for (const auto& q : quads) {
      if (q.time.has_value()) return true;
    }
    return false;
  }
};

// Entity pairs (seeds, pseudo-seeds, predictions), optionally scored.
struct AlignmentSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> scores;  // empty, or one score per pair

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }

  bool is_one_to_one() const;
  void sort_by_src();
};

struct KgPair {
  Mmkg source;
  Mmkg target;
  std::size_t n_timestamps = 0;  // shared vocabulary
  AlignmentSet train_seeds;
  AlignmentSet test_seeds;
};

// Feature rows plus the mapping row -> owner id (entity index for image
// features, attribute-name index for name embeddings).
struct FeatureTable {
  DenseMatrix matrix;
  std::vector<std::size_t> owner;
};

}  // namespace mmalign
