#pragma once

#include <cstdint>
#include <filesystem>

#include "mmalign/kg.hpp"

namespace mmalign {

// Recipe for a ground-truth-known dataset pair: a random base graph plus
// an entity-permuted copy with structural and feature noise.
struct SynthSpec {
  std::size_t n_entities = 500;
  std::size_t n_relations = 8;
  std::size_t n_timestamps = 12;
  double triple_density = 3.0;   // average triples per entity
  double perturbation = 0.0;     // fraction of copied triples dropped/rewired
  std::size_t feat_dim = 32;
  double feat_noise_sigma = 0.0;
  std::size_t attr_per_entity = 2;
  double value_noise_sigma = 0.0;
  double seed_ratio = 0.2;       // fraction of gold pairs used as train seeds
  std::uint64_t global_seed = 0;

  void validate() const;  // throws DataError on out-of-range fields
};

// Writes a complete dataset directory (including `gold_all`) and returns
// the gold alignment.  Deterministic: a fixed spec yields byte-identical
// directories.
AlignmentSet generate(const SynthSpec& spec,
                      const std::filesystem::path& out_dir);

}  // namespace mmalign
