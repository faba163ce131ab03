#pragma once

#include <cstdint>
#include <set>
#include <string>

namespace mmalign {

enum class ModalityKind { Relational, Visual, Attribute, Temporal };

std::string to_string(ModalityKind kind);

// Parses "rel", "vis", "attr" or "time"; throws DataError otherwise.
ModalityKind modality_from_string(const std::string& name);

std::set<ModalityKind> all_modalities();

struct PipelineConfig {
  std::size_t sinkhorn_k = 10;
  std::size_t refine_rounds = 3;
  std::size_t hops_l = 2;
  std::size_t max_images = 6;
  std::size_t embed_dim = 64;
  double epsilon_v = 1e-6;
  std::uint64_t global_seed = 0;
  std::set<ModalityKind> enabled = all_modalities();
  bool prescale = true;
  bool cosine = true;
  bool accept_pseudo = true;

  // Throws DataError when a field is out of range.
  void validate() const;
};

}  // namespace mmalign
