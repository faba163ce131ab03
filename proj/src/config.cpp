#include "mmalign/config.hpp"

#include "mmalign/errors.hpp"

namespace mmalign {

std::string to_string(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::Relational: return "relational";
    case ModalityKind::Visual: return "visual";
    case ModalityKind::Attribute: return "attribute";
    case ModalityKind::Temporal: return "temporal";
  }
  return "unknown";
}

ModalityKind modality_from_string(const std::string& name) {
  if (name == "rel") return ModalityKind::Relational;
  if (name == "vis") return ModalityKind::Visual;
  if (name == "attr") return ModalityKind::Attribute;
  if (name == "time") return ModalityKind::Temporal;
  throw DataError("unknown modality '" + name +
                  "' (expected rel, vis, attr or time)");
}

std::set<ModalityKind> all_modalities() {
  return {ModalityKind::Relational, ModalityKind::Visual,
          ModalityKind::Attribute, ModalityKind::Temporal};
}

void PipelineConfig::validate() const {
  if (sinkhorn_k < 1) throw DataError("sinkhorn_k must be >= 1");
  if (refine_rounds < 1) throw DataError("refine_rounds must be >= 1");
  if (hops_l < 1) throw DataError("hops_l must be >= 1");
  if (epsilon_v <= 0.0) throw DataError("epsilon_v must be > 0");
  if (embed_dim < 1) throw DataError("embed_dim must be >= 1");
  if (max_images < 1) throw DataError("max_images must be >= 1");
}

}  // namespace mmalign
