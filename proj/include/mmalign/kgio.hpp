#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "mmalign/config.hpp"
#include "mmalign/kg.hpp"

namespace mmalign {

// Dataset directory layout (UTF-8, tab-separated, LF):
//   ent_ids_1, ent_ids_2        "<int>\t<label>"; n_entities = max id + 1
//   rel_ids_1, rel_ids_2        same shape for relations
//   time_ids                    optional; shared timestamp vocabulary
//   triples_1, triples_2        "<h>\t<r>\t<t>" or "<h>\t<r>\t<t>\t<time>"
//   attr_triples_*              optional; "<ent>\t<name_id>\t<value>"
//   attr_name_ids_*             optional; "<int>\t<name>"
//   img_rows_* + img_feat_*.fmat    optional; owner lines "<row>\t<ent>"
//   attrname_feat_*.fmat        optional; row r embeds attr name r
//   seeds_train, seeds_test     "<src_ent>\t<tgt_ent>"; may be empty
//
// FMAT: magic "FMAT", u32 version=1, u64 rows, u64 cols (little-endian),
// then rows*cols little-endian IEEE-754 binary32 values, row-major.

// Loads and fully validates the pair of graphs.  Modalities whose files
// are absent are simply not represented (empty attr/image lists); the
// caller decides availability.  Throws DataError/ParseError with file and
// line on any malformed input.
KgPair load_kg_pair(const std::filesystem::path& dataset_dir,
                    const PipelineConfig& config);

// Reads an FMAT file into a table.  With an owner path, owner lines must
// cover each row exactly once; without one the owner is the identity
// (row r owns id r, as for attribute-name embeddings).
FeatureTable load_feature_table(
    const std::filesystem::path& fmat_path,
    const std::optional<std::filesystem::path>& owner_path = std::nullopt);

DenseMatrix read_fmat(const std::filesystem::path& path);
void write_fmat(const std::filesystem::path& path, const DenseMatrix& m);

// "<src>\t<tgt>\t<score>" lines sorted by src index, score with six
// decimals; re-reading yields an identical set.
void write_predictions(const AlignmentSet& pairs,
                       const std::filesystem::path& path);

// Two-column pair files (seeds, gold).
void write_pairs(const AlignmentSet& pairs, const std::filesystem::path& path);

// Reads 2- or 3-column pair files.  When one_to_one is set, a repeated
// source or target entity is an error.
AlignmentSet read_pairs(const std::filesystem::path& path, bool one_to_one);

// Everything the pipeline needs from one dataset directory.
struct DatasetBundle {
  KgPair pair;
  std::optional<FeatureTable> src_images, tgt_images;
  std::optional<FeatureTable> src_attr_names, tgt_attr_names;
  std::set<ModalityKind> available;
  std::map<ModalityKind, std::string> unavailable;  // kind -> reason

  // Reason a modality is unavailable (names the missing files), or "".
  std::string unavailable_reason(ModalityKind kind) const;
};

DatasetBundle load_dataset(const std::filesystem::path& dataset_dir,
                           const PipelineConfig& config);

}  // namespace mmalign
