#pragma once

#include "mmalign/config.hpp"
#include "mmalign/diag.hpp"
#include "mmalign/fusion.hpp"
#include "mmalign/simpath.hpp"

namespace mmalign {

struct RefineState {
  std::size_t rounds_run = 0;
  AlignmentSet anchors;  // initial anchors plus accepted pseudo-seeds
  SimMatrix forward;
  SimMatrix backward;
  std::vector<std::size_t> pseudo_added_per_round;
  std::vector<std::size_t> anchors_per_round;
};

struct RefineResult {
  SimMatrix forward;
  AlignmentSet predictions;
  RefineState state;
};

// Pairs (i, j) where j is row i's argmax in `forward` and i is row j's
// argmax in `backward` (|E_t| x |E_s|).  One-to-one by construction.
AlignmentSet mutual_argmax_pairs(const SimMatrix& forward,
                                 const SimMatrix& backward);

// Runs `config.refine_rounds` rounds: re-encode the relational modality
// from the current anchors, fuse forward and (independently, over the
// transposed modality matrices) backward, extract mutual-argmax
// candidates, and accept those that collide with no existing anchor on
// either side.  Accepted pseudo-seeds only ever augment the anchor set.
// Entities appearing in the held-out test seeds are never anchored, so
// reported metrics stay leakage-free; their predictions come from the
// final forward matrix only.
//
// `side_matrices` are the anchor-independent modality outputs, computed
// once by the caller.  With `use_relational` off the fusion uses the side
// matrices alone.  Predictions cover the test-seed sources, or every
// source entity when there are no test seeds.
RefineResult refine_loop(const KgPair& pair,
                         const ModalityMatrices& side_matrices,
                         const AlignmentSet& initial_anchors,
                         const PipelineConfig& config,
                         bool use_relational = true,
                         const RelationalEncoder* encoder = nullptr,
                         Diag diag = Diag());

// Unsupervised start: fuse the side modalities alone in both directions
// and return the mutual-argmax pairs as initial anchors.
AlignmentSet bootstrap_unsupervised(const KgPair& pair,
                                    const ModalityMatrices& side_matrices,
                                    const PipelineConfig& config);

}  // namespace mmalign
