#pragma once

#include "mmalign/config.hpp"
#include "mmalign/simpath.hpp"

namespace mmalign {

// k full iterations of alternating row-then-column normalization of
// exp(x - max(x)).  Output entries are strictly positive; for square
// inputs every column sums to 1 after the final step and row sums
// approach 1 as k grows.  Throws std::invalid_argument on an empty
// matrix.
DenseMatrix sinkhorn(const DenseMatrix& x, std::size_t k);

// Elementwise sum of the modality matrices followed by sinkhorn with
// config.sinkhorn_k.  With config.prescale each matrix is min-max scaled
// to [0,1] first, so a wide-range modality cannot drown the others;
// prescale=false sums the raw matrices.
SimMatrix fuse(const ModalityMatrices& matrices, const PipelineConfig& config);

}  // namespace mmalign
