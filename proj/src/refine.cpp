#include "mmalign/refine.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <unordered_set>

#include "mmalign/errors.hpp"

namespace mmalign {

namespace {

ModalityMatrices transposed(const ModalityMatrices& matrices) {
  ModalityMatrices out;
  for (const auto& [kind, m] : matrices) out.emplace(kind, transpose(m));
  return out;
}

}  // namespace

AlignmentSet mutual_argmax_pairs(const SimMatrix& forward,
                                 const SimMatrix& backward) {
  if (forward.rows() != backward.cols() || forward.cols() != backward.rows()) {
    throw std::invalid_argument("mutual_argmax_pairs: shape mismatch");
  }
  const auto fwd_best = row_argmax(forward);
  const auto bwd_best = row_argmax(backward);
  AlignmentSet out;
  for (std::size_t i = 0; i < fwd_best.size(); ++i) {
    const std::size_t j = fwd_best[i];
    if (bwd_best[j] == i) {
      out.pairs.emplace_back(i, j);
      out.scores.push_back(forward(i, j));
    }
  }
  return out;
}

RefineResult refine_loop(const KgPair& pair,
                         const ModalityMatrices& side_matrices,
                         const AlignmentSet& initial_anchors,
                         const PipelineConfig& config, bool use_relational,
                         const RelationalEncoder* encoder, Diag diag) {
  config.validate();
  if (!initial_anchors.is_one_to_one()) {
    throw DataError("initial anchors are not one-to-one");
  }

  RefineState state;
  state.anchors = initial_anchors;
  state.anchors.scores.clear();

  std::unordered_set<std::size_t> anchor_src, anchor_tgt;
  for (const auto& [s, t] : state.anchors.pairs) {
    anchor_src.insert(s);
    anchor_tgt.insert(t);
  }
  std::unordered_set<std::size_t> test_src, test_tgt;
  for (const auto& [s, t] : pair.test_seeds.pairs) {
    test_src.insert(s);
    test_tgt.insert(t);
  }

  const ModalityMatrices side_bwd = transposed(side_matrices);

  for (std::size_t round = 1; round <= config.refine_rounds; ++round) {
    const auto started = std::chrono::steady_clock::now();
    ModalityMatrices fwd = side_matrices;
    ModalityMatrices bwd = side_bwd;
    if (use_relational) {
      SimMatrix rel = build_relational(pair, state.anchors, config, encoder);
      bwd.emplace(ModalityKind::Relational, transpose(rel));
      fwd.emplace(ModalityKind::Relational, std::move(rel));
    }
    state.forward = fuse(fwd, config);
    state.backward = fuse(bwd, config);
    state.rounds_run = round;

    std::size_t added = 0;
    if (config.accept_pseudo) {
      const AlignmentSet candidates =
          mutual_argmax_pairs(state.forward, state.backward);
      for (const auto& [i, j] : candidates.pairs) {
        if (anchor_src.count(i) || anchor_tgt.count(j)) continue;
        if (test_src.count(i) || test_tgt.count(j)) continue;
        state.anchors.pairs.emplace_back(i, j);
        anchor_src.insert(i);
        anchor_tgt.insert(j);
        ++added;
      }
    }
    state.pseudo_added_per_round.push_back(added);
    state.anchors_per_round.push_back(state.anchors.size());
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    diag.emit({{"event", "refine_round"},
               {"round", round},
               {"pseudo_added", added},
               {"anchors_total", state.anchors.size()},
               {"elapsed_s", elapsed}});
  }

  RefineResult result;
  result.forward = state.forward;

  std::vector<std::size_t> sources;
  if (!pair.test_seeds.empty()) {
    for (const auto& [s, t] : pair.test_seeds.pairs) sources.push_back(s);
    std::sort(sources.begin(), sources.end());
  } else {
    for (std::size_t i = 0; i < result.forward.rows(); ++i) {
      sources.push_back(i);
    }
  }
  const auto best = row_argmax(result.forward);
  for (std::size_t src : sources) {
    result.predictions.pairs.emplace_back(src, best[src]);
    result.predictions.scores.push_back(result.forward(src, best[src]));
  }

  result.state = std::move(state);
  return result;
}

AlignmentSet bootstrap_unsupervised(const KgPair& pair,
                                    const ModalityMatrices& side_matrices,
                                    const PipelineConfig& config) {
  if (side_matrices.empty()) {
    throw DataError("unsupervised bootstrap requires at least one side modality");
  }
  if (side_matrices.count(ModalityKind::Relational)) {
    throw DataError("unsupervised bootstrap must not use the relational modality");
  }
  const SimMatrix forward = fuse(side_matrices, config);
  if (forward.rows() != pair.source.n_entities ||
      forward.cols() != pair.target.n_entities) {
    throw std::invalid_argument("bootstrap: side matrix shape mismatch");
  }
  const SimMatrix backward = fuse(transposed(side_matrices), config);
  return mutual_argmax_pairs(forward, backward);
}

}  // namespace mmalign
