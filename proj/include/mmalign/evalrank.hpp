#pragma once

#include <map>
#include <span>

#include <json.hpp>

#include "mmalign/kg.hpp"

namespace mmalign {

struct EvalReport {
  std::map<std::size_t, double> hits;  // N -> fraction in [0,1]
  double mrr = 0.0;
  double mr = 0.0;
  std::size_t n_evaluated = 0;
};

// Ranks each gold pair (i, j) by
//   rank = 1 + #{j' : scores[i][j'] > scores[i][j]}
//            + #{j' < j : scores[i][j'] == scores[i][j]}
// (ties broken by column index, matching row_argmax) and reports
// Hits@N = mean[rank <= N], MRR = mean 1/rank, MR = mean rank.
// Throws DataError on an empty gold set or out-of-range indices.
EvalReport evaluate(const DenseMatrix& scores, const AlignmentSet& gold,
                    std::span<const std::size_t> ns);

// Convenience: averages the source->target and target->source reports.
EvalReport evaluate_both_directions(const DenseMatrix& forward_scores,
                                    const AlignmentSet& gold,
                                    std::span<const std::size_t> ns);

// {"hits": {"1": ..., ...}, "mrr": ..., "mr": ..., "n": ...}
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace mmalign
