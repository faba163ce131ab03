#include "mmalign/evalrank.hpp"

#include <string>

#include "mmalign/errors.hpp"
#include "mmalign/matrix.hpp"

namespace mmalign {

EvalReport evaluate(const DenseMatrix& scores, const AlignmentSet& gold,
                    std::span<const std::size_t> ns) {
  if (gold.empty()) {
    throw DataError("evaluate: empty gold set");
  }
  EvalReport report;
  report.n_evaluated = gold.size();
  for (std::size_t n : ns) report.hits[n] = 0.0;

  for (const auto& [i, j] : gold.pairs) {
    if (i >= scores.rows() || j >= scores.cols()) {
      throw DataError("evaluate: gold pair (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") out of range for " +
                      std::to_string(scores.rows()) + "x" +
                      std::to_string(scores.cols()) + " scores");
    }
    const auto row = scores.row(i);
    const double gold_score = row[j];
    std::size_t rank = 1;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (row[c] > gold_score || (row[c] == gold_score && c < j)) ++rank;
    }
    report.mrr += 1.0 / static_cast<double>(rank);
    report.mr += static_cast<double>(rank);
    for (std::size_t n : ns) {
      if (rank <= n) report.hits[n] += 1.0;
    }
  }

  const auto count = static_cast<double>(gold.size());
  report.mrr /= count;
  report.mr /= count;
  for (auto& [n, v] : report.hits) v /= count;
  return report;
}

EvalReport evaluate_both_directions(const DenseMatrix& forward_scores,
                                    const AlignmentSet& gold,
                                    std::span<const std::size_t> ns) {
  const EvalReport fwd = evaluate(forward_scores, gold, ns);
  AlignmentSet flipped;
  for (const auto& [s, t] : gold.pairs) flipped.pairs.emplace_back(t, s);
  const EvalReport bwd = evaluate(transpose(forward_scores), flipped, ns);

  EvalReport avg;
  avg.n_evaluated = fwd.n_evaluated;
  avg.mrr = 0.5 * (fwd.mrr + bwd.mrr);
  avg.mr = 0.5 * (fwd.mr + bwd.mr);
  for (const auto& [n, v] : fwd.hits) avg.hits[n] = 0.5 * (v + bwd.hits.at(n));
  return avg;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json hits;
  for (const auto& [n, v] : report.hits) hits[std::to_string(n)] = v;
  return {{"hits", hits},
          {"mrr", report.mrr},
          {"mr", report.mr},
          {"n", report.n_evaluated}};
}

}  // namespace mmalign
