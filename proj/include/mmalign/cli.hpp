#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mmalign/config.hpp"
#include "mmalign/synth.hpp"

namespace mmalign {

// Exit codes: 0 success, 1 user/data error, 2 internal invariant violation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitInternalError = 2;

struct AlignArgs {
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  PipelineConfig config;
  bool modalities_explicit = false;  // listed modalities must be available
  bool unsupervised = false;
  std::vector<std::size_t> hits_at = {1, 5, 10};
};

struct EvalArgs {
  std::filesystem::path pred_path;    // predictions TSV, or
  std::filesystem::path scores_path;  // full score matrix (.fmat)
  std::filesystem::path gold_path;
  bool both_directions = false;
  std::vector<std::size_t> hits_at = {1, 5, 10};
};

struct GenSynthArgs {
  SynthSpec spec;
  std::filesystem::path out_dir;
};

// Full pipeline: load -> modality paths -> iterative refinement ->
// predictions -> metrics.  Writes predictions.tsv, metrics.json (when
// test seeds exist) and manifest.json under args.out_dir.  Diagnostics go
// to `err` as line-delimited JSON.
int run_align(const AlignArgs& args, std::ostream& err = std::cerr);

int run_eval(const EvalArgs& args, std::ostream& out = std::cout);

int run_gen_synth(const GenSynthArgs& args, std::ostream& out = std::cout);

// argv-level entry point used by the binary and by tests.
int cli_main(int argc, const char* const* argv,
             std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace mmalign
