#include "mmalign/cli.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmalign/diag.hpp"
#include "mmalign/errors.hpp"
#include "mmalign/evalrank.hpp"
#include "mmalign/kgio.hpp"
#include "mmalign/refine.hpp"
#include "mmalign/simpath.hpp"

namespace mmalign {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class StageClock {
 public:
  void start() { started_ = std::chrono::steady_clock::now(); }
  void stop(const std::string& name) {
    const double s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started_)
                         .count();
    stages_[name] = s;
  }
  const std::map<std::string, double>& stages() const { return stages_; }

 private:
  std::chrono::steady_clock::time_point started_;
  std::map<std::string, double> stages_;
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  out << content;
}

ordered_json config_json(const AlignArgs& args) {
  const PipelineConfig& c = args.config;
  std::vector<std::string> kinds;
  for (ModalityKind k : c.enabled) kinds.push_back(to_string(k));
  return {{"sinkhorn_k", c.sinkhorn_k},
          {"refine_rounds", c.refine_rounds},
          {"hops", c.hops_l},
          {"dim", c.embed_dim},
          {"max_images", c.max_images},
          {"epsilon_v", c.epsilon_v},
          {"seed", c.global_seed},
          {"modalities", kinds},
          {"prescale", c.prescale},
          {"cosine", c.cosine},
          {"accept_pseudo", c.accept_pseudo},
          {"unsupervised", args.unsupervised},
          {"hits", args.hits_at}};
}

}  // namespace

int run_align(const AlignArgs& args, std::ostream& err) {
  Diag diag(&err);
  args.config.validate();
  StageClock clock;

  clock.start();
  const DatasetBundle bundle = load_dataset(args.data_dir, args.config);
  clock.stop("load_s");

  if (args.modalities_explicit) {
    for (ModalityKind kind : args.config.enabled) {
      if (!bundle.available.count(kind)) {
        throw DataError("modality '" + to_string(kind) +
                        "' requested but unavailable: " +
                        bundle.unavailable_reason(kind));
      }
    }
  }
  std::set<ModalityKind> usable;
  for (ModalityKind kind : args.config.enabled) {
    if (bundle.available.count(kind)) {
      usable.insert(kind);
    } else {
      diag.emit({{"event", "modality_skipped"},
                 {"modality", to_string(kind)},
                 {"reason", bundle.unavailable_reason(kind)}});
    }
  }
  const bool use_relational = usable.count(ModalityKind::Relational) > 0;

  clock.start();
  PipelineConfig side_config = args.config;
  side_config.enabled = usable;
  side_config.enabled.erase(ModalityKind::Relational);
  ModalityMatrices side;
  if (!side_config.enabled.empty()) {
    side = build_all(bundle, AlignmentSet{}, side_config, diag);
  } else if (!use_relational) {
    throw DataError("no available modalities to build");
  }
  clock.stop("side_paths_s");

  AlignmentSet anchors;
  if (args.unsupervised) {
    if (side.empty()) {
      throw DataError(
          "unsupervised mode requires at least one available side modality");
    }
    anchors = bootstrap_unsupervised(bundle.pair, side, args.config);
    diag.emit({{"event", "bootstrap"}, {"anchors", anchors.size()}});
  } else {
    anchors = bundle.pair.train_seeds;
  }

  clock.start();
  const RefineResult result = refine_loop(bundle.pair, side, anchors,
                                          args.config, use_relational,
                                          nullptr, diag);
  clock.stop("refine_s");

  fs::create_directories(args.out_dir);
  const fs::path pred_path = args.out_dir / "predictions.tsv";
  const fs::path metrics_path = args.out_dir / "metrics.json";
  const fs::path manifest_path = args.out_dir / "manifest.json";

  clock.start();
  ordered_json metrics;
  if (!bundle.pair.test_seeds.empty()) {
    const EvalReport report =
        evaluate(result.forward, bundle.pair.test_seeds, args.hits_at);
    metrics = to_json(report);
  }
  clock.stop("evaluate_s");

  clock.start();
  write_predictions(result.predictions, pred_path);
  if (!metrics.is_null()) {
    write_text(metrics_path, metrics.dump(2) + "\n");
  }

  ordered_json manifest;
  manifest["dataset"] = args.data_dir.string();
  manifest["output_dir"] = args.out_dir.string();
  manifest["config"] = config_json(args);
  std::vector<std::string> used;
  for (ModalityKind kind : usable) used.push_back(to_string(kind));
  manifest["modalities_used"] = used;
  manifest["refine"] = {
      {"rounds", result.state.rounds_run},
      {"initial_anchors", anchors.size()},
      {"pseudo_added_per_round", result.state.pseudo_added_per_round},
      {"anchors_per_round", result.state.anchors_per_round}};
  manifest["outputs"] = {
      {"predictions", pred_path.string()},
      {"metrics", metrics.is_null() ? "" : metrics_path.string()}};
  clock.stop("write_s");
  manifest["stages"] = clock.stages();
  write_text(manifest_path, manifest.dump(2) + "\n");

  if (!metrics.is_null()) {
    diag.emit({{"event", "metrics"},
               {"hits", metrics["hits"]},
               {"mrr", metrics["mrr"]},
               {"mr", metrics["mr"]}});
  }
  return kExitOk;
}

namespace {

// Top-1 metrics from a prediction list: a gold pair whose predicted
// target matches ranks 1, anything else counts as the worst rank over
// the observed target vocabulary.
EvalReport evaluate_predictions(const AlignmentSet& predictions,
                                const AlignmentSet& gold,
                                std::span<const std::size_t> ns) {
  if (gold.empty()) {
    throw DataError("evaluate: empty gold set");
  }
  std::map<std::size_t, std::size_t> predicted;
  std::size_t max_tgt = 0;
  for (const auto& [s, t] : predictions.pairs) {
    predicted[s] = t;
    max_tgt = std::max(max_tgt, t);
  }
  for (const auto& [s, t] : gold.pairs) max_tgt = std::max(max_tgt, t);
  const auto worst = static_cast<double>(max_tgt + 1);

  EvalReport report;
  report.n_evaluated = gold.size();
  for (std::size_t n : ns) report.hits[n] = 0.0;
  for (const auto& [s, t] : gold.pairs) {
    const auto it = predicted.find(s);
    const bool hit = it != predicted.end() && it->second == t;
    const double rank = hit ? 1.0 : worst;
    report.mrr += 1.0 / rank;
    report.mr += rank;
    for (std::size_t n : ns) {
      if (rank <= static_cast<double>(n)) report.hits[n] += 1.0;
    }
  }
  const auto count = static_cast<double>(gold.size());
  report.mrr /= count;
  report.mr /= count;
  for (auto& [n, v] : report.hits) v /= count;
  return report;
}

}  // namespace

int run_eval(const EvalArgs& args, std::ostream& out) {
  const bool have_pred = !args.pred_path.empty();
  const bool have_scores = !args.scores_path.empty();
  if (have_pred == have_scores) {
    throw DataError("eval needs exactly one of --pred or --scores");
  }
  if (have_pred && args.both_directions) {
    throw DataError("--both-directions requires --scores");
  }
  const AlignmentSet gold = read_pairs(args.gold_path, /*one_to_one=*/false);

  EvalReport report;
  if (have_scores) {
    const DenseMatrix scores = read_fmat(args.scores_path);
    report = args.both_directions
                 ? evaluate_both_directions(scores, gold, args.hits_at)
                 : evaluate(scores, gold, args.hits_at);
  } else {
    const AlignmentSet predictions =
        read_pairs(args.pred_path, /*one_to_one=*/false);
    report = evaluate_predictions(predictions, gold, args.hits_at);
  }
  out << to_json(report).dump(2) << "\n";
  return kExitOk;
}

int run_gen_synth(const GenSynthArgs& args, std::ostream& out) {
  const AlignmentSet gold = generate(args.spec, args.out_dir);
  const auto n_train = static_cast<std::size_t>(std::floor(
      args.spec.seed_ratio * static_cast<double>(args.spec.n_entities)));
  ordered_json summary = {{"dataset", args.out_dir.string()},
                          {"entities", args.spec.n_entities},
                          {"gold_pairs", gold.size()},
                          {"train_seeds", n_train},
                          {"test_seeds", gold.size() - n_train}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

namespace {

std::vector<std::size_t> parse_size_list(const std::string& csv,
                                         const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const long long v = std::stoll(item);
      if (v < 1) throw std::invalid_argument("non-positive");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw DataError(std::string("malformed ") + what + " entry '" + item +
                      "'");
    }
  }
  if (out.empty()) {
    throw DataError(std::string("empty ") + what + " list");
  }
  return out;
}

std::set<ModalityKind> parse_modalities(const std::string& csv) {
  std::set<ModalityKind> kinds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.insert(modality_from_string(item));
  }
  if (kinds.empty()) {
    throw DataError("empty --modalities list");
  }
  return kinds;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Multi-modal knowledge-graph entity alignment"};
  app.require_subcommand(1);

  AlignArgs align;
  std::string align_modalities = "rel,vis,attr,time";
  std::string align_hits = "1,5,10";
  auto* align_cmd =
      app.add_subcommand("align", "Run the alignment pipeline on a dataset");
  align_cmd->add_option("--data", align.data_dir, "Dataset directory")
      ->required();
  align_cmd->add_option("--out", align.out_dir, "Output directory")
      ->required();
  auto* modalities_opt = align_cmd->add_option(
      "--modalities", align_modalities,
      "Comma list of rel|vis|attr|time (listed ones must be available)");
  align_cmd->add_option("--sinkhorn-k", align.config.sinkhorn_k,
                        "Sinkhorn iterations");
  align_cmd->add_option("--refine-rounds", align.config.refine_rounds,
                        "Refinement rounds");
  align_cmd->add_option("--hops", align.config.hops_l, "Propagation hops");
  align_cmd->add_option("--dim", align.config.embed_dim,
                        "Relational embedding dimension");
  align_cmd->add_option("--max-images", align.config.max_images,
                        "Image cap per entity");
  align_cmd->add_flag("!--no-prescale", align.config.prescale,
                      "Disable per-modality min-max scaling before the sum");
  align_cmd->add_flag("!--no-cosine", align.config.cosine,
                      "Use raw dot products instead of cosine");
  align_cmd->add_flag("--accept-pseudo,!--no-accept-pseudo",
                      align.config.accept_pseudo,
                      "Accept mutual-argmax pseudo-seeds between rounds");
  align_cmd->add_flag("--unsupervised", align.unsupervised,
                      "Bootstrap anchors from side modalities");
  align_cmd->add_option("--seed", align.config.global_seed, "Global RNG seed");
  align_cmd->add_option("--hits", align_hits, "Hits@N cutoffs");

  EvalArgs eval;
  std::string eval_hits = "1,5,10";
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate predictions or a score matrix");
  eval_cmd->add_option("--pred", eval.pred_path, "Predictions TSV");
  eval_cmd->add_option("--scores", eval.scores_path, "Score matrix (.fmat)");
  eval_cmd->add_option("--gold", eval.gold_path, "Gold pairs TSV")->required();
  eval_cmd->add_flag("--both-directions", eval.both_directions,
                     "Average source->target and target->source reports");
  eval_cmd->add_option("--hits", eval_hits, "Hits@N cutoffs");

  GenSynthArgs gen;
  auto* gen_cmd =
      app.add_subcommand("gen-synth", "Generate a synthetic dataset pair");
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--entities", gen.spec.n_entities, "Entity count");
  gen_cmd->add_option("--relations", gen.spec.n_relations, "Relation count");
  gen_cmd->add_option("--timestamps", gen.spec.n_timestamps,
                      "Timestamp vocabulary size (0 disables)");
  gen_cmd->add_option("--density", gen.spec.triple_density,
                      "Average triples per entity");
  gen_cmd->add_option("--perturbation", gen.spec.perturbation,
                      "Fraction of copied triples dropped or rewired");
  gen_cmd->add_option("--feat-dim", gen.spec.feat_dim, "Feature dimension");
  gen_cmd->add_option("--feat-noise", gen.spec.feat_noise_sigma,
                      "Feature noise sigma");
  gen_cmd->add_option("--attr-per-entity", gen.spec.attr_per_entity,
                      "Attribute triples per entity");
  gen_cmd->add_option("--value-noise", gen.spec.value_noise_sigma,
                      "Attribute value noise sigma");
  gen_cmd->add_option("--seed-ratio", gen.spec.seed_ratio,
                      "Fraction of gold pairs used as train seeds");
  gen_cmd->add_option("--seed", gen.spec.global_seed, "Global RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << nlohmann::json{{"event", "error"}, {"message", e.what()}}.dump()
        << "\n";
    return kExitDataError;
  }

  try {
    if (align_cmd->parsed()) {
      align.config.enabled = parse_modalities(align_modalities);
      align.modalities_explicit = modalities_opt->count() > 0;
      align.hits_at = parse_size_list(align_hits, "--hits");
      return run_align(align, err);
    }
    if (eval_cmd->parsed()) {
      eval.hits_at = parse_size_list(eval_hits, "--hits");
      return run_eval(eval, out);
    }
    return run_gen_synth(gen, out);
  } catch (const DataError& e) {
    err << nlohmann::json{{"event", "error"}, {"message", e.what()}}.dump()
        << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"event", "internal_error"}, {"message", e.what()}}
               .dump()
        << "\n";
    return kExitInternalError;
  }
}

}  // namespace mmalign
