#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mmalign/errors.hpp"
#include "mmalign/kgio.hpp"
#include "mmalign/simpath.hpp"
#include "mmalign/synth.hpp"
#include "test_util.hpp"

using namespace mmalign;
using test::rand_matrix;
using test::TempDir;

namespace {

Mmkg make_graph(std::size_t n_entities,
                const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                std::size_t n_relations = 1) {
  Mmkg kg;
  kg.n_entities = n_entities;
  kg.n_relations = n_relations;
  for (const auto& [h, t] : edges) kg.quads.push_back({h, 0, t, {}});
  return kg;
}

AlignmentSet make_anchors(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  AlignmentSet set;
  set.pairs = pairs;
  return set;
}

FeatureTable make_table(const DenseMatrix& m) {
  FeatureTable t;
  t.matrix = m;
  t.owner.resize(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) t.owner[r] = r;
  return t;
}

}  // namespace

TEST_CASE("relational: identical chain graphs align on the diagonal") {
  KgPair pair;
  pair.source = make_graph(3, {{0, 1}, {1, 2}});
  pair.target = make_graph(3, {{0, 1}, {1, 2}});
  const auto anchors = make_anchors({{0, 0}, {1, 1}, {2, 2}});
  PipelineConfig config;
  const SimMatrix m = build_relational(pair, anchors, config);
  CHECK(row_argmax(m) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("relational: no triples, single anchor dominates its row") {
  KgPair pair;
  pair.source = make_graph(3, {});
  pair.target = make_graph(3, {});
  const auto anchors = make_anchors({{0, 0}});
  const SimMatrix m = build_relational(pair, anchors, PipelineConfig{});
  CHECK(m(0, 0) > m(0, 1));
  CHECK(m(0, 0) > m(0, 2));
}

TEST_CASE("relational: target relabeling permutes columns exactly") {
  KgPair pair;
  pair.source = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  pair.target = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto anchors = make_anchors({{0, 0}, {2, 2}});
  PipelineConfig config;
  const SimMatrix base = build_relational(pair, anchors, config);

  // pi maps old target ids to new ones.
  const std::vector<std::size_t> pi = {2, 0, 3, 1};
  KgPair relabeled = pair;
  relabeled.target.quads.clear();
  for (const auto& q : pair.target.quads) {
    relabeled.target.quads.push_back({pi[q.head], q.rel, pi[q.tail], q.time});
  }
  AlignmentSet mapped;
  for (const auto& [s, t] : anchors.pairs) mapped.pairs.emplace_back(s, pi[t]);
  const SimMatrix moved = build_relational(relabeled, mapped, config);

  REQUIRE(moved.rows() == base.rows());
  for (std::size_t i = 0; i < base.rows(); ++i) {
    for (std::size_t j = 0; j < base.cols(); ++j) {
      CHECK(moved(i, pi[j]) == base(i, j));
    }
  }
}

TEST_CASE("relational: empty anchors is an error") {
  KgPair pair;
  pair.source = make_graph(2, {{0, 1}});
  pair.target = make_graph(2, {{0, 1}});
  CHECK_THROWS_AS(build_relational(pair, AlignmentSet{}, PipelineConfig{}),
                  DataError);
}

TEST_CASE("relational: new anchors leave disconnected components alone") {
  // Components {0,1} and {2,3} on both sides.
  KgPair pair;
  pair.source = make_graph(4, {{0, 1}, {2, 3}});
  pair.target = make_graph(4, {{0, 1}, {2, 3}});
  PipelineConfig config;
  const SeedPropagationEncoder encoder;
  const auto before =
      encoder.encode(pair, make_anchors({{0, 0}}), config);
  const auto after =
      encoder.encode(pair, make_anchors({{0, 0}, {2, 2}}), config);
  for (std::size_t j = 0; j < before.first.cols(); ++j) {
    CHECK(after.first(1, j) == before.first(1, j));  // entity 1 untouched
    CHECK(after.second(1, j) == before.second(1, j));
  }
  // The anchored component did change.
  bool changed = false;
  for (std::size_t j = 0; j < before.first.cols(); ++j) {
    changed |= after.first(2, j) != before.first(2, j);
  }
  CHECK(changed);
}

TEST_CASE("visual: identical single image gives cosine 1") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  pair.source.entity_images = {{0, 0}};
  pair.target.entity_images = {{0, 0}};
  const auto feats = make_table(DenseMatrix::from_rows({{1, 0, 0}}));
  const SimMatrix m = build_visual(pair, feats, feats, PipelineConfig{});
  REQUIRE(m.rows() == 1);
  CHECK(m(0, 0) == 1.0);
}

TEST_CASE("visual: max over a source entity's images") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  pair.source.entity_images = {{0, 0}, {0, 1}};
  pair.target.entity_images = {{0, 0}};
  const auto src = make_table(DenseMatrix::from_rows(
      {{0.2, std::sqrt(1.0 - 0.04)}, {0.9, std::sqrt(1.0 - 0.81)}}));
  const auto tgt = make_table(DenseMatrix::from_rows({{1, 0}}));
  const SimMatrix m = build_visual(pair, src, tgt, PipelineConfig{});
  CHECK(m(0, 0) == doctest::Approx(0.9));
}

TEST_CASE("visual: imageless entity yields a zero row") {
  KgPair pair;
  pair.source = make_graph(2, {});
  pair.target = make_graph(1, {});
  pair.source.entity_images = {{1, 0}};  // entity 0 has no image
  pair.target.entity_images = {{0, 0}};
  const auto feats = make_table(DenseMatrix::from_rows({{0, 1}}));
  const SimMatrix m = build_visual(pair, feats, feats, PipelineConfig{});
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 0) == 1.0);
}

TEST_CASE("visual: dimension mismatch is an error") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  const auto a = make_table(DenseMatrix(1, 3, 1.0));
  const auto b = make_table(DenseMatrix(1, 4, 1.0));
  CHECK_THROWS_WITH_AS(build_visual(pair, a, b, PipelineConfig{}),
                       doctest::Contains("dimension mismatch"), DataError);
}

TEST_CASE("visual: equals exhaustive image-pair loop exactly") {
  Rng rng(31);
  KgPair pair;
  pair.source = make_graph(4, {});
  pair.target = make_graph(5, {});
  // 6 source images and 7 target images spread over the entities,
  // leaving some entities imageless.
  std::vector<ImageLink> src_links, tgt_links;
  for (std::size_t r = 0; r < 6; ++r) {
    src_links.push_back({rng.uniform_index(3), r});
  }
  for (std::size_t r = 0; r < 7; ++r) {
    tgt_links.push_back({rng.uniform_index(4), r});
  }
  pair.source.entity_images = src_links;
  pair.target.entity_images = tgt_links;
  const auto src = make_table(rand_matrix(rng, 6, 3, -1.0, 1.0));
  const auto tgt = make_table(rand_matrix(rng, 7, 3, -1.0, 1.0));
  PipelineConfig config;
  const SimMatrix got = build_visual(pair, src, tgt, config);

  const DenseMatrix src_hat = row_l2_normalize(src.matrix);
  const DenseMatrix tgt_hat = row_l2_normalize(tgt.matrix);
  DenseMatrix member_src(4, 6), member_tgt(5, 7);
  for (const auto& l : src_links) member_src(l.entity, l.row) = 1.0;
  for (const auto& l : tgt_links) member_tgt(l.entity, l.row) = 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < 6; ++s) {
        for (std::size_t t = 0; t < 7; ++t) {
          double dot = 0.0;
          for (std::size_t k = 0; k < 3; ++k) {
            dot += src_hat(s, k) * tgt_hat(t, k);
          }
          best = std::max(best, member_src(i, s) * (dot * member_tgt(j, t)));
        }
      }
      CHECK(got(i, j) == best);
    }
  }
}

TEST_CASE("value_similarity") {
  const double eps = 1e-6;
  CHECK(value_similarity("1.0", "3.0", eps) == 0.5);
  CHECK(value_similarity("2.5", "2.5", eps) ==
        doctest::Approx(1e6).epsilon(1e-12));
  CHECK(value_similarity("abc", "abc", eps) == 1.0);
  CHECK(value_similarity("abc", "abd", eps) == 0.0);
  CHECK(value_similarity("1.0", "abc", eps) == 0.0);  // mixed kinds differ
  CHECK(value_similarity("", "", eps) == 1.0);
}

TEST_CASE("attribute: shared name, values 1 and 3 give 0.5") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  pair.source.attr_triples = {{0, 0, "1.0"}};
  pair.target.attr_triples = {{0, 0, "3.0"}};
  pair.source.attr_name_count = 1;
  pair.target.attr_name_count = 1;
  const auto names = make_table(DenseMatrix::from_rows({{1, 0}}));
  const SimMatrix m = build_attribute(pair, names, names, PipelineConfig{});
  REQUIRE(m.rows() == 1);
  CHECK(m(0, 0) == 0.5);
}

TEST_CASE("attribute: two matching items sum to 1.0") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  // Both source items land a 0.5 contribution against the target item.
  pair.source.attr_triples = {{0, 0, "1.0"}, {0, 1, "5.0"}};
  pair.target.attr_triples = {{0, 0, "3.0"}};
  pair.source.attr_name_count = 2;
  pair.target.attr_name_count = 2;
  const auto names =
      make_table(DenseMatrix::from_rows({{1, 0}, {1, 0}}));
  const SimMatrix m = build_attribute(pair, names, names, PipelineConfig{});
  CHECK(m(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("attribute: name index without embedding row is an error") {
  KgPair pair;
  pair.source = make_graph(1, {});
  pair.target = make_graph(1, {});
  pair.source.attr_triples = {{0, 3, "1.0"}};
  pair.source.attr_name_count = 4;
  pair.target.attr_triples = {{0, 0, "1.0"}};
  pair.target.attr_name_count = 1;
  const auto names = make_table(DenseMatrix::from_rows({{1, 0}}));
  CHECK_THROWS_WITH_AS(build_attribute(pair, names, names, PipelineConfig{}),
                       doctest::Contains("no embedding row"), DataError);
}

TEST_CASE("attribute: equals exhaustive item-pair sum within 1e-9") {
  Rng rng(32);
  KgPair pair;
  pair.source = make_graph(3, {});
  pair.target = make_graph(4, {});
  const std::size_t n_names = 3;
  const char* values[] = {"1.5", "2.25", "7.0", "x", "y"};
  for (std::size_t e = 0; e < 3; ++e) {
    for (int k = 0; k < 2; ++k) {
      pair.source.attr_triples.push_back(
          {e, rng.uniform_index(n_names), values[rng.uniform_index(5)]});
    }
  }
  for (std::size_t e = 0; e < 4; ++e) {
    pair.target.attr_triples.push_back(
        {e, rng.uniform_index(n_names), values[rng.uniform_index(5)]});
  }
  pair.source.attr_name_count = n_names;
  pair.target.attr_name_count = n_names;
  const auto src_names = make_table(rand_matrix(rng, n_names, 4, -1.0, 1.0));
  const auto tgt_names = make_table(rand_matrix(rng, n_names, 4, -1.0, 1.0));
  PipelineConfig config;
  const SimMatrix got = build_attribute(pair, src_names, tgt_names, config);

  // Independent route: iterate the raw triples, deduplicated per entity,
  // summing nameSim * valueSim over every item pair.
  const DenseMatrix sn = row_l2_normalize(src_names.matrix);
  const DenseMatrix tn = row_l2_normalize(tgt_names.matrix);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      std::set<std::pair<std::size_t, std::string>> src_items, tgt_items;
      for (const auto& t : pair.source.attr_triples) {
        if (t.entity == i) src_items.insert({t.name, t.value});
      }
      for (const auto& t : pair.target.attr_triples) {
        if (t.entity == j) tgt_items.insert({t.name, t.value});
      }
      double sum = 0.0;
      for (const auto& [an, av] : src_items) {
        for (const auto& [bn, bv] : tgt_items) {
          double name_sim = 0.0;
          for (std::size_t k = 0; k < 4; ++k) {
            name_sim += sn(an, k) * tn(bn, k);
          }
          sum += name_sim * value_similarity(av, bv, config.epsilon_v);
        }
      }
      CHECK(std::abs(got(i, j) - sum) <=
            1e-9 * std::max(1.0, std::abs(sum)));
    }
  }
}

TEST_CASE("temporal: identical single-quad graphs peak on the diagonal") {
  KgPair pair;
  pair.n_timestamps = 2;
  pair.source = make_graph(2, {});
  pair.target = make_graph(2, {});
  pair.source.quads = {{0, 0, 1, 0}};
  pair.target.quads = {{0, 0, 1, 0}};
  PipelineConfig config;
  config.hops_l = 1;
  const SimMatrix m = build_temporal(pair, config);
  const double row0_max = std::max(m(0, 0), m(0, 1));
  const double row1_max = std::max(m(1, 0), m(1, 1));
  CHECK(m(0, 0) == row0_max);
  CHECK(m(1, 1) == row1_max);
}

TEST_CASE("temporal: disjoint timestamp usage gives all zeros") {
  KgPair pair;
  pair.n_timestamps = 2;
  pair.source = make_graph(2, {});
  pair.target = make_graph(2, {});
  pair.source.quads = {{0, 0, 1, 0}};
  pair.target.quads = {{0, 0, 1, 1}};
  const SimMatrix m = build_temporal(pair, PipelineConfig{});
  for (double v : m.data()) CHECK(v == 0.0);
}

TEST_CASE("temporal: consistent timestamp relabeling is a no-op") {
  KgPair pair;
  pair.n_timestamps = 3;
  pair.source = make_graph(3, {});
  pair.target = make_graph(3, {});
  pair.source.quads = {{0, 0, 1, 0}, {1, 0, 2, 1}, {0, 0, 2, 2}};
  pair.target.quads = {{0, 0, 1, 0}, {1, 0, 2, 2}, {0, 0, 2, 1}};
  const SimMatrix base = build_temporal(pair, PipelineConfig{});

  const std::vector<std::size_t> pi = {2, 0, 1};
  KgPair moved = pair;
  for (auto* kg : {&moved.source, &moved.target}) {
    for (auto& q : kg->quads) q.time = pi[*q.time];
  }
  const SimMatrix relabeled = build_temporal(moved, PipelineConfig{});
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(std::abs(relabeled.data()[k] - base.data()[k]) <= 1e-12);
  }
}

TEST_CASE("temporal: no timestamped quadruples is an error") {
  KgPair pair;
  pair.n_timestamps = 2;
  pair.source = make_graph(2, {{0, 1}});
  pair.target = make_graph(2, {{0, 1}});
  CHECK_THROWS_WITH_AS(build_temporal(pair, PipelineConfig{}),
                       doctest::Contains("no timestamped"), DataError);
}

TEST_CASE("build_all respects availability and toggles") {
  TempDir dir("simpath_all");
  SynthSpec spec;
  spec.n_entities = 12;
  spec.n_relations = 2;
  spec.n_timestamps = 3;
  spec.seed_ratio = 0.5;
  spec.global_seed = 5;
  generate(spec, dir.path());
  PipelineConfig config;
  const DatasetBundle bundle = load_dataset(dir.path(), config);
  const AlignmentSet anchors = bundle.pair.train_seeds;

  SUBCASE("all four modalities present") {
    const ModalityMatrices all = build_all(bundle, anchors, config);
    CHECK(all.size() == 4);
    for (const auto& [kind, m] : all) {
      CHECK(m.rows() == 12);
      CHECK(m.cols() == 12);
      CHECK(m.all_finite());
    }
  }
  SUBCASE("unavailable temporal is skipped with a warning") {
    TempDir timeless("simpath_timeless");
    SynthSpec no_time = spec;
    no_time.n_timestamps = 0;
    generate(no_time, timeless.path());
    const DatasetBundle reduced = load_dataset(timeless.path(), config);
    std::ostringstream err;
    const ModalityMatrices got =
        build_all(reduced, reduced.pair.train_seeds, config, Diag(&err));
    CHECK(got.size() == 3);
    CHECK(got.count(ModalityKind::Temporal) == 0);
    CHECK(err.str().find("modality_skipped") != std::string::npos);
  }
  SUBCASE("disabled visual is omitted even though files exist") {
    config.enabled.erase(ModalityKind::Visual);
    const ModalityMatrices got = build_all(bundle, anchors, config);
    CHECK(got.size() == 3);
    CHECK(got.count(ModalityKind::Visual) == 0);
  }
  SUBCASE("zero modalities is an error") {
    config.enabled.clear();
    CHECK_THROWS_AS(build_all(bundle, anchors, config), DataError);
  }
}
