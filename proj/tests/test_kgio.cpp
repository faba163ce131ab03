#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>

#include "mmalign/errors.hpp"
#include "mmalign/kgio.hpp"
#include "test_util.hpp"

using namespace mmalign;
using test::TempDir;

namespace {

void put(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

// Minimal two-entity dataset; callers overwrite individual files.
void write_tiny_dataset(const std::filesystem::path& dir) {
  put(dir / "ent_ids_1", "0\ta\n1\tb\n");
  put(dir / "ent_ids_2", "0\tx\n1\ty\n");
  put(dir / "rel_ids_1", "0\tr\n");
  put(dir / "rel_ids_2", "0\tr\n");
  put(dir / "triples_1", "0\t0\t1\n");
  put(dir / "triples_2", "0\t0\t1\n");
  put(dir / "seeds_train", "0\t1\n");
  put(dir / "seeds_test", "1\t0\n");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("load_kg_pair parses a tiny dataset") {
  TempDir dir("kgio_tiny");
  write_tiny_dataset(dir.path());
  const KgPair pair = load_kg_pair(dir.path(), PipelineConfig{});
  CHECK(pair.source.n_entities == 2);
  CHECK(pair.target.n_entities == 2);
  CHECK(pair.source.n_relations == 1);
  CHECK(pair.source.quads.size() == 1);
  REQUIRE(pair.train_seeds.size() == 1);
  CHECK(pair.train_seeds.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(pair.source.entity_labels[1] == "b");
  CHECK(pair.n_timestamps == 0);
}

TEST_CASE("duplicate seed source is an error") {
  TempDir dir("kgio_dupseed");
  write_tiny_dataset(dir.path());
  put(dir.path() / "seeds_train", "0\t1\n0\t0\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("duplicate seed entity"), DataError);
}

TEST_CASE("out-of-range triple names file and line") {
  TempDir dir("kgio_oor");
  write_tiny_dataset(dir.path());
  put(dir.path() / "ent_ids_1", "0\ta\n1\tb\n2\tc\n");
  put(dir.path() / "triples_1", "0\t0\t1\n5\t0\t1\n");
  try {
    load_kg_pair(dir.path(), PipelineConfig{});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("triples_1:2") != std::string::npos);
    CHECK(msg.find("out of range") != std::string::npos);
  }
}

TEST_CASE("missing mandatory file is an error") {
  TempDir dir("kgio_missing");
  write_tiny_dataset(dir.path());
  std::filesystem::remove(dir.path() / "triples_2");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("triples_2"), DataError);
}

TEST_CASE("timestamp index must stay below the declared vocabulary") {
  TempDir dir("kgio_time");
  write_tiny_dataset(dir.path());
  put(dir.path() / "time_ids", "0\tt0\n1\tt1\n");
  put(dir.path() / "triples_1", "0\t0\t1\t1\n");
  put(dir.path() / "triples_2", "0\t0\t1\t2\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("timestamp index"), DataError);
}

TEST_CASE("attr name index beyond the declared vocabulary is an error") {
  TempDir dir("kgio_attrvocab");
  write_tiny_dataset(dir.path());
  put(dir.path() / "attr_name_ids_1", "0\theight\n");
  put(dir.path() / "attr_triples_1", "0\t4\t1.82\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("attr name index"), DataError);
}

TEST_CASE("negative indices are malformed") {
  TempDir dir("kgio_negative");
  write_tiny_dataset(dir.path());
  put(dir.path() / "triples_1", "-1\t0\t1\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("malformed"), DataError);
}

TEST_CASE("train/test overlap is an error") {
  TempDir dir("kgio_overlap");
  write_tiny_dataset(dir.path());
  put(dir.path() / "seeds_test", "0\t0\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("overlap"), DataError);
}

TEST_CASE("loading is insensitive to line order") {
  TempDir a("kgio_order_a"), b("kgio_order_b");
  write_tiny_dataset(a.path());
  write_tiny_dataset(b.path());
  put(a.path() / "triples_1", "0\t0\t1\n1\t0\t0\n0\t0\t0\n");
  put(b.path() / "triples_1", "0\t0\t0\n0\t0\t1\n1\t0\t0\n");
  put(a.path() / "seeds_test", "1\t0\n");
  put(b.path() / "seeds_test", "1\t0\n");
  const KgPair pa = load_kg_pair(a.path(), PipelineConfig{});
  const KgPair pb = load_kg_pair(b.path(), PipelineConfig{});
  CHECK(pa.source.quads == pb.source.quads);
  CHECK(pa.train_seeds.pairs == pb.train_seeds.pairs);
}

TEST_CASE("image cap keeps the first max_images rows in file order") {
  TempDir dir("kgio_imgcap");
  write_tiny_dataset(dir.path());
  DenseMatrix feats(4, 2);
  for (std::size_t k = 0; k < feats.size(); ++k) {
    feats.data()[k] = static_cast<double>(k);
  }
  write_fmat(dir.path() / "img_feat_1.fmat", feats);
  write_fmat(dir.path() / "img_feat_2.fmat", feats);
  // Entity 0 owns rows 3, 1, 2 in that file order; cap at 2 keeps {3, 1}.
  put(dir.path() / "img_rows_1", "3\t0\n1\t0\n2\t0\n0\t1\n");
  put(dir.path() / "img_rows_2", "0\t0\n1\t0\n2\t1\n3\t1\n");
  PipelineConfig config;
  config.max_images = 2;
  const KgPair pair = load_kg_pair(dir.path(), config);
  const std::vector<ImageLink> want = {{0, 1}, {0, 3}, {1, 0}};
  CHECK(pair.source.entity_images == want);
}

TEST_CASE("duplicate image row is an error") {
  TempDir dir("kgio_imgdup");
  write_tiny_dataset(dir.path());
  write_fmat(dir.path() / "img_feat_1.fmat", DenseMatrix(2, 2, 1.0));
  write_fmat(dir.path() / "img_feat_2.fmat", DenseMatrix(2, 2, 1.0));
  put(dir.path() / "img_rows_1", "0\t0\n0\t1\n");
  put(dir.path() / "img_rows_2", "0\t0\n1\t1\n");
  CHECK_THROWS_WITH_AS(load_kg_pair(dir.path(), PipelineConfig{}),
                       doctest::Contains("more than once"), DataError);
}

TEST_CASE("fmat round-trip is bit-exact") {
  TempDir dir("kgio_fmat");
  DenseMatrix m(2, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(0, 2) = 0.0;
  m(1, 2) = -0.25;  // exactly representable in binary32
  const auto path = dir.path() / "t.fmat";
  write_fmat(path, m);
  const DenseMatrix back = read_fmat(path);
  CHECK(back == m);
  CHECK(back(0, 2) == 0.0);
}

TEST_CASE("feature table with owner file") {
  TempDir dir("kgio_table");
  DenseMatrix m = DenseMatrix::from_rows({{1, 0, 0}, {0, 1, 0}});
  const auto path = dir.path() / "t.fmat";
  write_fmat(path, m);
  put(dir.path() / "owners", "0\t0\n1\t1\n");
  const FeatureTable table = load_feature_table(path, dir.path() / "owners");
  CHECK(table.matrix(0, 2) == 0.0);
  CHECK(table.owner == std::vector<std::size_t>{0, 1});

  SUBCASE("owner count mismatch") {
    put(dir.path() / "owners", "0\t0\n");
    CHECK_THROWS_WITH_AS(load_feature_table(path, dir.path() / "owners"),
                         doctest::Contains("mismatch"), DataError);
  }
  SUBCASE("identity owner without a file") {
    const FeatureTable t2 = load_feature_table(path);
    CHECK(t2.owner == std::vector<std::size_t>{0, 1});
  }
}

TEST_CASE("fmat format errors") {
  TempDir dir("kgio_fmat_err");
  const auto path = dir.path() / "bad.fmat";

  SUBCASE("magic mismatch") {
    put(path, "NOPE");
    CHECK_THROWS_WITH_AS(read_fmat(path), doctest::Contains("magic"),
                         DataError);
  }
  SUBCASE("truncated payload") {
    DenseMatrix m(2, 3, 1.0);
    write_fmat(path, m);
    const std::string full = slurp(path);
    put(path, full.substr(0, full.size() - 5));
    CHECK_THROWS_WITH_AS(read_fmat(path), doctest::Contains("truncated"),
                         DataError);
  }
  SUBCASE("non-finite value") {
    DenseMatrix m(1, 2, 1.0);
    write_fmat(path, m);
    std::string full = slurp(path);
    // Overwrite the first payload float with a quiet NaN (little-endian).
    full[24] = '\x00';
    full[25] = '\x00';
    full[26] = '\xc0';
    full[27] = '\x7f';
    put(path, full);
    CHECK_THROWS_WITH_AS(read_fmat(path), doctest::Contains("non-finite"),
                         DataError);
  }
}

TEST_CASE("predictions round-trip") {
  TempDir dir("kgio_pred");
  const auto path = dir.path() / "predictions.tsv";

  SUBCASE("single scored pair") {
    AlignmentSet set;
    set.pairs = {{0, 1}};
    set.scores = {0.9};
    write_predictions(set, path);
    CHECK(slurp(path) == "0\t1\t0.900000\n");
    const AlignmentSet back = read_pairs(path, false);
    CHECK(back.pairs == set.pairs);
    CHECK(back.scores == set.scores);
  }
  SUBCASE("empty set gives an empty file") {
    write_predictions(AlignmentSet{}, path);
    CHECK(slurp(path).empty());
  }
  SUBCASE("sorted by source index") {
    AlignmentSet set;
    set.pairs = {{2, 0}, {0, 2}, {1, 1}};
    set.scores = {0.25, 0.5, 0.75};
    write_predictions(set, path);
    const AlignmentSet back = read_pairs(path, false);
    const std::vector<std::pair<std::size_t, std::size_t>> want = {
        {0, 2}, {1, 1}, {2, 0}};
    CHECK(back.pairs == want);
    CHECK(back.scores == std::vector<double>{0.5, 0.75, 0.25});
  }
}

TEST_CASE("load_dataset reports availability") {
  TempDir dir("kgio_bundle");
  write_tiny_dataset(dir.path());
  PipelineConfig config;
  const DatasetBundle bundle = load_dataset(dir.path(), config);
  CHECK(bundle.available.count(ModalityKind::Relational) == 1);
  CHECK(bundle.available.count(ModalityKind::Visual) == 0);
  CHECK(bundle.available.count(ModalityKind::Temporal) == 0);
  CHECK(bundle.unavailable_reason(ModalityKind::Temporal) ==
        "missing file(s): time_ids");
  CHECK(bundle.unavailable_reason(ModalityKind::Visual).find("img_rows_1") !=
        std::string::npos);
}
