#include "mmalign/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "mmalign/errors.hpp"
#include "mmalign/kgio.hpp"
#include "mmalign/rng.hpp"

namespace mmalign {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kNumAttrNames = 16;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  return out;
}

void write_id_map(const fs::path& path, std::size_t count,
                  const char* prefix) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < count; ++i) {
    out << i << '\t' << prefix << i << '\n';
  }
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Unit vector with iid gaussian components.
std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (double& x : v) {
    x = rng.gaussian();
    sq += x * x;
  }
  if (sq == 0.0) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

DenseMatrix random_unit_rows(Rng& rng, std::size_t rows, std::size_t dim) {
  DenseMatrix m(rows, dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto v = random_unit(rng, dim);
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

DenseMatrix noisy_copy(Rng& rng, const DenseMatrix& src, double sigma) {
  if (sigma == 0.0) return src;
  DenseMatrix out = src;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double sq = 0.0;
    for (double& x : row) {
      x += sigma * rng.gaussian();
      sq += x * x;
    }
    if (sq == 0.0) {
      row[0] = 1.0;
      continue;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : row) x *= inv;
  }
  return out;
}

void write_identity_owner(const fs::path& path, std::size_t rows) {
  auto out = open_out(path);
  for (std::size_t r = 0; r < rows; ++r) {
    out << r << '\t' << r << '\n';
  }
}

}  // namespace

void SynthSpec::validate() const {
  if (n_entities < 1) throw DataError("n_entities must be >= 1");
  if (n_relations < 1) throw DataError("n_relations must be >= 1");
  if (feat_dim < 1) throw DataError("feat_dim must be >= 1");
  if (triple_density < 0.0) throw DataError("triple_density must be >= 0");
  if (perturbation < 0.0 || perturbation > 1.0) {
    throw DataError("perturbation must be in [0, 1]");
  }
  if (seed_ratio < 0.0 || seed_ratio > 1.0) {
    throw DataError("seed_ratio must be in [0, 1]");
  }
  if (feat_noise_sigma < 0.0) throw DataError("feat_noise_sigma must be >= 0");
  if (value_noise_sigma < 0.0) {
    throw DataError("value_noise_sigma must be >= 0");
  }
}

AlignmentSet generate(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create directory: " + out_dir.string());
  }
  Rng rng(spec.global_seed);
  const std::size_t n = spec.n_entities;
  const bool timestamped = spec.n_timestamps > 0;

  // Source triples: a random spanning tree keeps the graph connected,
  // then extra random triples up to the requested density.
  std::vector<Quad> src_quads;
  const auto random_time = [&]() -> std::optional<std::size_t> {
    if (!timestamped) return std::nullopt;
    return rng.uniform_index(spec.n_timestamps);
  };
  for (std::size_t i = 1; i < n; ++i) {
    Quad q;
    q.head = i;
    q.rel = rng.uniform_index(spec.n_relations);
    q.tail = rng.uniform_index(i);
    q.time = random_time();
    src_quads.push_back(q);
  }
  const auto total =
      static_cast<std::size_t>(std::llround(spec.triple_density * n));
  while (src_quads.size() < total) {
    Quad q;
    q.head = rng.uniform_index(n);
    q.rel = rng.uniform_index(spec.n_relations);
    q.tail = rng.uniform_index(n);
    q.time = random_time();
    src_quads.push_back(q);
  }

  // Source attributes: numeric values, attr_per_entity per entity.
  std::vector<AttrTriple> src_attrs;
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t k = 0; k < spec.attr_per_entity; ++k) {
      AttrTriple t;
      t.entity = e;
      t.name = rng.uniform_index(kNumAttrNames);
      t.value = format_value(rng.uniform(0.0, 1000.0));
      src_attrs.push_back(std::move(t));
    }
  }

  const DenseMatrix src_img = random_unit_rows(rng, n, spec.feat_dim);
  const DenseMatrix src_names =
      random_unit_rows(rng, kNumAttrNames, spec.feat_dim);

  // Gold permutation: source entity i corresponds to target perm[i].
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }

  // Target triples: copy through the permutation, dropping or rewiring a
  // `perturbation` fraction (rewiring replaces the tail).
  std::vector<Quad> tgt_quads;
  for (const Quad& q : src_quads) {
    std::size_t tail = q.tail;
    if (spec.perturbation > 0.0 && rng.uniform() < spec.perturbation) {
      if (rng.uniform() < 0.5) continue;  // dropped
      tail = rng.uniform_index(n);
    }
    tgt_quads.push_back({perm[q.head], q.rel, perm[tail], q.time});
  }

  std::vector<AttrTriple> tgt_attrs;
  for (const AttrTriple& t : src_attrs) {
    AttrTriple copy;
    copy.entity = perm[t.entity];
    copy.name = t.name;
    if (spec.value_noise_sigma > 0.0) {
      copy.value = format_value(std::stod(t.value) +
                                spec.value_noise_sigma * rng.gaussian());
    } else {
      copy.value = t.value;
    }
    tgt_attrs.push_back(std::move(copy));
  }

  // Target features: image row j belongs to target entity j and copies
  // the corresponding source entity's vector plus noise.
  std::vector<std::size_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
  DenseMatrix tgt_img(n, spec.feat_dim);
  for (std::size_t j = 0; j < n; ++j) {
    std::copy(src_img.row(inv[j]).begin(), src_img.row(inv[j]).end(),
              tgt_img.row(j).begin());
  }
  tgt_img = noisy_copy(rng, tgt_img, spec.feat_noise_sigma);
  const DenseMatrix tgt_names =
      noisy_copy(rng, src_names, spec.feat_noise_sigma);

  // Train/test split of the gold pairs.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(spec.seed_ratio * static_cast<double>(n)));
  AlignmentSet train, test, gold;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    (k < n_train ? train : test).pairs.emplace_back(i, perm[i]);
  }
  train.sort_by_src();
  test.sort_by_src();
  for (std::size_t i = 0; i < n; ++i) gold.pairs.emplace_back(i, perm[i]);

  // On-disk layout.
  write_id_map(out_dir / "ent_ids_1", n, "s");
  write_id_map(out_dir / "ent_ids_2", n, "t");
  write_id_map(out_dir / "rel_ids_1", spec.n_relations, "r");
  write_id_map(out_dir / "rel_ids_2", spec.n_relations, "r");
  if (timestamped) {
    write_id_map(out_dir / "time_ids", spec.n_timestamps, "ts");
  }
  const auto write_quads = [](const fs::path& path,
                              const std::vector<Quad>& quads) {
    auto out = open_out(path);
    for (const Quad& q : quads) {
      out << q.head << '\t' << q.rel << '\t' << q.tail;
      if (q.time.has_value()) out << '\t' << *q.time;
      out << '\n';
    }
  };
  write_quads(out_dir / "triples_1", src_quads);
  write_quads(out_dir / "triples_2", tgt_quads);

  if (spec.attr_per_entity > 0) {
    const auto write_attrs = [](const fs::path& path,
                                const std::vector<AttrTriple>& attrs) {
      auto out = open_out(path);
      for (const AttrTriple& t : attrs) {
        out << t.entity << '\t' << t.name << '\t' << t.value << '\n';
      }
    };
    write_attrs(out_dir / "attr_triples_1", src_attrs);
    write_attrs(out_dir / "attr_triples_2", tgt_attrs);
    write_id_map(out_dir / "attr_name_ids_1", kNumAttrNames, "a");
    write_id_map(out_dir / "attr_name_ids_2", kNumAttrNames, "a");
    write_fmat(out_dir / "attrname_feat_1.fmat", src_names);
    write_fmat(out_dir / "attrname_feat_2.fmat", tgt_names);
  }

  write_fmat(out_dir / "img_feat_1.fmat", src_img);
  write_fmat(out_dir / "img_feat_2.fmat", tgt_img);
  write_identity_owner(out_dir / "img_rows_1", n);
  write_identity_owner(out_dir / "img_rows_2", n);

  write_pairs(train, out_dir / "seeds_train");
  write_pairs(test, out_dir / "seeds_test");
  write_pairs(gold, out_dir / "gold_all");

  return gold;
}

}  // namespace mmalign
