#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "sxi/data.hpp"
#include "sxi/metrics.hpp"

using namespace sxi;

namespace {

std::string write_temp_csv(const std::string& content) {
  static int counter = 0;
  std::string path = "test_data_tmp_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_csv basic structure and missing mask") {
  auto path = write_temp_csv(
      "a,b,c,SepsisLabel\n"
      "1,2,3,0\n"
      "4,,6,1\n"
      "7,8,9,0\n");
  DataTable t = load_csv(path);
  CHECK(t.n_rows() == 3);
  CHECK(t.n_cols() == 4);
  std::size_t masked = 0;
  for (const auto& c : t.columns) masked += c.n_missing();
  CHECK(masked == 1);
  CHECK(t.columns[1].missing[1] == 1);
  CHECK(t.columns[t.target_index()].name == "SepsisLabel");
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects a non-binary target") {
  auto path = write_temp_csv("a,SepsisLabel\n1,0\n2,2\n");
  CHECK_THROWS_WITH(load_csv(path), Catch::Matchers::ContainsSubstring(
                                        "non-binary target"));
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects ragged rows and duplicate headers") {
  auto ragged = write_temp_csv("a,b,SepsisLabel\n1,2,0\n1,2\n");
  CHECK_THROWS_AS(load_csv(ragged), DataError);
  std::remove(ragged.c_str());
  auto dup = write_temp_csv("a,a,SepsisLabel\n1,2,0\n");
  CHECK_THROWS_AS(load_csv(dup), DataError);
  std::remove(dup.c_str());
}

TEST_CASE("load_csv missing tokens NA/NaN/empty, case-insensitive") {
  auto path = write_temp_csv(
      "a,b,SepsisLabel\nNA,nan,0\nNaN,,1\n3,4,0\n");
  DataTable t = load_csv(path);
  CHECK(t.columns[0].n_missing() == 2);
  CHECK(t.columns[1].n_missing() == 2);
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects other non-numeric cells") {
  auto path = write_temp_csv("a,SepsisLabel\nfoo,0\n");
  CHECK_THROWS_AS(load_csv(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("drop_sparse_columns at the threshold boundary") {
  DataTable t;
  auto add = [&](const std::string& name, ColumnKind kind, int miss_pct) {
    Column c;
    c.name = name;
    c.kind = kind;
    for (int i = 0; i < 100; ++i) {
      c.values.push_back(kind == ColumnKind::target ? (i % 2) : i);
      c.missing.push_back(i < miss_pct ? 1 : 0);
    }
    t.columns.push_back(c);
  };
  add("dropme", ColumnKind::continuous, 41);
  add("keepme", ColumnKind::continuous, 39);
  add("SepsisLabel", ColumnKind::target, 0);

  auto [clean, dropped] = drop_sparse_columns(t, 0.40);
  CHECK(dropped == std::vector<std::string>{"dropme"});
  CHECK(clean.column_index("keepme") == 0);
}

TEST_CASE("drop_sparse_columns never drops target or identifiers") {
  DataTable t;
  Column id;
  id.name = "Patient_ID";
  id.kind = ColumnKind::identifier;
  Column f;
  f.name = "f";
  f.kind = ColumnKind::continuous;
  Column y;
  y.name = "SepsisLabel";
  y.kind = ColumnKind::target;
  for (int i = 0; i < 10; ++i) {
    id.values.push_back(i);
    id.missing.push_back(1);  // fully missing, still kept
    f.values.push_back(i);
    f.missing.push_back(0);
    y.values.push_back(i % 2);
    y.missing.push_back(0);
  }
  t.columns = {id, f, y};
  auto [clean, dropped] = drop_sparse_columns(t, 0.40);
  CHECK(dropped.empty());
  CHECK(clean.n_cols() == 3);
}

TEST_CASE("drop_sparse_columns with no missing cells is the identity") {
  DataTable t = synth_generate(50, 4, 0.5, 1.0, 3);
  auto [clean, dropped] = drop_sparse_columns(t, 0.40);
  CHECK(dropped.empty());
  CHECK(clean.n_cols() == t.n_cols());
}

TEST_CASE("drop_sparse_columns errors when nothing survives") {
  DataTable t;
  Column f;
  f.name = "f";
  f.kind = ColumnKind::continuous;
  Column y;
  y.name = "SepsisLabel";
  y.kind = ColumnKind::target;
  for (int i = 0; i < 10; ++i) {
    f.values.push_back(i);
    f.missing.push_back(1);
    y.values.push_back(i % 2);
    y.missing.push_back(0);
  }
  t.columns = {f, y};
  CHECK_THROWS_WITH(drop_sparse_columns(t, 0.40),
                    Catch::Matchers::ContainsSubstring("no features survive"));
}

TEST_CASE("impute fills mean for continuous and mode for categorical") {
  DataTable t;
  Column cont;
  cont.name = "c";
  cont.kind = ColumnKind::continuous;
  cont.values = {1, 0, 3};
  cont.missing = {0, 1, 0};
  Column cat;
  cat.name = "g";
  cat.kind = ColumnKind::categorical;
  cat.values = {5, 5, 0};
  cat.missing = {0, 0, 1};
  Column y;
  y.name = "SepsisLabel";
  y.kind = ColumnKind::target;
  y.values = {0, 1, 0};
  y.missing = {0, 0, 0};
  t.columns = {cont, cat, y};

  auto [imputed, stats] = impute(t);
  CHECK(imputed.columns[0].values[1] == 2.0);  // mean of {1,3}
  CHECK(imputed.columns[1].values[2] == 5.0);  // mode
  CHECK(*stats.fill_for("c") == 2.0);
  CHECK(*stats.fill_for("g") == 5.0);
  for (int j : imputed.feature_indices())
    CHECK(imputed.columns[j].n_missing() == 0);
}

TEST_CASE("impute on a complete table is the identity") {
  DataTable t = synth_generate(30, 3, 0.5, 1.0, 9);
  auto [imputed, stats] = impute(t);
  for (std::size_t j = 0; j < t.n_cols(); ++j)
    CHECK(imputed.columns[j].values == t.columns[j].values);
}

TEST_CASE("split produces exact stratified 70/20/10 proportions") {
  DataTable t = synth_generate(100, 3, 0.2, 1.0, 5);
  SplitSpec spec;
  spec.seed = 11;
  SplitResult r = split(t, spec);
  CHECK(r.train.n_rows() == 70);
  CHECK(r.test.n_rows() == 20);
  CHECK(r.validation.n_rows() == 10);
  auto positives = [](const DataTable& d) {
    auto y = d.labels();
    return std::count(y.begin(), y.end(), 1);
  };
  CHECK(positives(r.train) == 14);
  CHECK(positives(r.test) == 4);
  CHECK(positives(r.validation) == 2);
}

TEST_CASE("split is deterministic per seed and changes with the seed") {
  DataTable t = synth_generate(120, 3, 0.3, 1.0, 5);
  SplitSpec spec;
  spec.seed = 42;
  SplitResult a = split(t, spec);
  SplitResult b = split(t, spec);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  spec.seed = 43;
  SplitResult c = split(t, spec);
  CHECK(a.train_rows != c.train_rows);
  // Same class balance either way.
  auto y = t.labels();
  auto positives = [&](const std::vector<std::size_t>& rows) {
    std::size_t p = 0;
    for (auto r : rows) p += y[r];
    return p;
  };
  CHECK(positives(a.train_rows) == positives(c.train_rows));
}

TEST_CASE("split partition property over random tables") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> nn(10, 200);
    std::size_t n = nn(rng);
    DataTable t = synth_generate(n, 2, 0.4, 0.5, trial);
    SplitSpec spec;
    spec.seed = trial;
    SplitResult r = split(t, spec);
    std::set<std::size_t> all;
    for (auto v : r.train_rows) all.insert(v);
    for (auto v : r.test_rows) all.insert(v);
    for (auto v : r.validation_rows) all.insert(v);
    REQUIRE(all.size() ==
            r.train_rows.size() + r.test_rows.size() +
                r.validation_rows.size());
    REQUIRE(all.size() == n);
  }
}

TEST_CASE("split errors when a class cannot be stratified") {
  DataTable t = synth_generate(100, 2, 0.5, 0.0, 1);
  // Force a 2-row minority class.
  int ti = t.target_index();
  for (std::size_t i = 0; i < t.n_rows(); ++i)
    t.columns[ti].values[i] = i < 2 ? 1.0 : 0.0;
  SplitSpec spec;
  CHECK_THROWS_WITH(split(t, spec),
                    Catch::Matchers::ContainsSubstring("cannot stratify"));
}

TEST_CASE("stratified_kfold balanced 10 rows k=5") {
  std::vector<int> y = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  auto folds = stratified_kfold(y, 5, 3);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& [train, holdout] : folds) {
    CHECK(holdout.size() == 2);
    int pos = 0;
    for (auto r : holdout) {
      pos += y[r];
      CHECK(seen.insert(r).second);  // no duplicates across folds
    }
    CHECK(pos == 1);
    CHECK(train.size() == 8);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("stratified_kfold k=2 on 4 rows") {
  std::vector<int> y = {1, 0, 1, 0};
  auto folds = stratified_kfold(y, 2, 0);
  for (const auto& [train, holdout] : folds) {
    CHECK(holdout.size() == 2);
    CHECK(y[holdout[0]] + y[holdout[1]] == 1);
  }
}

TEST_CASE("stratified_kfold rejects k above the minority count") {
  std::vector<int> y = {1, 1, 0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(stratified_kfold(y, 3, 0), DataError);
}

TEST_CASE("synth_generate exact positive count and determinism") {
  DataTable t = synth_generate(2000, 10, 0.02, 1.0, 7);
  auto y = t.labels();
  CHECK(std::count(y.begin(), y.end(), 1) == 40);
  DataTable t2 = synth_generate(2000, 10, 0.02, 1.0, 7);
  for (std::size_t j = 0; j < t.n_cols(); ++j)
    CHECK(t.columns[j].values == t2.columns[j].values);
}

TEST_CASE("synth_generate separation=0 gives chance-level AUC") {
  // Score rows by the sum of the first half of features; over 20 seeds the
  // AUC must hover around 0.5.
  double total = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    DataTable t = synth_generate(500, 6, 0.4, 0.0, seed);
    std::vector<double> score(t.n_rows(), 0.0);
    for (int j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < t.n_rows(); ++i)
        score[i] += t.columns[j].values[i];
    total += roc_auc(score, t.labels()).auc;
  }
  double mean_auc = total / 20.0;
  CHECK(mean_auc > 0.4);
  CHECK(mean_auc < 0.6);
}

TEST_CASE("synth_generate large separation is nearly separable") {
  DataTable t = synth_generate(500, 4, 0.3, 4.0, 2);
  std::vector<double> score(t.n_rows(), 0.0);
  for (int j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < t.n_rows(); ++i)
      score[i] += t.columns[j].values[i];
  CHECK(roc_auc(score, t.labels()).auc >= 0.99);
}

TEST_CASE("csv round trip preserves values and masks") {
  DataTable t = synth_generate(40, 3, 0.5, 1.0, 13);
  t.columns[0].missing[5] = 1;
  auto path = write_temp_csv("");
  save_csv(t, path);
  DataTable r = load_csv(path);
  REQUIRE(r.n_rows() == t.n_rows());
  for (std::size_t j = 0; j < t.n_cols(); ++j)
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
      REQUIRE(r.columns[j].missing[i] == t.columns[j].missing[i]);
      if (!t.columns[j].missing[i])
        REQUIRE(r.columns[j].values[i] == t.columns[j].values[i]);
    }
  std::remove(path.c_str());
}

TEST_CASE("grouped split keeps identifier groups together") {
  DataTable t = synth_generate(200, 3, 0.3, 1.0, 21);
  Column id;
  id.name = "Patient_ID";
  id.kind = ColumnKind::identifier;
  for (std::size_t i = 0; i < t.n_rows(); ++i) {
    id.values.push_back(static_cast<double>(i / 5));  // 5 rows per patient
    id.missing.push_back(0);
  }
  t.columns.insert(t.columns.begin(), id);
  SplitSpec spec;
  spec.seed = 4;
  SplitResult r = split_grouped(t, spec, "Patient_ID");
  auto patients = [](const DataTable& d) {
    std::set<double> s;
    int j = d.column_index("Patient_ID");
    for (double v : d.columns[j].values) s.insert(v);
    return s;
  };
  auto a = patients(r.train), b = patients(r.test), c = patients(r.validation);
  for (double v : b) CHECK(a.count(v) == 0);
  for (double v : c) {
    CHECK(a.count(v) == 0);
    CHECK(b.count(v) == 0);
  }
  CHECK(r.train.n_rows() + r.test.n_rows() + r.validation.n_rows() == 200);
}
