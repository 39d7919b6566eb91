// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include <gtest/gtest.h>

#include "glint/numerics/adam.hpp"
#include "glint/numerics/checkpoint.hpp"
#include "glint/numerics/errors.hpp"
#include "glint/numerics/init.hpp"
#include "glint/numerics/ops.hpp"
#include "gradcheck.hpp"

namespace glint::num {
namespace {

using testing::gradcheck;
using testing::random_tensor;

constexpr double kGradTol = 1e-4;

TEST(TensorTest, ShapeAndDataMustAgree) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  EXPECT_THROW(t.reshaped({4, 2}), ShapeError);
}

TEST(MatmulTest, IdentityLeavesMatrixUnchanged) {
  const Var out = matmul(Var::constant(Tensor::identity(2)),
                         Var::constant(Tensor::matrix({{1, 2}, {3, 4}})));
  EXPECT_EQ(out.value(), Tensor::matrix({{1, 2}, {3, 4}}));
}

TEST(MatmulTest, RowTimesColumn) {
  const Var out =
      matmul(Var::constant(Tensor::matrix({{1, 2}})), Var::constant(Tensor::matrix({{3}, {4}})));
  EXPECT_EQ(out.value(), Tensor::matrix({{11}}));
}

TEST(MatmulTest, InnerDimensionMismatchThrows) {
  EXPECT_THROW(matmul(Var::constant(Tensor({2, 3})), Var::constant(Tensor({2, 3}))), ShapeError);
}

TEST(MatmulTest, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  const auto report = gradcheck([](const auto& v) { return matmul(v[0], v[1]); },
                                {random_tensor({4, 3}, rng), random_tensor({3, 5}, rng)});
  EXPECT_LE(report.max_rel_error, 1e-6) << report.worst;
}

TEST(MatmulTest, TransposedVariantsMatchFiniteDifferences) {
  Rng rng(12);
  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      const Shape sa = ta ? Shape{3, 4} : Shape{4, 3};
      const Shape sb = tb ? Shape{5, 3} : Shape{3, 5};
      const auto report = gradcheck([&](const auto& v) { return matmul(v[0], v[1], ta, tb); },
                                    {random_tensor(sa, rng), random_tensor(sb, rng)});
      EXPECT_LE(report.max_rel_error, kGradTol) << ta << tb << " " << report.worst;
      const auto batched = gradcheck([&](const auto& v) { return bmm(v[0], v[1], ta, tb); },
                                     {random_tensor({2, sa[0], sa[1]}, rng),
                                      random_tensor({2, sb[0], sb[1]}, rng)});
      EXPECT_LE(batched.max_rel_error, kGradTol) << ta << tb << " " << batched.worst;
    }
  }
}

TEST(ActivationTest, AnalyticValues) {
  EXPECT_EQ(activate(Activation::kSilu, 0.0), 0.0);
  EXPECT_EQ(activate(Activation::kSigmoid, 0.0), 0.5);
  EXPECT_NEAR(activate(Activation::kElu, -50.0), -1.0, 1e-15);
  EXPECT_EQ(activate(Activation::kElu, 1.0), 1.0);
  EXPECT_EQ(activate(Activation::kRelu, -2.0), 0.0);
  // Exact GeLU: x·Φ(x); Φ(1) = 0.841344746068543.
  EXPECT_NEAR(activate(Activation::kGelu, 1.0), 0.841344746068543, 1e-15);
}

TEST(ActivationTest, DerivativesMatchFiniteDifferencesOnGrid) {
  const double h = 1e-5;
  for (auto kind : {Activation::kSigmoid, Activation::kTanh, Activation::kElu, Activation::kSilu,
                    Activation::kGelu, Activation::kRelu}) {
    for (int i = 0; i < 21; ++i) {
      const double x = -5.0 + 10.0 * (i + 0.25) / 21.0;
      const double numeric = (activate(kind, x + h) - activate(kind, x - h)) / (2 * h);
      const double analytic = activate_grad(kind, x);
      const double rel =
          std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      EXPECT_LE(rel, 1e-6) << activation_name(kind) << " at " << x;
    }
  }
}

TEST(ActivationTest, OpGradientOnTwoShapes) {
  Rng rng(13);
  for (auto kind : {Activation::kSigmoid, Activation::kTanh, Activation::kElu, Activation::kSilu,
                    Activation::kGelu}) {
    for (const Shape& shape : {Shape{3, 4}, Shape{2, 3, 5}}) {
      const auto report = gradcheck([kind](const auto& v) { return activation(v[0], kind); },
                                    {random_tensor(shape, rng, -3, 3)});
      EXPECT_LE(report.max_rel_error, kGradTol) << activation_name(kind) << " " << report.worst;
    }
  }
}

TEST(SoftmaxTest, UniformRow) {
  const Var y = softmax_rows(Var::constant(Tensor::matrix({{0, 0, 0}})));
  for (double v : y.value().data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, LargeLogitsDoNotOverflow) {
  const Var y = softmax_rows(Var::constant(Tensor::matrix({{1000, 0}})));
  EXPECT_NEAR(y.value()[0], 1.0, 1e-12);
  EXPECT_NEAR(y.value()[1], 0.0, 1e-12);
}

TEST(SoftmaxTest, RowsSumToOneAndGradientMatches) {
  Rng rng(14);
  const Tensor x = random_tensor({3, 7}, rng, -4, 4);
  const Var y = softmax_rows(Var::constant(x));
  for (std::size_t r = 0; r < 3; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < 7; ++c) total += y.value().at(r, c);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const auto report = gradcheck([](const auto& v) { return softmax_rows(v[0]); }, {x});
  EXPECT_LE(report.max_rel_error, 1e-6) << report.worst;
}

TEST(L2NormalizeTest, ThreeFourFive) {
  const Var y = l2_normalize(Var::constant(Tensor::matrix({{3, 4}})), NormAxis::kRow);
  EXPECT_NEAR(y.value()[0], 0.6, 1e-15);
  EXPECT_NEAR(y.value()[1], 0.8, 1e-15);
}

TEST(L2NormalizeTest, ZeroRowPassesThroughWithZeroGradient) {
  Tape tape;
  const Var x = tape.leaf(Tensor::matrix({{0, 0}, {3, 4}}));
  const Var y = l2_normalize(x, NormAxis::kRow);
  EXPECT_EQ(y.value().at(0, 0), 0.0);
  EXPECT_EQ(y.value().at(0, 1), 0.0);
  tape.backward(sum_all(y));
  EXPECT_EQ(x.grad().at(0, 0), 0.0);
  EXPECT_EQ(x.grad().at(0, 1), 0.0);
}

TEST(L2NormalizeTest, ColumnsHaveUnitNorm) {
  Rng rng(15);
  const Var y = l2_normalize(Var::constant(random_tensor({5, 4}, rng)), NormAxis::kColumn);
  for (std::size_t c = 0; c < 4; ++c) {
    double sq = 0.0;
    for (std::size_t r = 0; r < 5; ++r) sq += y.value().at(r, c) * y.value().at(r, c);
    EXPECT_NEAR(sq, 1.0, 1e-12);
  }
}

TEST(L2NormalizeTest, GradientBothAxes) {
  Rng rng(16);
  for (auto axis : {NormAxis::kRow, NormAxis::kColumn}) {
    for (const Shape& shape : {Shape{5, 4}, Shape{2, 3, 4}}) {
      const auto report = gradcheck([axis](const auto& v) { return l2_normalize(v[0], axis); },
                                    {random_tensor(shape, rng)});
      EXPECT_LE(report.max_rel_error, 1e-6) << report.worst;
    }
  }
}

TEST(OpsGradientTest, ElementwiseAndStructuralOps) {
  Rng rng(17);
  for (const Shape& shape : {Shape{3, 4}, Shape{2, 3, 4}}) {
    const Tensor a = random_tensor(shape, rng);
    const Tensor b = random_tensor(shape, rng);
    const Tensor bias = random_tensor({shape.back()}, rng);
    const Tensor w = random_tensor({2}, rng);
    const std::vector<std::pair<const char*, testing::Fn>> cases = {
        {"add", [](const auto& v) { return add(v[0], v[1]); }},
        {"sub", [](const auto& v) { return sub(v[0], v[1]); }},
        {"mul", [](const auto& v) { return mul(v[0], v[1]); }},
        {"scale", [](const auto& v) { return scale(add(v[0], v[1]), -1.7); }},
    };
    for (const auto& [name, fn] : cases) {
      const auto report = gradcheck(fn, {a, b});
      EXPECT_LE(report.max_rel_error, kGradTol) << name << " " << report.worst;
    }
    EXPECT_LE(gradcheck([](const auto& v) { return add_bias(v[0], v[1]); }, {a, bias})
                  .max_rel_error,
              kGradTol);
    EXPECT_LE(gradcheck([](const auto& v) { return scale_by(v[0], v[1], 1); }, {a, w})
                  .max_rel_error,
              kGradTol);
    EXPECT_LE(gradcheck([](const auto& v) { return softmax_rows(v[0]); }, {a}).max_rel_error,
              kGradTol);
    Shape flat{shape_size(shape)};
    EXPECT_LE(gradcheck([flat](const auto& v) { return reshape(mul(v[0], v[0]), flat); }, {a})
                  .max_rel_error,
              kGradTol);
    const std::vector<double> mask = [&] {
      std::vector<double> m(shape_size(shape) / shape.back());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = i % 2;
      return m;
    }();
    EXPECT_LE(gradcheck([&mask](const auto& v) { return mask_rows(mul(v[0], v[0]), mask); }, {a})
                  .max_rel_error,
              kGradTol);
    EXPECT_LE(gradcheck(
                  [](const auto& v) {
                    Rng local(99);
                    return dropout(v[0], 0.3, true, local);
                  },
                  {a})
                  .max_rel_error,
              kGradTol);
  }
}

TEST(OpsGradientTest, LayoutOps) {
  Rng rng(18);
  for (std::size_t heads : {1u, 2u}) {
    const Tensor x = random_tensor({2, 3, 4}, rng);
    EXPECT_LE(gradcheck([heads](const auto& v) { return split_heads(mul(v[0], v[0]), heads); }, {x})
                  .max_rel_error,
              kGradTol);
    const Tensor y = random_tensor({2 * heads, 3, 4 / heads}, rng);
    EXPECT_LE(gradcheck([heads](const auto& v) { return merge_heads(mul(v[0], v[0]), heads); }, {y})
                  .max_rel_error,
              kGradTol);
  }
  EXPECT_LE(gradcheck([](const auto& v) { return concat_cols(mul(v[0], v[0]), v[1]); },
                      {random_tensor({3, 2}, rng), random_tensor({3, 4}, rng)})
                .max_rel_error,
            kGradTol);
  EXPECT_LE(gradcheck([](const auto& v) { return take_step(mul(v[0], v[0]), 1); },
                      {random_tensor({2, 3, 4}, rng)})
                .max_rel_error,
            kGradTol);
  const std::vector<std::int32_t> idx{2, 0, 2, 1};
  EXPECT_LE(gradcheck([&idx](const auto& v) { return gather_rows(v[0], idx); },
                      {random_tensor({4, 3}, rng)})
                .max_rel_error,
            kGradTol);
}

TEST(SplitHeadsTest, RoundTripsAndRoutesChannels) {
  Tensor x({1, 2, 4});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const Var split = split_heads(Var::constant(x), 2);
  EXPECT_EQ(split.shape(), (Shape{2, 2, 2}));
  // Head 1, step 0 holds channels 2..3 of step 0.
  EXPECT_EQ(split.value().at(1, 0, 0), 2.0);
  EXPECT_EQ(split.value().at(1, 1, 1), 7.0);
  EXPECT_EQ(merge_heads(split, 2).value(), x);
  EXPECT_THROW(split_heads(Var::constant(x), 3), ShapeError);
}

TEST(GatherRowsTest, FrozenRowReceivesNoGradient) {
  Tape tape;
  const Var table = tape.leaf(Tensor::matrix({{0, 0}, {1, 2}, {3, 4}}));
  const std::vector<std::int32_t> idx{0, 2, 0};
  const Var rows = gather_rows(table, idx, 0);
  EXPECT_EQ(rows.value().at(1, 1), 4.0);
  tape.backward(sum_all(rows));
  EXPECT_EQ(table.grad().at(0, 0), 0.0);
  EXPECT_EQ(table.grad().at(1, 0), 0.0);
  EXPECT_EQ(table.grad().at(2, 0), 1.0);
  const std::vector<std::int32_t> bad{3};
  EXPECT_THROW(gather_rows(table, bad), std::out_of_range);
}

TEST(TapeTest, BranchGradientsAccumulateExactly) {
  Rng rng(19);
  const Tensor x0 = random_tensor({3, 3}, rng);
  const Tensor w = random_tensor({3, 3}, rng);
  auto f = [&](const Var& x) { return activation(matmul(x, Var::constant(w)), Activation::kTanh); };
  auto g = [&](const Var& x) { return mul(x, x); };
  auto grad_of = [&](auto&& fn) {
    Tape tape;
    const Var x = tape.leaf(x0);
    tape.backward(sum_all(fn(x)));
    return x.grad();
  };
  const Tensor gf = grad_of(f);
  const Tensor gg = grad_of(g);
  const Tensor both = grad_of([&](const Var& x) { return add(f(x), g(x)); });
  for (std::size_t i = 0; i < both.size(); ++i) EXPECT_EQ(both[i], gf[i] + gg[i]);
}

TEST(TapeTest, BackwardVisitsEveryOpOnceAndOnlyOnce) {
  Tape tape;
  const Var x = tape.leaf(Tensor::matrix({{1, 2}, {3, 4}}));
  const Var y = sum_all(mul(activation(x, Activation::kSilu), x));
  EXPECT_EQ(tape.size(), 3u);
  EXPECT_EQ(tape.backward(y), 3u);
  EXPECT_THROW(tape.backward(y), std::logic_error);
}

TEST(TapeTest, EvalTapeRecordsNothing) {
  Tape tape(false);
  const Var x = tape.leaf(Tensor::matrix({{1, 2}}));
  const Var y = mul(x, x);
  EXPECT_EQ(tape.size(), 0u);
  EXPECT_EQ(y.value(), Tensor::matrix({{1, 4}}));
}

TEST(TapeTest, NonFiniteValuesAreReported) {
  Tape tape;
  const Var x = tape.leaf(Tensor::matrix({{1e300}}));
  EXPECT_THROW(mul(x, x), NonFiniteError);
}

TEST(TapeTest, ForwardIsDeterministic) {
  Rng a(5), b(5);
  const Tensor x = random_tensor({4, 4}, a);
  const Tensor y = random_tensor({4, 4}, b);
  EXPECT_EQ(x, y);
  EXPECT_EQ(softmax_rows(matmul(Var::constant(x), Var::constant(x))).value(),
            softmax_rows(matmul(Var::constant(y), Var::constant(y))).value());
}

TEST(XavierTest, EntriesWithinBound) {
  const Tensor t = xavier_init({4, 4}, 3);
  const double bound = std::sqrt(6.0 / 8.0);
  for (double v : t.data()) EXPECT_LE(std::abs(v), bound);
  EXPECT_THROW(xavier_init({4, 4, 4}, 3), ShapeError);
}

TEST(XavierTest, SameSeedIsBitIdentical) { EXPECT_EQ(xavier_init({7, 5}, 42), xavier_init({7, 5}, 42)); }

TEST(XavierTest, EmpiricalVarianceMatchesGlorot) {
  const Tensor t = xavier_init({100, 100}, 2024);
  double mean = t.sum() / static_cast<double>(t.size());
  double var = 0.0;
  for (double v : t.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t.size());
  const double expected = 2.0 / 200.0;
  EXPECT_NEAR(var, expected, 0.1 * expected);
}

TEST(AdamTest, ZeroGradientIsFixedPoint) {
  ParamStore store;
  store.add("w", Tensor::vector({1.0, -2.0}));
  Adam adam(store, {});
  store.get("w")->grad = Tensor({2});
  adam.step(store);
  EXPECT_EQ(store.get("w")->value, Tensor::vector({1.0, -2.0}));
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParamStore store;
  store.add("w", Tensor::vector({0.5}));
  AdamOptions opts;
  opts.lr = 0.01;
  Adam adam(store, opts);
  store.get("w")->grad = Tensor::vector({1.0});
  adam.step(store);
  EXPECT_NEAR(store.get("w")->value[0] - 0.5, -0.01, 1e-9);
}

TEST(AdamTest, ConvergesOnQuadratic) {
  ParamStore store;
  store.add("w", Tensor::vector({0.0}));
  AdamOptions opts;
  opts.lr = 0.1;
  Adam adam(store, opts);
  for (int i = 0; i < 100; ++i) {
    const double w = store.get("w")->value[0];
    store.get("w")->grad = Tensor::vector({2.0 * (w - 3.0)});
    adam.step(store);
  }
  EXPECT_LT(std::abs(store.get("w")->value[0] - 3.0), 0.05);
  EXPECT_EQ(adam.steps(), 100u);
}

TEST(AdamTest, NonFiniteGradientAbortsWithoutUpdating) {
  ParamStore store;
  store.add("a", Tensor::vector({1.0}));
  store.add("b", Tensor::vector({1.0}));
  Adam adam(store, {});
  store.get("a")->grad = Tensor::vector({1.0});
  store.get("b")->grad = Tensor::vector({std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(adam.step(store), NonFiniteError);
  EXPECT_EQ(store.get("a")->value[0], 1.0);
  EXPECT_EQ(adam.steps(), 0u);
}

TEST(AdamTest, ShapeMismatchRejected) {
  Tensor p({2}), g({3}), m({2}), v({2});
  EXPECT_THROW(adam_update(p, g, m, v, 1, {}), ShapeError);
}

TEST(DropoutTest, RateZeroAndEvalAreIdentity) {
  Rng rng(1);
  const Var x = Var::constant(Tensor::matrix({{1, 2, 3}}));
  EXPECT_EQ(dropout(x, 0.0, true, rng).value(), x.value());
  EXPECT_EQ(dropout(x, 0.5, false, rng).value(), x.value());
  EXPECT_THROW(dropout(x, 1.0, true, rng), std::invalid_argument);
  EXPECT_THROW(dropout(x, -0.1, true, rng), std::invalid_argument);
}

TEST(DropoutTest, InvertedScalingPreservesMean) {
  Rng rng(77);
  const Var x = Var::constant(Tensor({100000}, 1.0));
  const Var y = dropout(x, 0.5, true, rng);
  const double mean = y.value().sum() / 100000.0;
  EXPECT_NEAR(mean, 1.0, 0.02);
}

class ArchiveTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("glint_archive_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  std::filesystem::path dir_;
};

TEST_F(ArchiveTest, SaveLoadSaveIsByteIdentical) {
  Rng rng(3);
  ParamStore store;
  store.add("b.weight", random_tensor({3, 2}, rng));
  store.add("a.bias", random_tensor({2}, rng));
  save_archive(dir_ / "one", store, {{"note", "x"}});
  ParamStore loaded;
  loaded.add("b.weight", Tensor({3, 2}));
  loaded.add("a.bias", Tensor({2}));
  const auto meta = load_archive_into(dir_ / "one", loaded);
  EXPECT_EQ(meta.at("note"), "x");
  EXPECT_EQ(loaded.get("b.weight")->value, store.get("b.weight")->value);
  save_archive(dir_ / "two", loaded, meta);
  EXPECT_EQ(slurp(dir_ / "one" / "manifest.json"), slurp(dir_ / "two" / "manifest.json"));
  EXPECT_EQ(slurp(dir_ / "one" / "tensors.bin"), slurp(dir_ / "two" / "tensors.bin"));
}

TEST_F(ArchiveTest, ShapeMismatchNamesTensor) {
  ParamStore store;
  store.add("emb", Tensor({4, 3}));
  save_archive(dir_, store);
  ParamStore other;
  other.add("emb", Tensor({4, 5}));
  try {
    load_archive_into(dir_, other);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("emb"), std::string::npos);
  }
}

TEST_F(ArchiveTest, CorruptManifestRejected) {
  ParamStore store;
  store.add("emb", Tensor({2}));
  save_archive(dir_, store);
  std::ofstream(dir_ / "manifest.json") << "{ not json";
  EXPECT_THROW(load_archive(dir_), ArchiveError);
}

}  // namespace
}  // namespace glint::num
