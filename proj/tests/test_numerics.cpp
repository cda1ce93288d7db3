#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "msis/autodiff.hpp"
#include "msis/gradcheck.hpp"
#include "msis/layers.hpp"
#include "support.hpp"

namespace msis {
namespace {

TEST(Dense, ScalarCase) {
  const Tensor2D out = dense_forward(Tensor2D::from_rows({{3.0}}), Tensor2D::from_rows({{2.0}}), std::vector<double>{1.0});
  ASSERT_EQ(out.rows(), 1u);
  EXPECT_DOUBLE_EQ(out(0, 0), 7.0);
}

TEST(Dense, IdentityWeightKeepsInput) {
  std::mt19937_64 rng(3);
  const Tensor2D x = test::random_tensor(4, 3, rng);
  EXPECT_EQ(dense_forward(x, Tensor2D::identity(3), std::vector<double>(3, 0.0)), x);
}

TEST(Dense, ZeroWeightGivesBias) {
  std::mt19937_64 rng(4);
  const Tensor2D x = test::random_tensor(5, 3, rng);
  const std::vector<double> b{1.5, -2.0};
  const Tensor2D out = dense_forward(x, Tensor2D(3, 2), b);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    EXPECT_EQ(out(i, 0), 1.5);
    EXPECT_EQ(out(i, 1), -2.0);
  }
}

TEST(Dense, ShapeMismatchNamesBothShapes) {
  const Tensor2D x(2, 3);
  const Tensor2D w(4, 2);
  try {
    dense_forward(x, w, std::vector<double>(2, 0.0));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(x.shape_string()), std::string::npos) << msg;
    EXPECT_NE(msg.find(w.shape_string()), std::string::npos) << msg;
  }
}

TEST(Sigmoid, KnownValues) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
}

TEST(Sigmoid, TapeVersionIsClamped) {
  Tape tape;
  const Var p = sigmoid(tape.constant(Tensor2D::from_rows({{-50.0, 50.0}})));
  EXPECT_GT(p.value()(0, 0), 0.0);
  EXPECT_GE(p.value()(0, 0), kProbEpsilon);
  EXPECT_LE(p.value()(0, 1), 1.0 - kProbEpsilon);
}

TEST(Softmax, Cases) {
  EXPECT_EQ(softmax_vec(std::vector<double>{0.0, 0.0}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(softmax_vec(std::vector<double>{-123.4}), (std::vector<double>{1.0}));
  const auto p = softmax_vec(std::vector<double>{std::log(2.0), 0.0});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
  EXPECT_THROW(softmax_vec(std::vector<double>{}), std::domain_error);
}

TEST(Softmax, LargeScoresStayFinite) {
  const auto p = softmax_vec(std::vector<double>{1000.0, 999.0});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(Backward, SigmoidAtZero) {
  ParamStore params;
  Parameter& x = params.add("x", Tensor2D(1, 1, 0.0));
  Tape tape;
  tape.backward(sigmoid(tape.param(x)));
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 0.25);
}

TEST(Backward, SumGivesOnes) {
  ParamStore params;
  Parameter& v = params.add("v", Tensor2D::from_rows({{1.0, -2.0, 3.0}, {0.5, 0.0, 9.0}}));
  Tape tape;
  const Var node = tape.param(v);
  tape.backward(sum(node));
  EXPECT_EQ(v.grad, Tensor2D(2, 3, 1.0));
  EXPECT_EQ(node.adjoint(), Tensor2D(2, 3, 1.0));
}

TEST(Backward, NonScalarRootRejected) {
  Tape tape;
  const Var v = tape.constant(Tensor2D(2, 1, 1.0));
  EXPECT_THROW(tape.backward(v), ContractError);
}

TEST(Backward, RepeatedParamSharesNode) {
  ParamStore params;
  Parameter& x = params.add("x", Tensor2D(1, 1, 2.0));
  Tape tape;
  const Var a = tape.param(x);
  const Var b = tape.param(x);
  EXPECT_EQ(a.id(), b.id());
  tape.backward(mul(a, b));
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 4.0);
}

TEST(Backward, GradientsAccumulateAcrossSweeps) {
  ParamStore params;
  Parameter& x = params.add("x", Tensor2D(1, 1, 1.0));
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    tape.backward(scale(tape.param(x), 3.0));
  }
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 6.0);
  params.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad(0, 0), 0.0);
}

TEST(Backward, NonRecordingTapeRefuses) {
  Tape tape(false);
  const Var v = tape.constant(Tensor2D(1, 1, 1.0));
  EXPECT_THROW(tape.backward(v), ContractError);
}

TEST(FiniteDiff, Square) {
  ParamStore params;
  params.add("x", Tensor2D(1, 1, 3.0));
  const LossFn loss = [](Tape& tape, ParamStore& p) {
    const Var x = tape.param(p.at("x"));
    return mul(x, x);
  };
  const GradCheckReport r = finite_diff_check(params, loss, 1e-3, 1e-4);
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.worst_analytic, 6.0);
  EXPECT_NEAR(r.worst_numeric, 6.0, 1e-6);
  EXPECT_EQ(r.worst_name, "x");
  EXPECT_EQ(r.checked, 1u);
}

TEST(FiniteDiff, EntropyStationaryAtHalf) {
  ParamStore params;
  params.add("theta", Tensor2D(1, 1, 0.0));
  const std::vector<double> mask{0.0};
  const LossFn loss = [&](Tape& tape, ParamStore& p) {
    return entropy_regularizer(sigmoid(tape.param(p.at("theta"))), mask, Reduction::kMean);
  };
  const GradCheckReport r = finite_diff_check(params, loss, 1e-4, 1e-6);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.worst_analytic, 0.0, 1e-15);
  EXPECT_NEAR(r.worst_numeric, 0.0, 1e-8);
}

TEST(FiniteDiff, DetectsNondeterministicLoss) {
  ParamStore params;
  params.add("x", Tensor2D(1, 1, 1.0));
  int calls = 0;
  const LossFn loss = [&](Tape& tape, ParamStore& p) {
    ++calls;
    return add(tape.param(p.at("x")), tape.constant(Tensor2D(1, 1, calls * 1e-3)));
  };
  EXPECT_THROW(finite_diff_check(params, loss, 1e-4, 1e-4), ContractError);
}

TEST(Losses, BceAtHalfIsLn2) {
  Tape tape;
  const Var p = tape.constant(Tensor2D(4, 1, 0.5));
  const std::vector<double> labels{0, 1, 1, 0};
  const std::vector<double> mask{1, 1, 1, 1};
  EXPECT_NEAR(masked_bce(p, labels, mask).scalar(), std::log(2.0), 1e-15);
}

TEST(Losses, BcePerfectPredictionNearZero) {
  Tape tape;
  const Var p = tape.constant(Tensor2D::from_rows({{0.0}, {1.0}}));
  const std::vector<double> labels{0, 1};
  const std::vector<double> mask{1, 1};
  const double v = masked_bce(p, labels, mask).scalar();
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 1e-11);
}

TEST(Losses, BceAllMaskedIsZero) {
  Tape tape;
  const Var p = tape.constant(Tensor2D(3, 1, 0.3));
  const std::vector<double> labels(3, label_poison());
  const std::vector<double> mask(3, 0.0);
  EXPECT_EQ(masked_bce(p, labels, mask).scalar(), 0.0);
}

TEST(Losses, BceRejectsPoisonUnderMask) {
  Tape tape;
  const Var p = tape.constant(Tensor2D(2, 1, 0.3));
  const std::vector<double> labels{1.0, label_poison()};
  const std::vector<double> mask{1.0, 1.0};
  EXPECT_THROW(masked_bce(p, labels, mask), ContractError);
}

TEST(Losses, EntropyCases) {
  Tape tape;
  const std::vector<double> one_unlabeled{0.0};
  EXPECT_NEAR(entropy_regularizer(tape.constant(Tensor2D(1, 1, 0.5)), one_unlabeled, Reduction::kMean).scalar(),
              std::log(2.0), 1e-15);
  EXPECT_LT(entropy_regularizer(tape.constant(Tensor2D(1, 1, 1e-13)), one_unlabeled, Reduction::kMean).scalar(),
            1e-10);
  EXPECT_LT(entropy_regularizer(tape.constant(Tensor2D(1, 1, 1.0 - 1e-13)), one_unlabeled, Reduction::kMean).scalar(),
            1e-10);
  const std::vector<double> three{0.0, 0.0, 0.0};
  EXPECT_NEAR(entropy_regularizer(tape.constant(Tensor2D(3, 1, 0.5)), three, Reduction::kSum).scalar(),
              3.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(entropy_regularizer(tape.constant(Tensor2D(3, 1, 0.5)), three, Reduction::kMean).scalar(),
              std::log(2.0), 1e-15);
  const std::vector<double> labeled{1.0, 1.0};
  EXPECT_EQ(entropy_regularizer(tape.constant(Tensor2D(2, 1, 0.5)), labeled, Reduction::kSum).scalar(), 0.0);
}

TEST(Losses, EntropyIgnoresLabeledRows) {
  Tape tape;
  const Var p = tape.constant(Tensor2D::from_rows({{0.5}, {0.01}, {0.2}}));
  const std::vector<double> mask{1.0, 0.0, 0.0};
  const double h01 = -0.01 * std::log(0.01) - 0.99 * std::log(0.99);
  const double h2 = -0.2 * std::log(0.2) - 0.8 * std::log(0.8);
  EXPECT_NEAR(entropy_regularizer(p, mask, Reduction::kSum).scalar(), h01 + h2, 1e-14);
  EXPECT_NEAR(entropy_regularizer(p, mask, Reduction::kMean).scalar(), (h01 + h2) / 2.0, 1e-14);
}

TEST(Ops, RowSoftmaxAndConcat) {
  Tape tape;
  const std::array<Var, 2> parts{tape.constant(Tensor2D::from_rows({{std::log(2.0)}, {5.0}})),
                                 tape.constant(Tensor2D::from_rows({{0.0}, {5.0}}))};
  const Var s = row_softmax(concat_cols(parts));
  EXPECT_NEAR(s.value()(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.value()(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(s.value()(1, 0), 0.5);
  EXPECT_EQ(s.value()(1, 1), 0.5);
}

TEST(Ops, OperandsFromDifferentTapesRejected) {
  Tape a;
  Tape b;
  EXPECT_THROW(add(a.constant(Tensor2D(1, 1)), b.constant(Tensor2D(1, 1))), ContractError);
}

TEST(Ops, ForwardIsBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(11);
    ParamStore params(11);
    add_mlp(params, "m", 4, std::vector<std::size_t>{6, 1}, rng);
    const Tensor2D x = test::random_tensor(8, 4, rng);
    Tape tape(false);
    return sigmoid(apply_mlp(tape, params, "m", 2, tape.constant(x), true)).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Layers, GlorotBounds) {
  std::mt19937_64 rng(5);
  const Tensor2D w = glorot_uniform(30, 10, rng);
  const double limit = std::sqrt(6.0 / 40.0);
  for (double v : w.values()) {
    EXPECT_LE(std::abs(v), limit);
  }
}

}  // namespace
}  // namespace msis
