/*
 * Copyright 2026 The RGCF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"

using namespace rgcf;

TEST(Architecture, ParamCounts) {
  EXPECT_EQ(Architecture::logistic(10, 10).param_count(), 110u);
  EXPECT_EQ(Architecture::mlp(4, {3}, 2).param_count(), 4u * 3 + 3 + 3 * 2 + 2);
  EXPECT_THROW(Architecture::logistic(0, 2).validate(), Error);
  EXPECT_THROW(Architecture::logistic(3, 1).validate(), Error);
  EXPECT_THROW(Architecture::mlp(3, {0}, 2).validate(), Error);
}

TEST(ServerModel, RejectsWrongParameterCount) {
  try {
    ServerModel(Architecture::logistic(2, 2), ParamVector::zeros(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

// Zero weights give a uniform softmax, so the gradient row for class c is
// (1/K - [y == c]) * x and the loss is log K.
TEST(Backward, LogisticAtZeroByHand) {
  const Architecture arch = Architecture::logistic(2, 2);
  const ServerModel model = ServerModel::zeros(arch);
  const LabeledBatch batch{2, {1.0, 2.0}, {0}};
  EXPECT_NEAR(forward_loss(model, batch), std::log(2.0), 1e-15);
  const GradientReport r = backward(model, batch);
  const std::vector<double> expected{-0.5, -1.0, 0.5, 1.0, -0.5, 0.5};
  ASSERT_EQ(r.gradient.size(), expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(r.gradient[j], expected[j], 1e-15) << j;
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
  EXPECT_FALSE(r.provenance.is_byzantine());
}

// On a linear model, doubling the inputs doubles the weight gradient and
// leaves the bias gradient unchanged (zero weights keep the softmax fixed).
TEST(Backward, LinearInInputsAtZero) {
  const Architecture arch = Architecture::logistic(3, 4);
  const ServerModel model = ServerModel::zeros(arch);
  RngStream rng(4, 0);
  LabeledBatch b = oracle::random_batch(arch, 5, rng);
  LabeledBatch b2 = b;
  for (double& x : b2.inputs) x *= 2.0;
  const auto g1 = backward(model, b).gradient;
  const auto g2 = backward(model, b2).gradient;
  for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(g2[j], 2.0 * g1[j], 1e-14);
  for (std::size_t j = 12; j < 16; ++j) EXPECT_NEAR(g2[j], g1[j], 1e-14);
}

TEST(Backward, MatchesFiniteDifferences) {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Architecture arch = trial % 2 ? Architecture::logistic(3 + trial % 4, 2 + trial % 3)
                                        : Architecture::mlp(3 + trial % 4, {5, 4}, 2 + trial % 3);
    const ServerModel model = ServerModel::random_init(arch, rng);
    const LabeledBatch batch = oracle::random_batch(arch, 6, rng);
    const auto bp = backward(model, batch).gradient.to_vector();
    const auto fd = finite_diff_gradient(model, batch, 1e-5).to_vector();
    EXPECT_LE(oracle::max_relative_error(bp, fd), 1e-4) << "trial " << trial;
  }
}

TEST(Backward, RejectsMismatchedBatch) {
  const ServerModel model = ServerModel::zeros(Architecture::logistic(3, 2));
  try {
    (void)backward(model, LabeledBatch{2, {1.0, 2.0}, {0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(ApplyUpdate, MaskedStepIsIdentity) {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(20);
    auto v = oracle::random_grads(2, d, rng);
    const double alpha = 1e-4 + rng.uniform();
    const ParamVector out = apply_update(v[0], v[1], alpha, true);
    ASSERT_EQ(out, v[0]);
  }
}

TEST(ApplyUpdate, AcceptedStepIsPlainSgd) {
  const ParamVector w({1.0, -2.0, 0.5});
  const ParamVector g({0.5, 0.25, -1.0});
  const ParamVector out = apply_update(w, g, 0.1, false);
  EXPECT_EQ(out[0], 1.0 - 0.1 * 0.5);
  EXPECT_EQ(out[1], -2.0 - 0.1 * 0.25);
  EXPECT_EQ(out[2], 0.5 + 0.1 * 1.0);
  EXPECT_THROW(apply_update(w, ParamVector({1.0}), 0.1, false), Error);
  EXPECT_THROW(apply_update(w, g, 0.0, false), Error);
}

TEST(Adam, FirstTwoStepsByHand) {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const ParamVector w0({1.0, -1.0});
  const ParamVector g1({0.5, -2.0});
  const ParamVector g2({-0.25, 1.0});
  auto [s1, w1] = adam_step(AdamState::zeros(2, lr), w0, g1);
  EXPECT_EQ(s1.t, 1u);
  // Bias correction makes the first step lr * g / (|g| + eps).
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(w1[j], w0[j] - lr * g1[j] / (std::abs(g1[j]) + eps), 1e-15);
  }
  auto [s2, w2] = adam_step(s1, w1, g2);
  EXPECT_EQ(s2.t, 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    const double m = b1 * (1 - b1) * g1[j] + (1 - b1) * g2[j];
    const double v = b2 * (1 - b2) * g1[j] * g1[j] + (1 - b2) * g2[j] * g2[j];
    const double m_hat = m / (1 - b1 * b1);
    const double v_hat = v / (1 - b2 * b2);
    EXPECT_NEAR(w2[j], w1[j] - lr * m_hat / (std::sqrt(v_hat) + eps), 1e-15);
  }
}
