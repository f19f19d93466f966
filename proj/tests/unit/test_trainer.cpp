#include <gtest/gtest.h>

#include <random>

#include "dshgan/errors.hpp"
#include "dshgan/nn/optim.hpp"
#include "dshgan/trainer.hpp"
#include "gradcheck.hpp"
#include "micro.hpp"

namespace dshgan {
namespace {

TrainConfig micro_train(std::size_t iterations) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.lr_decay_step = 5;
  cfg.synthetic_fraction = 0.5;
  cfg.seed = 21;
  return cfg;
}

TEST(GradientStep, FixedPointAndCancellation) {
  std::mt19937_64 rng(1);
  Tensor p = testing::random_tensor({3, 2}, rng);
  const Tensor p0 = p;
  Tensor v({3, 2});
  Tensor* params[] = {&p};
  Tensor velocity[] = {v};
  const Tensor zero[] = {Tensor({3, 2})};
  nn::gradient_step(params, velocity, zero, {0.5, 0.9, 0.0});
  EXPECT_EQ(p, p0);

  const Tensor same[] = {p0};
  Tensor fresh[] = {Tensor({3, 2})};
  nn::gradient_step(params, fresh, same, {1.0, 0.0, 0.0});
  for (double x : p.values()) EXPECT_EQ(x, 0.0);
}

TEST(GradientStep, MatchesScalarRecurrence) {
  std::mt19937_64 rng(2);
  const nn::MomentumSgdConfig cfg{0.05, 0.8, 0.01};
  Tensor p = testing::random_tensor({4}, rng);
  std::vector<double> ref(p.values().begin(), p.values().end()), vel(4, 0.0);
  Tensor velocity[] = {Tensor({4})};
  Tensor* params[] = {&p};
  for (int step = 0; step < 5; ++step) {
    const Tensor g = testing::random_tensor({4}, rng);
    for (std::size_t i = 0; i < 4; ++i) {
      vel[i] = cfg.momentum * vel[i] + g[i] + cfg.weight_decay * ref[i];
      ref[i] -= cfg.learning_rate * vel[i];
    }
    const Tensor grads[] = {g};
    nn::gradient_step(params, velocity, grads, cfg);
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p[i], ref[i], 1e-14);
}

TEST(GradientStep, ShapeMismatch) {
  Tensor p({2});
  Tensor* params[] = {&p};
  Tensor velocity[] = {Tensor({2})};
  const Tensor grads[] = {Tensor({3})};
  try {
    nn::gradient_step(params, velocity, grads, {});
    FAIL() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Train, ZeroIterationsLeaveBothStatesUnchanged) {
  const testing::MicroSetup s = testing::make_micro(3, LabelMode::kSingle);
  const TrainResult r = train(s.labeled, s.gan, s.model, micro_train(0));
  EXPECT_EQ(r.model, s.model);
  EXPECT_EQ(r.gan, s.gan);
  EXPECT_TRUE(r.log.empty());
}

TEST(Train, DeterministicWithFiniteLogOfFullLength) {
  const testing::MicroSetup s = testing::make_micro(4, LabelMode::kMulti);
  const TrainResult a = train(s.labeled, s.gan, s.model, micro_train(8));
  const TrainResult b = train(s.labeled, s.gan, s.model, micro_train(8));
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.gan, b.gan);
  EXPECT_EQ(training_log_csv(a.log), training_log_csv(b.log));
  ASSERT_EQ(a.log.size(), 8u);
  for (const auto& e : a.log) {
    EXPECT_TRUE(std::isfinite(e.cnn_objective) && std::isfinite(e.generator_objective));
    EXPECT_NEAR(e.cnn_objective - e.generator_objective, 2.0 * e.adversary, 1e-10);
  }
  EXPECT_EQ(a.log[4].learning_rate, 0.01);
  EXPECT_NEAR(a.log[5].learning_rate, 0.001, 1e-15);
  EXPECT_NE(a.model, s.model);
  EXPECT_NE(a.gan.generator, s.gan.generator);
  EXPECT_EQ(a.gan.trunk, s.gan.trunk);
}

TEST(Train, LogCsvHeader) {
  const std::string csv = training_log_csv({});
  EXPECT_EQ(csv, "step,triplet_loss,adversary_loss,classification_loss,cnn_objective,generator_objective,lr\n");
}

TEST(Train, SmallStepsDoNotRaiseTheFrozenBatchObjective) {
  for (const LabelMode mode : {LabelMode::kSingle, LabelMode::kMulti}) {
    testing::MicroSetup s = testing::make_micro(12, mode, 0.5, 6);
    const ObjectiveGradients cnn = cnn_gradients(s.model, s.triplets);
    auto params = testing::pointers(s.model.parameters());
    nn::MomentumSgd opt({1e-4, 0.0, 0.0});
    opt.step(params, cnn.grads);
    EXPECT_LE(cnn_gradients(s.model, s.triplets).objective, cnn.objective + 1e-8);

    const ObjectiveGradients gen = generator_gradients(s.model, s.gan, s.triplets);
    auto gparams = testing::pointers(s.gan.generator_parameters());
    nn::MomentumSgd gopt({1e-4, 0.0, 0.0});
    gopt.step(gparams, gen.grads);
    EXPECT_LE(generator_gradients(s.model, s.gan, s.triplets).objective, gen.objective + 1e-8);
  }
}

TEST(Train, InvalidConfiguration) {
  const testing::MicroSetup s = testing::make_micro(3, LabelMode::kSingle);
  TrainConfig cfg = micro_train(1);
  cfg.synthetic_fraction = 1.5;
  try {
    train(s.labeled, s.gan, s.model, cfg);
    FAIL() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfiguration);
  }
}

TEST(Train, DivergenceNamesTheStep) {
  testing::MicroSetup s = testing::make_micro(3, LabelMode::kSingle);
  TrainConfig cfg = micro_train(3);
  cfg.learning_rate = 1e300;
  cfg.momentum = 0.0;
  try {
    train(s.labeled, s.gan, s.model, cfg);
    FAIL() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
    EXPECT_NE(std::string(e.what()).find("at step"), std::string::npos);
  }
}

}  // namespace
}  // namespace dshgan

namespace dshgan {
namespace {

TEST(Train, ToyObjectiveFallsOverTraining) {
  const Dataset labeled = split_supervised(make_toy_dataset(4, 60, 8, LabelMode::kSingle, 1), 50, 2).first;
  GanConfig g;
  g.iterations = 0;
  const GanState gan = init_gan(g, 3);
  HashModelConfig h;
  HashModelState model = init_hash_model(h, 4);
  transfer_from_discriminator(model, gan);
  TrainConfig cfg;
  cfg.iterations = 400;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.03;
  cfg.lr_decay_step = 300;
  cfg.generator_lr_scale = 0.1;
  const TrainResult r = train(labeled, gan, model, cfg);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    first += r.log[i].cnn_objective;
    last += r.log[r.log.size() - 1 - i].cnn_objective;
  }
  EXPECT_LT(last, first);
}

}  // namespace
}  // namespace dshgan
