#include <gtest/gtest.h>

#include "model_oracles.hpp"
#include "retrieval_oracles.hpp"

namespace dshgan {
namespace {

void expect_all(const testing::CheckList& list) {
  ASSERT_FALSE(list.checks().empty());
  for (const auto& c : list.checks()) EXPECT_TRUE(c.ok) << c.name << ": " << c.detail;
}

template <class Suite>
testing::CheckList run(Suite&& suite) {
  testing::CheckList list;
  suite(list);
  return list;
}

TEST(Oracles, Losses) { expect_all(run(testing::loss_oracles)); }
TEST(Oracles, Gan) { expect_all(run(testing::gan_oracles)); }
TEST(Oracles, HashModel) { expect_all(run(testing::hashmodel_oracles)); }
TEST(Oracles, ObjectiveIdentity) {
  expect_all(run([](testing::CheckList& l) { testing::objective_identity(l, 20); }));
}
TEST(Oracles, Retrieval) { expect_all(run(testing::retrieval_oracles)); }
TEST(Oracles, Evaluation) { expect_all(run(testing::evaluation_oracles)); }
TEST(Oracles, MetricsAgainstBruteForce) {
  expect_all(run([](testing::CheckList& l) { testing::metric_brute_force(l, 50, 7); }));
}
TEST(Oracles, RetrievalEngine) {
  expect_all(run([](testing::CheckList& l) { testing::retrieval_engine_suite(l, 100, 2000, 8); }));
}

}  // namespace
}  // namespace dshgan
