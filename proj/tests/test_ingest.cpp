#include <gtest/gtest.h>

#include "icm/graph.hpp"
#include "icm/ingest.hpp"
#include "icm/io.hpp"
#include "oracles.hpp"

using namespace icm;

namespace {

IncomeCirculationMatrix fex() { return validate({3, kDefaultTolerance, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}}); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST(Estimate, SinglePayment) {
  const std::vector<TransactionRecord> tx{{0, 1, 0, 30.0}};
  const auto f = estimate_icm(tx, WealthVector::make({50, 100}), 0);
  EXPECT_NEAR(f.at(0, 1), 0.3, 1e-15);
  EXPECT_NEAR(f.at(1, 1), 0.7, 1e-15);
  EXPECT_EQ(f.at(0, 0), 1.0);
}

TEST(Estimate, EmptyStepIsIdentity) {
  const auto f = estimate_icm({}, WealthVector::make({1, 2, 3}), 4);
  EXPECT_EQ(f.to_dense(), DenseMatrix::identity(3));
}

TEST(Estimate, RepeatedPairsAdd) {
  const std::vector<TransactionRecord> tx{{2, 0, 1, 10.0}, {2, 0, 1, 20.0}};
  EXPECT_NEAR(estimate_icm(tx, WealthVector::make({100, 1}), 2).at(1, 0), 0.3, 1e-15);
}

TEST(Estimate, Errors) {
  const auto x = WealthVector::make({10, 0, 5});
  EXPECT_EQ(kind_of([&] { estimate_icm(std::vector<TransactionRecord>{{0, 0, 1, 11.0}}, x, 0); }), ErrorKind::OverSpending);
  EXPECT_EQ(kind_of([&] { estimate_icm(std::vector<TransactionRecord>{{0, 1, 0, 1.0}}, x, 0); }), ErrorKind::ZeroWealthPayer);
  EXPECT_EQ(kind_of([&] { estimate_icm(std::vector<TransactionRecord>{{0, 0, 0, 1.0}}, x, 0); }), ErrorKind::InvalidTransaction);
  EXPECT_EQ(kind_of([&] { estimate_icm(std::vector<TransactionRecord>{{0, 0, 1, -1.0}}, x, 0); }), ErrorKind::InvalidTransaction);
  EXPECT_EQ(kind_of([&] { estimate_icm(std::vector<TransactionRecord>{{1, 0, 2, 1.0}}, x, 0); }), ErrorKind::InvalidTransaction);
}

TEST(Estimate, RoundTrip) {
  for (unsigned long long seed = 0; seed < 20; ++seed) {
    const auto eco = synthesize_economy(2 + seed, EconomyProfile::CohesiveRandom, seed);
    const auto tx = synthesize_transactions(eco.matrix, eco.wealth, 3);
    const auto back = estimate_icm(tx, eco.wealth, 3);
    EXPECT_LE(max_abs_diff(back.to_dense(), eco.matrix.to_dense()), 1e-12);
  }
}

TEST(Window, MissingWealthAndIdleSteps) {
  std::map<long, WealthVector> wealth;
  wealth.emplace(1, WealthVector::make({10, 10}, 1));
  const std::vector<TransactionRecord> tx{{1, 0, 1, 5.0}, {2, 1, 0, 1.0}};
  EXPECT_EQ(kind_of([&] { estimate_window(tx, wealth, 2, {0, 2}); }), ErrorKind::MissingWealth);
  const auto mats = estimate_window(tx, wealth, 2, {0, 1});
  ASSERT_EQ(mats.size(), 2u);
  EXPECT_EQ(mats[0].to_dense(), DenseMatrix::identity(2));
  EXPECT_NEAR(mats[1].at(1, 0), 0.5, 1e-15);
  EXPECT_EQ(kind_of([&] { estimate_window(tx, wealth, 2, {3, 2}); }), ErrorKind::EmptyWindow);
}

TEST(Average, Examples) {
  const auto id = IncomeCirculationMatrix::identity(3);
  const std::vector<IncomeCirculationMatrix> ii{id, id};
  EXPECT_EQ(average_icm(ii).to_dense(), DenseMatrix::identity(3));

  const std::vector<IncomeCirculationMatrix> mixed{fex(), id};
  const auto avg = average_icm(mixed);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(avg.at(i, j), 0.5 * fex().at(i, j) + 0.5 * id.at(i, j));
  EXPECT_EQ(classify(avg).verdict, Verdict::Cohesive);
  EXPECT_NE(classify(fex()).verdict, Verdict::Cohesive);
  EXPECT_NE(classify(id).verdict, Verdict::Cohesive);

  const std::vector<IncomeCirculationMatrix> one{fex()};
  EXPECT_EQ(average_icm(one).to_dense(), fex().to_dense());
  EXPECT_EQ(kind_of([] { average_icm(std::span<const IncomeCirculationMatrix>{}); }), ErrorKind::EmptyWindow);
  const std::vector<IncomeCirculationMatrix> bad{fex(), IncomeCirculationMatrix::identity(2)};
  EXPECT_EQ(kind_of([&] { average_icm(bad); }), ErrorKind::DimensionMismatch);
}

TEST(Average, WindowIndices) {
  const auto id = IncomeCirculationMatrix::identity(3);
  const std::vector<IncomeCirculationMatrix> seq{id, fex(), fex()};
  EXPECT_EQ(average_icm(seq, {1, 2}).to_dense(), fex().to_dense());
}

TEST(Synthesize, Profiles) {
  EXPECT_EQ(synthesize_economy(3, "ring", 0).matrix.to_dense(), fex().to_dense());
  EXPECT_EQ(classify(synthesize_economy(12, "two-class", 1).matrix).verdict, Verdict::Fragmented);
  for (unsigned long long s = 0; s < 20; ++s)
    EXPECT_EQ(classify(synthesize_economy(3 + s, "cohesive-random", s).matrix).verdict, Verdict::Cohesive);
  EXPECT_TRUE(hoarder_decompose(synthesize_economy(7, "hoarder", 4).matrix).pure_cash_hoarder);
  EXPECT_EQ(kind_of([] { synthesize_economy(3, "pyramid", 0); }), ErrorKind::UnknownProfile);
  EXPECT_EQ(kind_of([] { synthesize_economy(1, "ring", 0); }), ErrorKind::InvalidDimension);
}

TEST(Synthesize, Deterministic) {
  const auto a = synthesize_economy(15, "cohesive-random", 42);
  const auto b = synthesize_economy(15, "cohesive-random", 42);
  EXPECT_EQ(a.matrix.to_dense(), b.matrix.to_dense());
  EXPECT_EQ(io::matrix_to_json(a.matrix).dump(), io::matrix_to_json(b.matrix).dump());
}

TEST(Io, TransactionsCsv) {
  const auto tx = io::parse_transactions_csv("\xEF\xBB\xBFt,payer,payee,amount\r\n0,1,0,2.5\n\n1, 0 ,1,1e-3\n");
  ASSERT_EQ(tx.size(), 2u);
  EXPECT_EQ(tx[1].time, 1);
  EXPECT_EQ(tx[1].payer, 0u);
  EXPECT_EQ(tx[1].amount, 1e-3);
  EXPECT_EQ(kind_of([] { io::parse_transactions_csv("time,payer,payee,amount\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { io::parse_transactions_csv("t,payer,payee,amount\n0,1,x,2\n"); }), ErrorKind::ParseError);
}

TEST(Io, WealthCsv) {
  const auto single = io::parse_wealth_csv("agent,wealth\n1,2.0\n0,5\n");
  ASSERT_TRUE(single.single);
  EXPECT_EQ((*single.single)[0], 5.0);
  const auto multi = io::parse_wealth_csv("agent,wealth_0,wealth_1\n0,1,2\n1,3,4\n");
  ASSERT_EQ(multi.by_step.size(), 2u);
  EXPECT_EQ(multi.by_step.at(1)[1], 4.0);
  EXPECT_EQ(multi.by_step.at(1).time(), 1);
  EXPECT_EQ(kind_of([] { io::parse_wealth_csv("agent,wealth\n0,1\n0,2\n"); }), ErrorKind::ParseError);
}

TEST(Io, MatrixJsonRoundTrip) {
  const auto eco = synthesize_economy(6, "cohesive-random", 3);
  const auto j = io::matrix_to_json(eco.matrix);
  const auto back = validate(io::raw_matrix_from_json(j));
  EXPECT_EQ(back.to_dense(), eco.matrix.to_dense());
  EXPECT_EQ(kind_of([] { io::raw_matrix_from_json(nlohmann::json{{"n", 2}}); }), ErrorKind::ParseError);
}

TEST(Io, TrajectoryCsv) {
  const auto t = evolve(fex(), WealthVector::make({1, 2, 3}), 1);
  EXPECT_EQ(io::trajectory_csv(t), "t,agent_0,agent_1,agent_2\n0,1,2,3\n1,2,3,1\n");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333333");
}
