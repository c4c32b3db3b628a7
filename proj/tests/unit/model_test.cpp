#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tuckert/errors.hpp"
#include "tuckert/expressivity.hpp"
#include "tuckert/model.hpp"

namespace tuckert {
namespace {

const ModelShape kTiny{5, 3, 4, 4};

TEST(InitParams, SameSeedIsBitwiseIdentical) {
  const auto a = init_params<float>(kTiny, ModelKind::TuckERTNT, 42);
  const auto b = init_params<float>(kTiny, ModelKind::TuckERTNT, 42);
  const auto c = init_params<float>(kTiny, ModelKind::TuckERTNT, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(InitParams, Icews14ParameterCount) {
  const ModelShape icews14{7128, 230, 365, 300};
  EXPECT_EQ(parameter_count(icews14, ModelKind::TuckERT), 29'385'900u);
  EXPECT_EQ(parameter_count(icews14, ModelKind::TuckERTNT), 29'385'900u + 300u * 460u);
}

TEST(InitParams, StaticTableOnlyForNonTemporalVariant) {
  const ModelShape shape{10, 7, 6, 32};
  const auto nt = ModelParams<float>::zeros(shape, ModelKind::TuckERTNT);
  EXPECT_EQ(nt.pred_static.rows(), 14u);
  EXPECT_EQ(nt.pred_temporal.rows(), 14u);
  const auto t = ModelParams<float>::zeros(shape, ModelKind::TuckERT);
  EXPECT_TRUE(t.pred_static.empty());
}

TEST(InitParams, CountMatchesFormulaForEveryKind) {
  for (auto kind : {ModelKind::TuckERT, ModelKind::TuckERTNT}) {
    for (std::size_t d : {1u, 3u, 8u}) {
      const ModelShape shape{9, 4, 5, d};
      EXPECT_EQ(init_params<double>(shape, kind, 1).parameter_count(), parameter_count(shape, kind));
    }
  }
}

TEST(InitParams, RejectsEmptyVocabularies) {
  EXPECT_THROW(init_params<float>(ModelShape{0, 1, 1, 4}, ModelKind::TuckERT, 0), ConfigError);
  EXPECT_THROW(init_params<float>(ModelShape{1, 1, 1, 0}, ModelKind::TuckERT, 0), ConfigError);
}

TEST(InitParams, EmpiricalScales) {
  const auto p = init_params<double>(ModelShape{2000, 10, 10, 10}, ModelKind::TuckERT, 5);
  double sq = 0.0;
  for (double x : p.entities.values()) sq += x * x;
  EXPECT_NEAR(std::sqrt(sq / p.entities.size()), 0.05, 0.002);
  double csq = 0.0;
  for (double x : p.core.values()) csq += x * x;
  EXPECT_NEAR(std::sqrt(csq / p.core.size()), 0.1, 0.01);
}

TEST(Score, ZeroCoreScoresZero) {
  auto p = init_params<double>(kTiny, ModelKind::TuckERTNT, 1);
  std::fill(p.core.values().begin(), p.core.values().end(), 0.0);
  for (auto binding : {TimeBinding::Subject, TimeBinding::Predicate, TimeBinding::Object}) {
    EXPECT_EQ(score(p, 0, 1, 2, 3, binding), 0.0);
    for (double s : score_objects(p, 4, 5, 0, binding)) EXPECT_EQ(s, 0.0);
  }
}

TEST(Score, PredicateBindingMatchesLoopOracle) {
  const auto p = init_params<double>(kTiny, ModelKind::TuckERT, 2);
  const std::size_t s = 1, r = 4, o = 3, t = 2;
  const auto b = oracle::hadamard(oracle::row(p.pred_temporal.row(r)), p.times.row(t));
  const double ref =
      oracle::triple_loop(p.core, oracle::row(p.entities.row(s)), b, oracle::row(p.entities.row(o)));
  EXPECT_NEAR(score(p, s, r, o, t, TimeBinding::Predicate), ref, 1e-12);
}

TEST(Score, NonTemporalVariantWithZeroTimeReducesToStaticTucker) {
  auto p = init_params<double>(kTiny, ModelKind::TuckERTNT, 3);
  for (std::size_t k = 0; k < kTiny.dim; ++k) p.times(2, k) = 0.0;
  const std::size_t s = 0, r = 1, o = 4;
  const double ref = oracle::triple_loop(p.core, oracle::row(p.entities.row(s)),
                                         oracle::row(p.pred_static.row(r)),
                                         oracle::row(p.entities.row(o)));
  EXPECT_NEAR(score(p, s, r, o, 2, TimeBinding::Predicate), ref, 1e-12);
}

TEST(Score, AllZeroTimesMakesScoresTimeIndependent) {
  auto p = init_params<double>(kTiny, ModelKind::TuckERTNT, 4);
  std::fill(p.times.values().begin(), p.times.values().end(), 0.0);
  for (auto binding : {TimeBinding::Subject, TimeBinding::Predicate, TimeBinding::Object}) {
    const auto at0 = score_objects(p, 2, 3, 0, binding);
    for (std::size_t t = 1; t < kTiny.timestamps; ++t) {
      const auto at_t = score_objects(p, 2, 3, t, binding);
      for (std::size_t o = 0; o < at0.size(); ++o) EXPECT_NEAR(at0[o], at_t[o], 1e-12);
    }
  }
}

TEST(Score, SubjectAndObjectBindingsMatchLoopOracle) {
  for (auto kind : {ModelKind::TuckERT, ModelKind::TuckERTNT}) {
    const auto p = init_params<double>(kTiny, kind, 5);
    const std::size_t s = 2, r = 0, o = 1, t = 3;
    const auto es = oracle::row(p.entities.row(s));
    const auto eo = oracle::row(p.entities.row(o));
    const auto er = oracle::row(p.pred_temporal.row(r));
    double subj = oracle::triple_loop(p.core, oracle::hadamard(es, p.times.row(t)), er, eo);
    double obj = oracle::triple_loop(p.core, es, er, oracle::hadamard(eo, p.times.row(t)));
    if (kind == ModelKind::TuckERTNT) {
      const double stat = oracle::triple_loop(p.core, es, oracle::row(p.pred_static.row(r)), eo);
      subj += stat;
      obj += stat;
    }
    EXPECT_NEAR(score(p, s, r, o, t, TimeBinding::Subject), subj, 1e-12);
    EXPECT_NEAR(score(p, s, r, o, t, TimeBinding::Object), obj, 1e-12);
  }
}

TEST(Score, BindingsAreDistinctFunctions) {
  const auto p = init_params<double>(kTiny, ModelKind::TuckERT, 6);
  const double subj = score(p, 0, 0, 1, 0, TimeBinding::Subject);
  const double pred = score(p, 0, 0, 1, 0, TimeBinding::Predicate);
  const double obj = score(p, 0, 0, 1, 0, TimeBinding::Object);
  EXPECT_NE(subj, pred);
  EXPECT_NE(pred, obj);
}

TEST(Score, RejectsOutOfRangeIndices) {
  const auto p = init_params<double>(kTiny, ModelKind::TuckERT, 7);
  EXPECT_THROW(score(p, 5, 0, 0, 0), IndexError);
  EXPECT_THROW(score(p, 0, 6, 0, 0), IndexError);
  EXPECT_THROW(score(p, 0, 0, 5, 0), IndexError);
  EXPECT_THROW(score(p, 0, 0, 0, 4), IndexError);
  EXPECT_THROW(score_objects(p, 0, 0, 4), IndexError);
  EXPECT_NO_THROW(score(p, 0, 5, 0, 0));  // reciprocal row
}

TEST(ScoreObjects, ConsistentWithScalarScore) {
  for (auto kind : {ModelKind::TuckERT, ModelKind::TuckERTNT}) {
    for (auto binding : {TimeBinding::Subject, TimeBinding::Predicate, TimeBinding::Object}) {
      const auto p = init_params<double>(ModelShape{3, 2, 2, 4}, kind, 8);
      for (std::size_t r = 0; r < 4; ++r) {
        const auto all = score_objects(p, 1, r, 1, binding);
        ASSERT_EQ(all.size(), 3u);
        for (std::size_t o = 0; o < 3; ++o) EXPECT_NEAR(all[o], score(p, 1, r, o, 1, binding), 1e-12);
      }
    }
  }
}

TEST(ScoreObjects, FoldedExpressivityConstructionGivesPlusMinusOne) {
  const auto truth = TruthTable::random(3, 2, 3, 99);
  const Order4Core core(truth);
  const auto p = fold_into_tuckert(core);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t t = 0; t < 3; ++t) {
        const auto scores = score_objects(p, s, r, t);
        for (std::size_t o = 0; o < 3; ++o) {
          EXPECT_EQ(scores[o], truth(s, r, o, t) ? 1.0 : -1.0);
        }
      }
    }
  }
}

TEST(ConvertParams, RoundTripThroughDoubleIsExact) {
  const auto f = init_params<float>(kTiny, ModelKind::TuckERTNT, 9);
  EXPECT_EQ(convert_params<float>(convert_params<double>(f)), f);
}

TEST(ModelKindNames, ParseRoundTrip) {
  for (auto k : {ModelKind::TuckERT, ModelKind::TuckERTNT}) EXPECT_EQ(parse_model_kind(to_string(k)), k);
  for (auto b : {TimeBinding::Subject, TimeBinding::Predicate, TimeBinding::Object}) {
    EXPECT_EQ(parse_time_binding(to_string(b)), b);
  }
  EXPECT_THROW(parse_model_kind("ComplEx"), ConfigError);
}

}  // namespace
}  // namespace tuckert
