#include "tuckert/expressivity.hpp"

#include <random>
#include <string>

#include "tuckert/errors.hpp"

namespace tuckert {

TruthTable TruthTable::random(std::size_t n_e, std::size_t n_r, std::size_t n_t,
                              std::uint64_t seed, double density) {
  TruthTable t = constant(n_e, n_r, n_t, false);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  for (std::size_t i = 0; i < t.holds.size(); ++i) t.holds[i] = coin(rng);
  return t;
}

TruthTable TruthTable::constant(std::size_t n_e, std::size_t n_r, std::size_t n_t, bool value) {
  if (n_e == 0 || n_r == 0 || n_t == 0) throw ConfigError("truth table sizes must be >= 1");
  if (n_e * n_r * n_e * n_t > 10000) {
    throw ConfigError("expressivity check enumerates n_e*n_r*n_e*n_t <= 10^4 facts");
  }
  return TruthTable{n_e, n_r, n_t, std::vector<bool>(n_e * n_r * n_e * n_t, value)};
}

Order4Core::Order4Core(const TruthTable& truth)
    : n_e_(truth.entities), n_p_(2 * truth.relations), n_t_(truth.timestamps),
      values_(n_e_ * n_p_ * n_e_ * n_t_, -1.0) {
  const std::size_t n_r = truth.relations;
  for (std::size_t s = 0; s < n_e_; ++s) {
    for (std::size_t r = 0; r < n_r; ++r) {
      for (std::size_t o = 0; o < n_e_; ++o) {
        for (std::size_t t = 0; t < n_t_; ++t) {
          if (!truth(s, r, o, t)) continue;
          values_[((s * n_p_ + r) * n_e_ + o) * n_t_ + t] = 1.0;
          values_[((o * n_p_ + r + n_r) * n_e_ + s) * n_t_ + t] = 1.0;
        }
      }
    }
  }
}

double Order4Core::contract(std::span<const double> es, std::span<const double> er,
                            std::span<const double> eo, std::span<const double> et) const {
  if (es.size() != n_e_ || er.size() != n_p_ || eo.size() != n_e_ || et.size() != n_t_) {
    throw ShapeError("order-4 contraction: factor lengths do not match the core");
  }
  double total = 0.0;
  for (std::size_t p = 0; p < n_e_; ++p) {
    for (std::size_t k = 0; k < n_p_; ++k) {
      for (std::size_t q = 0; q < n_e_; ++q) {
        for (std::size_t r = 0; r < n_t_; ++r) {
          total += (*this)(p, k, q, r) * es[p] * er[k] * eo[q] * et[r];
        }
      }
    }
  }
  return total;
}

ModelParams<double> fold_into_tuckert(const Order4Core& m) {
  const std::size_t n_e = m.entities();
  const std::size_t n_p = m.predicates();
  const std::size_t n_t = m.timestamps();
  const std::size_t d = std::max(n_e, n_p * n_t);
  auto params =
      ModelParams<double>::zeros(ModelShape{n_e, n_p / 2, n_t, d}, ModelKind::TuckERT);
  for (std::size_t e = 0; e < n_e; ++e) params.entities(e, e) = 1.0;
  for (std::size_t r = 0; r < n_p; ++r) {
    for (std::size_t t = 0; t < n_t; ++t) {
      params.pred_temporal(r, r * n_t + t) = 1.0;
      params.times(t, r * n_t + t) = 1.0;
    }
  }
  for (std::size_t s = 0; s < n_e; ++s) {
    for (std::size_t r = 0; r < n_p; ++r) {
      for (std::size_t o = 0; o < n_e; ++o) {
        for (std::size_t t = 0; t < n_t; ++t) params.core(s, r * n_t + t, o) = m(s, r, o, t);
      }
    }
  }
  return params;
}

namespace {

std::vector<double> one_hot(std::size_t n, std::size_t i) {
  std::vector<double> v(n, 0.0);
  v[i] = 1.0;
  return v;
}

std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

ExpressivityReport run_expressivity_check(const TruthTable& truth, int threads) {
  const Order4Core core(truth);
  const std::size_t n_e = truth.entities;
  const std::size_t n_r = truth.relations;
  const std::size_t n_t = truth.timestamps;
  const std::size_t n_p = 2 * n_r;
  const ModelParams<double> folded = fold_into_tuckert(core);

  ExpressivityReport report;
  report.folded_matches = true;
  for (std::size_t s = 0; s < n_e; ++s) {
    for (std::size_t r = 0; r < n_p; ++r) {
      for (std::size_t o = 0; o < n_e; ++o) {
        for (std::size_t t = 0; t < n_t; ++t) {
          const bool holds = r < n_r ? truth(s, r, o, t) : truth(o, r - n_r, s, t);
          const double phi =
              core.contract(one_hot(n_e, s), one_hot(n_p, r), one_hot(n_e, o), one_hot(n_t, t));
          ++report.facts;
          if (phi == (holds ? 1.0 : -1.0)) ++report.separated;
          if (score(folded, s, r, o, t) != phi) report.folded_matches = false;
        }
      }
    }
  }

  // Rank every true fact in both directions with the folded model.
  QuadrupleDataset ds;
  ds.entities = Vocab(names("e", n_e));
  ds.predicates = Vocab(names("r", n_r));
  ds.timestamps = Vocab(names("", n_t));
  for (std::size_t s = 0; s < n_e; ++s) {
    for (std::size_t r = 0; r < n_r; ++r) {
      for (std::size_t o = 0; o < n_e; ++o) {
        for (std::size_t t = 0; t < n_t; ++t) {
          if (truth(s, r, o, t)) {
            ds.test.push_back(Quadruple{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(r),
                                        static_cast<std::uint32_t>(o),
                                        static_cast<std::uint32_t>(t)});
          }
        }
      }
    }
  }
  report.true_facts = ds.test.size();
  for (const auto& q : ds.test) {
    ds.filter[QueryKey{q.s, q.r, q.t}].push_back(q.o);
    const auto inv = reciprocal(q, n_r);
    ds.filter[QueryKey{inv.s, inv.r, inv.t}].push_back(inv.o);
  }
  report.ranking = evaluate(folded, ds.test, ds, TimeBinding::Predicate, Protocol::Filtered,
                            threads);

  const bool ranked_perfectly = report.true_facts == 0 || report.ranking.mrr == 1.0;
  report.passed = report.separated == report.facts && report.folded_matches && ranked_perfectly;
  return report;
}

}  // namespace tuckert
