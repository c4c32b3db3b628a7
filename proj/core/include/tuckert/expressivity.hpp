#pragma once

#include <cstdint>
#include <vector>

#include "tuckert/data.hpp"
#include "tuckert/eval.hpp"
#include "tuckert/model.hpp"

namespace tuckert {

/// Truth assignment over every (s, r, o, t) with raw predicates, indexed
/// ((s * n_r + r) * n_e + o) * n_t + t.
struct TruthTable {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t timestamps = 0;
  std::vector<bool> holds;

  std::size_t index(std::size_t s, std::size_t r, std::size_t o, std::size_t t) const {
    return ((s * relations + r) * entities + o) * timestamps + t;
  }
  bool operator()(std::size_t s, std::size_t r, std::size_t o, std::size_t t) const {
    return holds[index(s, r, o, t)];
  }

  static TruthTable random(std::size_t n_e, std::size_t n_r, std::size_t n_t, std::uint64_t seed,
                           double density = 0.5);
  static TruthTable constant(std::size_t n_e, std::size_t n_r, std::size_t n_t, bool value);
};

/// Explicit order-4 core over (entity, predicate incl. reciprocals, entity,
/// timestamp) with +1 on true facts and -1 elsewhere.
class Order4Core {
 public:
  explicit Order4Core(const TruthTable& truth);

  std::size_t entities() const noexcept { return n_e_; }
  std::size_t predicates() const noexcept { return n_p_; }
  std::size_t timestamps() const noexcept { return n_t_; }
  double operator()(std::size_t s, std::size_t r, std::size_t o, std::size_t t) const {
    return values_[((s * n_p_ + r) * n_e_ + o) * n_t_ + t];
  }

  /// <M; e_s, e_r, e_o, e_t> by a full four-way sum.
  double contract(std::span<const double> es, std::span<const double> er,
                  std::span<const double> eo, std::span<const double> et) const;

 private:
  std::size_t n_e_, n_p_, n_t_;
  std::vector<double> values_;
};

/// The order-4 core folded into a TuckERT model (predicate binding): entity
/// rows are one-hot, e_r and e_t are block indicators whose product is
/// one-hot at (r, t), and the order-3 core carries M on those slots.
ModelParams<double> fold_into_tuckert(const Order4Core& core);

struct ExpressivityReport {
  std::size_t facts = 0;       ///< Scored 4-tuples, both predicate directions.
  std::size_t true_facts = 0;  ///< Raw true facts.
  std::size_t separated = 0;   ///< Tuples scoring exactly +1 if true, -1 if false.
  bool folded_matches = false; ///< Folded TuckERT scores equal the order-4 scores.
  RankingReport ranking;       ///< Filtered, over the true facts; query_count 0 if none.
  bool passed = false;
};

ExpressivityReport run_expressivity_check(const TruthTable& truth, int threads = 1);

}  // namespace tuckert
