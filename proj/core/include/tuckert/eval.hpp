#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include "tuckert/data.hpp"
#include "tuckert/model.hpp"
#include "tuckert/tensor.hpp"

namespace tuckert {

enum class Protocol { Raw, Filtered };

std::string_view to_string(Protocol protocol);
Protocol parse_protocol(std::string_view text);

struct RankingReport {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  Protocol protocol = Protocol::Filtered;
  std::size_t query_count = 0;
};

/// Average-rank position of the true candidate: 1 + #greater + #ties / 2,
/// ignoring every index in `filtered_out` (which must not contain the truth).
double rank_of_true(std::span<const double> scores, std::size_t true_index,
                    std::span<const std::uint32_t> filtered_out = {});

/// Scores every entity as the object of (s, r, ?, t).
using ObjectScorer = std::function<DenseVector(std::uint32_t s, std::uint32_t r, std::uint32_t t)>;

/// Ranks both directions of every fact: (s, r, ?, t) -> o and, through the
/// reciprocal predicate, (o, r + num_relations, ?, t) -> s. The filtered
/// protocol drops every other known object for the same (s, r, t).
/// Per-query reciprocal ranks are summed in query order, so the report does
/// not depend on `threads`.
RankingReport evaluate_queries(std::span<const Quadruple> facts, std::size_t num_relations,
                               const FilterIndex* filter, Protocol protocol,
                               const ObjectScorer& scorer, int threads = 1);

template <class Real>
RankingReport evaluate(const ModelParams<Real>& params, std::span<const Quadruple> facts,
                       const QuadrupleDataset& dataset, TimeBinding binding, Protocol protocol,
                       int threads = 1);

}  // namespace tuckert
