#include "tuckert/eval.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "tuckert/errors.hpp"
#include "tuckert/parallel.hpp"

namespace tuckert {

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::Raw ? "raw" : "filtered";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "raw") return Protocol::Raw;
  if (text == "filtered") return Protocol::Filtered;
  throw ConfigError("unknown protocol '" + std::string(text) + "' (expected raw or filtered)");
}

double rank_of_true(std::span<const double> scores, std::size_t true_index,
                    std::span<const std::uint32_t> filtered_out) {
  if (true_index >= scores.size()) {
    throw IndexError("rank_of_true: true index " + std::to_string(true_index) +
                     " out of range for " + std::to_string(scores.size()) + " scores");
  }
  const double target = scores[true_index];
  std::size_t greater = 0;
  std::size_t ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == true_index) continue;
    if (scores[i] > target) {
      ++greater;
    } else if (scores[i] == target) {
      ++ties;
    }
  }
  for (std::uint32_t idx : filtered_out) {
    if (idx >= scores.size()) throw IndexError("rank_of_true: filtered index out of range");
    if (idx == true_index) throw IndexError("rank_of_true: true index is filtered out");
    if (scores[idx] > target) {
      --greater;
    } else if (scores[idx] == target) {
      --ties;
    }
  }
  return 1.0 + static_cast<double>(greater) + 0.5 * static_cast<double>(ties);
}

RankingReport evaluate_queries(std::span<const Quadruple> facts, std::size_t num_relations,
                               const FilterIndex* filter, Protocol protocol,
                               const ObjectScorer& scorer, int threads) {
  if (protocol == Protocol::Filtered && filter == nullptr) {
    throw ConfigError("filtered evaluation needs a filter index");
  }
  const std::size_t queries = 2 * facts.size();
  std::vector<double> ranks(queries, 0.0);

  parallel_for(queries, threads, [&](std::size_t begin, std::size_t end, int) {
    std::vector<std::uint32_t> others;
    for (std::size_t qi = begin; qi < end; ++qi) {
      const Quadruple& f = facts[qi / 2];
      const Quadruple q = qi % 2 == 0 ? f : reciprocal(f, num_relations);
      const DenseVector scores = scorer(q.s, q.r, q.t);
      others.clear();
      if (protocol == Protocol::Filtered) {
        auto it = filter->find(QueryKey{q.s, q.r, q.t});
        if (it != filter->end()) {
          for (std::uint32_t o : it->second) {
            if (o != q.o) others.push_back(o);
          }
        }
      }
      ranks[qi] = rank_of_true(scores, q.o, others);
    }
  });

  RankingReport report;
  report.protocol = protocol;
  report.query_count = queries;
  if (queries == 0) return report;
  for (double rank : ranks) {
    report.mrr += 1.0 / rank;
    report.hits1 += rank <= 1.0 ? 1.0 : 0.0;
    report.hits3 += rank <= 3.0 ? 1.0 : 0.0;
    report.hits10 += rank <= 10.0 ? 1.0 : 0.0;
  }
  const double inv = 1.0 / static_cast<double>(queries);
  report.mrr *= inv;
  report.hits1 *= inv;
  report.hits3 *= inv;
  report.hits10 *= inv;
  return report;
}

template <class Real>
RankingReport evaluate(const ModelParams<Real>& params, std::span<const Quadruple> facts,
                       const QuadrupleDataset& dataset, TimeBinding binding, Protocol protocol,
                       int threads) {
  if (params.shape.entities != dataset.num_entities() ||
      params.shape.relations != dataset.num_relations() ||
      params.shape.timestamps != dataset.num_timestamps()) {
    throw DataError("model vocabulary sizes do not match the dataset");
  }
  return evaluate_queries(
      facts, dataset.num_relations(), &dataset.filter, protocol,
      [&](std::uint32_t s, std::uint32_t r, std::uint32_t t) {
        return score_objects(params, s, r, t, binding);
      },
      threads);
}

template RankingReport evaluate<float>(const ModelParams<float>&, std::span<const Quadruple>,
                                       const QuadrupleDataset&, TimeBinding, Protocol, int);
template RankingReport evaluate<double>(const ModelParams<double>&, std::span<const Quadruple>,
                                        const QuadrupleDataset&, TimeBinding, Protocol, int);

}  // namespace tuckert
