#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tuckert {

/// One line of a quadruple TSV before indexing.
struct RawFact {
  std::string subject;
  std::string predicate;
  std::string object;
  std::string timestamp;

  friend bool operator==(const RawFact&, const RawFact&) = default;
};

struct Quadruple {
  std::uint32_t s = 0;
  std::uint32_t r = 0;
  std::uint32_t o = 0;
  std::uint32_t t = 0;

  friend bool operator==(const Quadruple&, const Quadruple&) = default;
  friend auto operator<=>(const Quadruple&, const Quadruple&) = default;
};

/// Bijection between tokens and dense indices [0, size).
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::uint32_t index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Key of the time-aware filter: every object known true for (s, r, t).
struct QueryKey {
  std::uint32_t s = 0;
  std::uint32_t r = 0;
  std::uint32_t t = 0;
  friend bool operator==(const QueryKey&, const QueryKey&) = default;
};

struct QueryKeyHash {
  std::size_t operator()(const QueryKey& k) const noexcept {
    std::uint64_t h = k.s;
    h = h * 0x9E3779B97F4A7C15ULL ^ k.r;
    h = h * 0x9E3779B97F4A7C15ULL ^ k.t;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Sorted, deduplicated true objects per (s, r, t), both directions.
using FilterIndex = std::unordered_map<QueryKey, std::vector<std::uint32_t>, QueryKeyHash>;

struct QuadrupleDataset {
  Vocab entities;
  Vocab predicates;  ///< Raw predicates only; reciprocal of r is r + predicates.size().
  Vocab timestamps;  ///< Chronological order.

  std::vector<Quadruple> train;  ///< Raw training facts followed by their reciprocals.
  std::vector<Quadruple> valid;  ///< Raw.
  std::vector<Quadruple> test;   ///< Raw.
  FilterIndex filter;

  std::size_t num_entities() const noexcept { return entities.size(); }
  std::size_t num_relations() const noexcept { return predicates.size(); }
  std::size_t num_timestamps() const noexcept { return timestamps.size(); }
  std::size_t raw_train_size() const noexcept { return train.size() / 2; }

  /// Objects known true for (s, r, t); empty span if none.
  std::span<const std::uint32_t> known_objects(std::uint32_t s, std::uint32_t r,
                                               std::uint32_t t) const;
};

/// Reads `subject \t predicate \t object \t timestamp [\t ...]` lines.
std::vector<RawFact> load_tsv(const std::filesystem::path& path);
std::vector<RawFact> parse_tsv(std::string_view text, std::string_view source_name = "<memory>");

/// Sort key of a timestamp token: days since 1970-01-01 for YYYY-MM-DD, or
/// the integer itself for a non-negative integer token.
std::int64_t timestamp_order_key(std::string_view token);

QuadrupleDataset build_dataset(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                               const std::vector<RawFact>& test);

/// Loads `<dir>/train`, `<dir>/valid`, `<dir>/test` (a `.txt` or `.tsv`
/// suffix is also accepted).
QuadrupleDataset load_dataset(const std::filesystem::path& dir);

/// (o, r + n_r, s, t).
Quadruple reciprocal(const Quadruple& q, std::size_t num_relations);

/// One epoch of shuffled mini-batches over a fact list.
class BatchSchedule {
 public:
  BatchSchedule(std::span<const Quadruple> facts, std::size_t batch_size, std::uint64_t epoch_seed);

  std::size_t num_batches() const noexcept;
  std::span<const Quadruple> batch(std::size_t i) const;
  std::span<const Quadruple> order() const noexcept { return order_; }

 private:
  std::vector<Quadruple> order_;
  std::size_t batch_size_;
};

/// Seed of epoch `epoch` for a run seeded with `run_seed`.
std::uint64_t epoch_seed(std::uint64_t run_seed, std::uint64_t epoch);

}  // namespace tuckert
