#include "tuckert/data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "tuckert/errors.hpp"

namespace tuckert {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::uint32_t Vocab::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw IndexError("unknown token '" + std::string(token) + "'");
  return it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::span<const std::uint32_t> QuadrupleDataset::known_objects(std::uint32_t s, std::uint32_t r,
                                                               std::uint32_t t) const {
  auto it = filter.find(QueryKey{s, r, t});
  if (it == filter.end()) return {};
  return it->second;
}

namespace {

bool parse_uint(std::string_view text, std::int64_t& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && out >= 0;
}

bool parse_iso_date(std::string_view text, std::int64_t& days) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  std::int64_t y = 0, m = 0, d = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d)) {
    return false;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{static_cast<int>(y)}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  days = sys_days{ymd}.time_since_epoch().count();
  return true;
}

enum class StampFormat { Date, Integer };

std::optional<StampFormat> stamp_format(std::string_view token) {
  std::int64_t unused = 0;
  if (parse_iso_date(token, unused)) return StampFormat::Date;
  if (parse_uint(token, unused)) return StampFormat::Integer;
  return std::nullopt;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::int64_t timestamp_order_key(std::string_view token) {
  std::int64_t key = 0;
  if (parse_iso_date(token, key) || parse_uint(token, key)) return key;
  throw DataError("timestamp '" + std::string(token) +
                  "' is neither YYYY-MM-DD nor a non-negative integer");
}

std::vector<RawFact> parse_tsv(std::string_view text, std::string_view source_name) {
  std::vector<RawFact> facts;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim_cr(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::string_view fields[4];
    std::size_t count = 0;
    std::string_view rest = line;
    while (count < 4) {
      const auto tab = rest.find('\t');
      fields[count++] = rest.substr(0, tab);
      if (tab == std::string_view::npos) break;
      rest = rest.substr(tab + 1);
    }
    auto where = [&] { return std::string(source_name) + ":" + std::to_string(line_no); };
    if (count < 4) {
      throw DataError(where() + ": expected 4 tab-separated fields, found " +
                      std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw DataError(where() + ": empty field");
    }
    if (!stamp_format(fields[3])) {
      throw DataError(where() + ": bad timestamp '" + std::string(fields[3]) + "'");
    }
    facts.push_back(RawFact{std::string(fields[0]), std::string(fields[1]), std::string(fields[2]),
                            std::string(fields[3])});
  }
  if (facts.empty()) throw DataError(std::string(source_name) + ": no facts");
  return facts;
}

std::vector<RawFact> load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tsv(buf.str(), path.string());
}

Quadruple reciprocal(const Quadruple& q, std::size_t num_relations) {
  return Quadruple{q.o, static_cast<std::uint32_t>(q.r + num_relations), q.s, q.t};
}

QuadrupleDataset build_dataset(const std::vector<RawFact>& train, const std::vector<RawFact>& valid,
                               const std::vector<RawFact>& test) {
  if (train.empty()) throw DataError("training split is empty");

  std::set<std::string> entity_set;
  std::set<std::string> predicate_set;
  std::set<std::string> stamp_set;
  std::optional<StampFormat> format;
  for (const auto* split : {&train, &valid, &test}) {
    for (const auto& f : *split) {
      entity_set.insert(f.subject);
      entity_set.insert(f.object);
      predicate_set.insert(f.predicate);
      if (stamp_set.insert(f.timestamp).second) {
        const auto this_format = stamp_format(f.timestamp);
        if (!this_format) throw DataError("bad timestamp '" + f.timestamp + "'");
        if (format && *format != *this_format) {
          throw DataError("mixed timestamp formats (dates and integers) in one dataset");
        }
        format = this_format;
      }
    }
  }

  std::vector<std::string> stamps(stamp_set.begin(), stamp_set.end());
  std::stable_sort(stamps.begin(), stamps.end(), [](const auto& a, const auto& b) {
    return timestamp_order_key(a) < timestamp_order_key(b);
  });

  QuadrupleDataset ds;
  ds.entities = Vocab({entity_set.begin(), entity_set.end()});
  ds.predicates = Vocab({predicate_set.begin(), predicate_set.end()});
  ds.timestamps = Vocab(std::move(stamps));

  auto index = [&](const RawFact& f) {
    return Quadruple{ds.entities.index_of(f.subject), ds.predicates.index_of(f.predicate),
                     ds.entities.index_of(f.object), ds.timestamps.index_of(f.timestamp)};
  };
  const std::size_t n_r = ds.num_relations();

  ds.train.reserve(2 * train.size());
  for (const auto& f : train) ds.train.push_back(index(f));
  for (std::size_t i = 0; i < train.size(); ++i) ds.train.push_back(reciprocal(ds.train[i], n_r));
  ds.valid.reserve(valid.size());
  for (const auto& f : valid) ds.valid.push_back(index(f));
  ds.test.reserve(test.size());
  for (const auto& f : test) ds.test.push_back(index(f));

  auto add = [&](const Quadruple& q) { ds.filter[QueryKey{q.s, q.r, q.t}].push_back(q.o); };
  for (const auto& q : ds.train) add(q);
  for (const auto* split : {&ds.valid, &ds.test}) {
    for (const auto& q : *split) {
      add(q);
      add(reciprocal(q, n_r));
    }
  }
  for (auto& [key, objects] : ds.filter) {
    std::sort(objects.begin(), objects.end());
    objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
  }
  return ds;
}

namespace {

std::filesystem::path find_split(const std::filesystem::path& dir, const std::string& name) {
  for (const char* suffix : {"", ".txt", ".tsv"}) {
    auto p = dir / (name + suffix);
    if (std::filesystem::is_regular_file(p)) return p;
  }
  throw DataError("missing split '" + name + "' in " + dir.string());
}

}  // namespace

QuadrupleDataset load_dataset(const std::filesystem::path& dir) {
  return build_dataset(load_tsv(find_split(dir, "train")), load_tsv(find_split(dir, "valid")),
                       load_tsv(find_split(dir, "test")));
}

BatchSchedule::BatchSchedule(std::span<const Quadruple> facts, std::size_t batch_size,
                             std::uint64_t epoch_seed)
    : order_(facts.begin(), facts.end()), batch_size_(batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(order_.begin(), order_.end(), rng);
}

std::size_t BatchSchedule::num_batches() const noexcept {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::span<const Quadruple> BatchSchedule::batch(std::size_t i) const {
  const std::size_t begin = i * batch_size_;
  if (begin >= order_.size()) throw IndexError("batch index out of range");
  const std::size_t len = std::min(batch_size_, order_.size() - begin);
  return std::span<const Quadruple>(order_).subspan(begin, len);
}

std::uint64_t epoch_seed(std::uint64_t run_seed, std::uint64_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace tuckert
