#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace phonosearch::bench {

// splitmix64. Spelled out rather than using <random> distributions, whose
// output differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  // True with probability percent / 100.
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::uint64_t state_;
};

struct District {
  std::string_view name;
  std::string_view division;
};

struct Pools {
  std::vector<std::string_view> given_names;
  std::vector<std::string_view> surnames;
  std::vector<District> districts;
  std::vector<std::string_view> upazilas;
  std::vector<std::string_view> unions;
  std::vector<std::string_view> villages;
  std::vector<std::string_view> occupations;
  // Rare given names are four of these glued together.
  std::vector<std::string_view> syllables;
};

// Romanized Bangla names and the 64 districts with their divisions.
const Pools& default_pools();

struct CorpusSpec {
  std::size_t record_count = 0;
  std::uint64_t seed = 0;
  // Percent of records whose given name is synthesized from syllables
  // instead of drawn from the common pool.
  unsigned rare_name_percent = 30;
  // Percent of names that carry a surname.
  unsigned surname_percent = 50;
};

// Citizen rows: name, division, district, upazila, union, village,
// occupation, phone. Identical specs give identical streams.
class CorpusGenerator {
 public:
  explicit CorpusGenerator(CorpusSpec spec, const Pools& pools = default_pools());

  bool done() const noexcept { return produced_ == spec_.record_count; }
  std::vector<std::string> next();

 private:
  CorpusSpec spec_;
  const Pools& pools_;
  Rng rng_;
  std::size_t produced_ = 0;
};

std::vector<std::vector<std::string>> generate(const CorpusSpec& spec);

std::string rare_name(Rng& rng, const Pools& pools = default_pools());

// Drops or swaps one character, never the first.
std::string misspell(std::string_view word, Rng& rng);

enum class QueryKind { kSelective, kBroad, kMisspelled };

std::string_view to_string(QueryKind kind);

struct BenchQuery {
  std::string text;
  QueryKind kind = QueryKind::kSelective;

  bool operator==(const BenchQuery&) const = default;
};

// 70% rare name + district, 20% district only, 10% selective with the name
// misspelled. Names and districts are taken from records in `corpus`.
std::vector<BenchQuery> make_queries(const std::vector<std::vector<std::string>>& corpus, std::size_t count,
                                     std::uint64_t seed);

struct QueryMeasurement {
  BenchQuery query;
  double indexed_us = 0;
  double linear_us = 0;
  std::size_t candidates = 0;
  std::size_t indexed_comparisons = 0;
  std::size_t linear_comparisons = 0;
  std::size_t hits = 0;
  bool results_equal = false;
};

struct BenchResult {
  std::size_t n = 0;
  double build_ms = 0;
  double indexed_mean_us = 0;
  double indexed_median_us = 0;
  double indexed_p99_us = 0;
  double linear_mean_us = 0;
  double mean_candidates = 0;
  double indexed_comparisons = 0;  // mean per query
  double linear_comparisons = 0;   // mean per query
  std::size_t queries = 0;
  // Queries with indexed comparisons <= linear, and strictly fewer.
  std::size_t dominated = 0;
  std::size_t strictly_dominated = 0;
  // Queries where indexed and linear hits agree exactly.
  std::size_t equal_results = 0;
  std::vector<QueryMeasurement> per_query;
};

struct RunOptions {
  std::vector<std::size_t> sizes = {1000, 10000, 100000};
  std::size_t queries = 200;
  std::uint64_t seed = 42;
  std::size_t limit = 50;
  // Timed passes over the query list for the indexed engine, rotating
  // through the sizes; the median over passes is taken per query. The
  // linear scan runs once.
  std::size_t indexed_passes = 7;
  std::function<void(const BenchResult&)> on_result;
};

// Builds every size before timing, so all corpora are in memory at once.
// Throws ValidationError unless sizes are positive and ascending.
std::vector<BenchResult> run(const RunOptions& options);

// n,indexed_mean_us,linear_mean_us,indexed_comparisons,linear_comparisons
void write_csv(std::ostream& out, const std::vector<BenchResult>& results);

// gnuplot script plotting both latency curves from `csv_path`.
void write_gnuplot(std::ostream& out, const std::string& csv_path);

}  // namespace phonosearch::bench
