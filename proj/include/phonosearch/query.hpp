#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phonosearch/index.hpp"
#include "phonosearch/phonetic.hpp"
#include "phonosearch/record_store.hpp"

namespace phonosearch {

inline constexpr std::size_t kDefaultResultLimit = 50;

// Match level of one query token against one record token, in percentage
// points. A token's level is the best it reaches against any token of the
// record; a record's score is the rounded mean over query tokens.
struct ScoringWeights {
  int exact = 100;      // same normalized spelling
  int primary = 90;     // primary codes equal
  int cross = 75;       // one side's primary equals the other's secondary
  int secondary = 60;   // secondary codes equal
};

struct Query {
  std::string raw_text;
  std::vector<phonetic::Word> tokens;
  std::size_t limit = kDefaultResultLimit;
  // Hits scoring below this are dropped. Zero-score records never appear.
  int min_score = 0;

  static Query parse(std::string raw_text, std::size_t limit = kDefaultResultLimit, int min_score = 0);
};

struct RankedHit {
  DataPointer pointer;
  int score_percent = 0;
  Record matched_record;

  friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

struct SearchStats {
  // Records whose score was computed ("comparisons").
  std::size_t records_scored = 0;
  std::size_t postings_visited = 0;
};

struct ResultSet {
  Query query;
  // Score descending, then pointer ascending.
  std::vector<RankedHit> hits;
  bool no_searchable_terms = false;
  SearchStats stats;
};

struct CandidateSet {
  std::vector<DataPointer> pointers;  // ascending
  bool no_searchable_terms = false;
};

// Level of `query_word` against `record_word` under `weights`. Empty codes
// never match each other; such tokens match on exact spelling only.
int match_level(const phonetic::Word& query_word, const phonetic::CodePair& query_codes,
                const phonetic::Word& record_word, const phonetic::CodePair& record_codes,
                const ScoringWeights& weights = {});

// Reference scorer: tokenizes and encodes the record from scratch.
int score(const Query& query, const Record& record, const ScoringWeights& weights = {},
          std::size_t max_code_length = phonetic::kDefaultMaxCodeLength);

// Round-half-up of points / tokens, the percentage for a summed level.
int to_percent(long long points, std::size_t tokens);

// Answers queries against an index and the store it mirrors. Holds
// references only; callers keep both alive and unmodified while a call runs.
class QueryEngine {
 public:
  struct Options {
    ScoringWeights weights;
    // When false every candidate is scored. When true candidates that
    // provably cannot enter the top `limit` are skipped; results are the same.
    bool prune = true;
  };

  QueryEngine(const PhoneticIndex& index, const RecordStore& store, Options options);
  QueryEngine(const PhoneticIndex& index, const RecordStore& store)
      : QueryEngine(index, store, Options{}) {}

  // Union over query tokens of the postings under their primary and
  // secondary codes. Never touches the record store.
  CandidateSet candidates(const Query& query) const;

  ResultSet search(const Query& query) const;

  // Linear baseline: scores every indexed record, no domain reduction.
  ResultSet scan(const Query& query) const;

  const Options& options() const noexcept { return options_; }

 private:
  struct ResolvedToken;
  std::vector<ResolvedToken> resolve(const Query& query) const;
  long long record_points(const std::vector<ResolvedToken>& tokens, std::span<const TokenRef> record) const;
  ResultSet finish(const Query& query, std::vector<std::pair<int, DataPointer>> ranked, SearchStats stats) const;

  const PhoneticIndex& index_;
  const RecordStore& store_;
  Options options_;
};

}  // namespace phonosearch
