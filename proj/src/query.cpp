#include "phonosearch/query.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace phonosearch {

namespace {

bool same_code(const phonetic::PhoneticCode& a, const phonetic::PhoneticCode& b) {
  return !a.empty() && a == b;
}

// Worst hit first, so a max-heap under this order keeps the worst on top.
struct RanksBefore {
  bool operator()(const std::pair<int, DataPointer>& a, const std::pair<int, DataPointer>& b) const {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  }
};
constexpr RanksBefore ranks_before;

constexpr std::size_t kLookahead = 4;

}  // namespace

Query Query::parse(std::string raw_text, std::size_t limit, int min_score) {
  Query query;
  query.tokens = phonetic::tokenize(raw_text);
  query.raw_text = std::move(raw_text);
  query.limit = limit;
  query.min_score = min_score;
  return query;
}

int match_level(const phonetic::Word& query_word, const phonetic::CodePair& query_codes,
                const phonetic::Word& record_word, const phonetic::CodePair& record_codes,
                const ScoringWeights& weights) {
  int level = 0;
  if (query_word == record_word) level = std::max(level, weights.exact);
  if (same_code(query_codes.primary, record_codes.primary)) level = std::max(level, weights.primary);
  if (same_code(query_codes.primary, record_codes.secondary) ||
      same_code(query_codes.secondary, record_codes.primary)) {
    level = std::max(level, weights.cross);
  }
  if (same_code(query_codes.secondary, record_codes.secondary)) level = std::max(level, weights.secondary);
  return level;
}

int to_percent(long long points, std::size_t tokens) {
  if (tokens == 0) return 0;
  const auto n = static_cast<long long>(tokens);
  return static_cast<int>((2 * points + n) / (2 * n));
}

int score(const Query& query, const Record& record, const ScoringWeights& weights,
          std::size_t max_code_length) {
  std::vector<std::pair<phonetic::Word, phonetic::CodePair>> record_tokens;
  for (const auto& field : record.fields) {
    for (auto& word : phonetic::tokenize(field)) {
      auto codes = phonetic::encode(word, max_code_length);
      record_tokens.emplace_back(std::move(word), std::move(codes));
    }
  }
  long long points = 0;
  for (const auto& query_word : query.tokens) {
    const auto query_codes = phonetic::encode(query_word, max_code_length);
    int best = 0;
    for (const auto& [record_word, record_codes] : record_tokens) {
      best = std::max(best, match_level(query_word, query_codes, record_word, record_codes, weights));
    }
    points += best;
  }
  return to_percent(points, query.tokens.size());
}

// A distinct query word with its codes resolved against the index.
struct QueryEngine::ResolvedToken {
  std::optional<WordId> word;
  std::optional<CodeId> primary;
  std::optional<CodeId> secondary;
  // False when the code is empty; empty codes never match phonetically.
  bool primary_matches = false;
  bool secondary_matches = false;
  int multiplicity = 0;
  // Highest level this word can reach against any indexed token.
  int upper_bound = 0;
  std::vector<const std::vector<Posting>*> lists;
  std::size_t list_length = 0;

  int level(const TokenRef& r, const ScoringWeights& w) const {
    int best = 0;
    if (word && *word == r.word) best = std::max(best, w.exact);
    if (primary_matches && *primary == r.primary) best = std::max(best, w.primary);
    if ((primary_matches && *primary == r.secondary) || (secondary_matches && *secondary == r.primary)) {
      best = std::max(best, w.cross);
    }
    if (secondary_matches && *secondary == r.secondary) best = std::max(best, w.secondary);
    return best;
  }
};

QueryEngine::QueryEngine(const PhoneticIndex& index, const RecordStore& store, Options options)
    : index_(index), store_(store), options_(options) {}

std::vector<QueryEngine::ResolvedToken> QueryEngine::resolve(const Query& query) const {
  std::map<std::string, int> counts;
  for (const auto& word : query.tokens) ++counts[word.text()];

  const ScoringWeights& w = options_.weights;
  std::vector<ResolvedToken> tokens;
  tokens.reserve(counts.size());
  for (const auto& [text, count] : counts) {
    const auto word = *phonetic::Word::from_normalized(text);
    const phonetic::CodePair codes = index_.codes_for(word);

    ResolvedToken token;
    token.multiplicity = count;
    token.word = index_.find_word_id(text);
    token.primary = index_.find_code(codes.primary.key());
    token.secondary = index_.find_code(codes.secondary.key());
    token.primary_matches = token.primary && !codes.primary.empty();
    token.secondary_matches = token.secondary && !codes.secondary.empty();
    const bool word_live = token.word && index_.word(*token.word).live_tokens > 0;

    for (const auto& id : {token.primary, token.secondary}) {
      if (!id) continue;
      const auto& postings = index_.code(*id).postings;
      if (std::find(token.lists.begin(), token.lists.end(), &postings) != token.lists.end()) continue;
      token.lists.push_back(&postings);
      token.list_length += postings.size();
      if (postings.empty()) continue;
      // Any record filed here shares this code with the query word; bound the
      // level by every category the shared code could satisfy.
      const bool is_primary = id == token.primary;
      const bool is_secondary = id == token.secondary;
      if (is_primary && word_live) token.upper_bound = std::max(token.upper_bound, w.exact);
      if (is_primary && token.primary_matches) {
        token.upper_bound = std::max({token.upper_bound, w.primary, w.cross});
      }
      if (is_secondary && token.secondary_matches) {
        token.upper_bound = std::max({token.upper_bound, w.cross, w.secondary});
      }
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

long long QueryEngine::record_points(const std::vector<ResolvedToken>& tokens,
                                     std::span<const TokenRef> record) const {
  const ScoringWeights& w = options_.weights;
  long long points = 0;
  for (const auto& token : tokens) {
    int best = 0;
    for (const TokenRef& r : record) best = std::max(best, token.level(r, w));
    points += static_cast<long long>(best) * token.multiplicity;
  }
  return points;
}

CandidateSet QueryEngine::candidates(const Query& query) const {
  CandidateSet result;
  if (query.tokens.empty()) {
    result.no_searchable_terms = true;
    return result;
  }
  for (const auto& token : resolve(query)) {
    for (const auto* list : token.lists) {
      for (const auto& posting : *list) result.pointers.push_back(posting.pointer);
    }
  }
  std::sort(result.pointers.begin(), result.pointers.end());
  result.pointers.erase(std::unique(result.pointers.begin(), result.pointers.end()), result.pointers.end());
  return result;
}

ResultSet QueryEngine::finish(const Query& query, std::vector<std::pair<int, DataPointer>> ranked,
                              SearchStats stats) const {
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  if (ranked.size() > query.limit) ranked.resize(query.limit);
  ResultSet result;
  result.query = query;
  result.stats = stats;
  // Gather first so the row lookups, which mostly miss cache on large
  // stores, overlap instead of queueing behind each copy.
  std::vector<const std::vector<std::string>*> rows(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    rows[i] = store_.find(ranked[i].second);
    if (rows[i]) __builtin_prefetch(rows[i]->data());
  }
  result.hits.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (rows[i]) {
      result.hits.push_back(RankedHit{ranked[i].second, ranked[i].first, Record{ranked[i].second, *rows[i]}});
    }
  }
  return result;
}

ResultSet QueryEngine::scan(const Query& query) const {
  if (query.tokens.empty()) return ResultSet{query, {}, true, {}};
  const auto tokens = resolve(query);
  const int floor = std::max(query.min_score, 1);
  SearchStats stats;
  std::vector<std::pair<int, DataPointer>> ranked;
  store_.for_each([&](const DataPointer& pointer, const std::vector<std::string>&) {
    const auto record = index_.tokens_of(pointer);
    ++stats.records_scored;
    const int percent = to_percent(record_points(tokens, record.value_or(std::span<const TokenRef>())),
                                   query.tokens.size());
    if (percent >= floor) ranked.emplace_back(percent, pointer);
  });
  return finish(query, std::move(ranked), stats);
}

ResultSet QueryEngine::search(const Query& query) const {
  if (query.tokens.empty()) return ResultSet{query, {}, true, {}};
  const auto tokens = resolve(query);
  const std::size_t token_count = query.tokens.size();
  const int floor = std::max(query.min_score, 1);
  SearchStats stats;

  auto percent_of = [&](const DataPointer& pointer) {
    const auto record = index_.tokens_of(pointer);
    ++stats.records_scored;
    return record ? to_percent(record_points(tokens, *record), token_count) : 0;
  };

  if (!options_.prune) {
    std::vector<std::pair<int, DataPointer>> ranked;
    for (const auto& token : tokens) {
      for (const auto* list : token.lists) stats.postings_visited += list->size();
    }
    for (const auto& pointer : candidates(query).pointers) {
      const int percent = percent_of(pointer);
      if (percent >= floor) ranked.emplace_back(percent, pointer);
    }
    return finish(query, std::move(ranked), stats);
  }

  if (query.limit == 0) return finish(query, {}, stats);

  // Document-at-a-time over pointer-sorted posting lists, keeping the best
  // `limit` hits in a heap. Pointers arrive in ascending order, so once the
  // heap is full a newcomer must score strictly above the worst kept hit.
  // Any record whose only query words lie in a "non-essential" subset of
  // tokens is bounded by that subset's summed upper bounds; when that bound
  // cannot beat the threshold those lists are no longer walked.
  std::vector<std::pair<int, DataPointer>> heap;
  int threshold = floor - 1;

  const std::size_t groups = tokens.size();
  std::vector<std::size_t> positions;
  std::vector<const std::vector<Posting>*> lists;
  std::vector<std::size_t> list_group;
  for (std::size_t g = 0; g < groups; ++g) {
    for (const auto* list : tokens[g].lists) {
      lists.push_back(list);
      list_group.push_back(g);
      positions.push_back(0);
    }
  }
  std::vector<bool> essential(groups, true);
  std::vector<std::size_t> active;

  auto contribution = [&](std::size_t g) {
    return static_cast<long long>(tokens[g].upper_bound) * tokens[g].multiplicity;
  };

  // Picks the non-essential set with the most postings whose combined bound
  // stays at or below the threshold. Returns false when no record can beat it.
  auto choose_essential = [&]() {
    long long total = 0;
    for (std::size_t g = 0; g < groups; ++g) total += contribution(g);
    if (to_percent(total, token_count) <= threshold) return false;

    std::vector<bool> skip(groups, false);
    if (groups <= 10) {
      std::size_t best_length = 0;
      std::uint32_t best_mask = 0;
      for (std::uint32_t mask = 1; mask < (1u << groups); ++mask) {
        long long bound = 0;
        std::size_t length = 0;
        for (std::size_t g = 0; g < groups; ++g) {
          if (mask & (1u << g)) {
            bound += contribution(g);
            length += tokens[g].list_length;
          }
        }
        if (to_percent(bound, token_count) <= threshold && length > best_length) {
          best_length = length;
          best_mask = mask;
        }
      }
      for (std::size_t g = 0; g < groups; ++g) skip[g] = best_mask & (1u << g);
    } else {
      std::vector<std::size_t> order(groups);
      for (std::size_t g = 0; g < groups; ++g) order[g] = g;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tokens[a].list_length * static_cast<std::size_t>(contribution(b) + 1) >
               tokens[b].list_length * static_cast<std::size_t>(contribution(a) + 1);
      });
      long long bound = 0;
      for (std::size_t g : order) {
        if (to_percent(bound + contribution(g), token_count) <= threshold) {
          bound += contribution(g);
          skip[g] = true;
        }
      }
    }
    active.clear();
    for (std::size_t l = 0; l < lists.size(); ++l) {
      if (!skip[list_group[l]]) active.push_back(l);
    }
    return true;
  };

  if (!choose_essential()) return finish(query, {}, stats);

  std::optional<DataPointer> last;
  while (true) {
    std::optional<DataPointer> next;
    for (std::size_t l : active) {
      const auto& list = *lists[l];
      std::size_t& pos = positions[l];
      if (last) {
        // Lists re-activated after being skipped may lag behind.
        while (pos < list.size() && list[pos].pointer <= *last) {
          ++pos;
          ++stats.postings_visited;
        }
      }
      if (pos < list.size() && (!next || list[pos].pointer < *next)) next = list[pos].pointer;
      // Records a few postings ahead are likely scored soon; start fetching.
      if (pos + kLookahead < list.size()) index_.prefetch_tokens(list[pos + kLookahead].pointer);
    }
    if (!next) break;
    last = next;

    const int percent = percent_of(*next);
    if (percent <= threshold) continue;
    heap.emplace_back(percent, *next);
    std::push_heap(heap.begin(), heap.end(), ranks_before);
    if (heap.size() > query.limit) {
      std::pop_heap(heap.begin(), heap.end(), ranks_before);
      heap.pop_back();
    }
    if (heap.size() == query.limit && heap.front().first > threshold) {
      threshold = heap.front().first;
      if (!choose_essential()) break;
    }
  }
  return finish(query, std::move(heap), stats);
}

}  // namespace phonosearch
