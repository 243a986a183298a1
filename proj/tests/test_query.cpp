#include <doctest.h>

#include <algorithm>

#include "oracle.hpp"
#include "phonosearch/index.hpp"
#include "phonosearch/query.hpp"
#include "test_util.hpp"

using namespace phonosearch;

namespace {

struct Fixture {
  TableRegistry registry;
  RecordStore store;
  PhoneticIndex index{registry};

  Fixture() {
    registry.register_table(citizen_table());
    store.open_table(citizen_table());
  }

  DataPointer add(std::vector<std::string> values) {
    const auto pointer = store.insert(0, std::move(values));
    index.index_record(*store.retrieve(pointer));
    return pointer;
  }

  void remove(const DataPointer& p) {
    store.remove(p);
    index.deindex_record(p);
  }
};

}  // namespace

TEST_CASE("to_percent rounds halves up") {
  CHECK(to_percent(190, 2) == 95);
  CHECK(to_percent(100, 2) == 50);
  CHECK(to_percent(75 + 60, 2) == 68);  // 67.5
  CHECK(to_percent(100 + 90 + 90, 3) == 93);
  CHECK(to_percent(0, 3) == 0);
  CHECK(to_percent(5, 0) == 0);
}

TEST_CASE("abdullah khuln scores 95") {
  const auto query = Query::parse("Abdullah khuln");
  REQUIRE(query.tokens.size() == 2);
  CHECK(score(query, Record{DataPointer{0, 1}, testutil::abdullah_row()}) == 95);
  CHECK(score(Query::parse("abdullah KHULNA"), Record{{0, 1}, testutil::abdullah_row()}) == 100);
  CHECK(score(Query::parse("zzzzqqq"), Record{{0, 1}, testutil::abdullah_row()}) == 0);
  CHECK(oracle::score("Abdullah khuln", Record{{0, 1}, testutil::abdullah_row()}) == 95);
}

TEST_CASE("match levels") {
  auto level = [](const char* q, const char* r) {
    const auto qw = *phonetic::Word::from_normalized(q);
    const auto rw = *phonetic::Word::from_normalized(r);
    return match_level(qw, phonetic::encode(qw), rw, phonetic::encode(rw));
  };
  CHECK(level("SMITH", "SMITH") == 100);
  CHECK(level("SMITH", "SMYTH") == 90);
  CHECK(level("SCHMIDT", "SMITH") == 75);  // XMT primary vs secondary
  CHECK(level("KHULN", "KHULNA") == 90);
  CHECK(level("H", "H") == 100);
  CHECK(level("H", "W") == 0);  // empty codes never match each other
  CHECK(level("RAHIM", "DHAKA") == 0);
}

TEST_CASE("rahim dinajpur") {
  Fixture fx;
  auto row = testutil::abdullah_row();
  row[0] = "Rahim";
  row[2] = "Dinajpur";
  fx.add(testutil::abdullah_row());
  const auto rahim = fx.add(row);
  QueryEngine engine(fx.index, fx.store);
  const auto query = Query::parse("Rahem Dinajpor");
  const auto candidates = engine.candidates(query).pointers;
  CHECK(std::find(candidates.begin(), candidates.end(), rahim) != candidates.end());
  const auto result = engine.search(query);
  REQUIRE_FALSE(result.hits.empty());
  CHECK(result.hits[0].pointer == rahim);
  CHECK(result.hits[0].score_percent == 90);
}

TEST_CASE("seven full matches above two partial ones") {
  Fixture fx;
  std::vector<DataPointer> full;
  for (int i = 0; i < 7; ++i) full.push_back(fx.add(testutil::abdullah_row()));
  fx.add(testutil::ibtihal_row());
  fx.add(testutil::ibtihal_row());
  for (bool prune : {true, false}) {
    QueryEngine engine(fx.index, fx.store, {ScoringWeights{}, prune});
    const auto result = engine.search(Query::parse("Abdullah khuln"));
    REQUIRE(result.hits.size() == 9);
    for (int i = 0; i < 7; ++i) {
      CHECK(result.hits[i].pointer == full[i]);
      CHECK(result.hits[i].score_percent == 95);
      CHECK(result.hits[i].matched_record.fields == testutil::abdullah_row());
    }
    CHECK(result.hits[7].score_percent == 50);
    CHECK(result.hits[8].score_percent == 50);
    CHECK(result.hits[7].pointer < result.hits[8].pointer);
    CHECK(oracle::serialize(result) == oracle::serialize(oracle::search("Abdullah khuln", fx.store.records(), 50)));
  }
}

TEST_CASE("empty and unmatched queries") {
  Fixture fx;
  fx.add(testutil::abdullah_row());
  QueryEngine engine(fx.index, fx.store);
  for (const char* text : {"", "8801700041114", "  ,. "}) {
    const auto query = Query::parse(text);
    CHECK(engine.search(query).no_searchable_terms);
    CHECK(engine.candidates(query).no_searchable_terms);
    CHECK(engine.scan(query).no_searchable_terms);
    CHECK(engine.search(query).hits.empty());
  }
  const auto none = engine.search(Query::parse("zzzzqqq"));
  CHECK_FALSE(none.no_searchable_terms);
  CHECK(none.hits.empty());
  CHECK(engine.search(Query::parse("Abdullah", 0)).hits.empty());
}

TEST_CASE("min_score and limit") {
  Fixture fx;
  for (int i = 0; i < 3; ++i) fx.add(testutil::abdullah_row());
  for (int i = 0; i < 3; ++i) fx.add(testutil::ibtihal_row());
  QueryEngine engine(fx.index, fx.store);
  CHECK(engine.search(Query::parse("Abdullah khuln", 50, 60)).hits.size() == 3);
  CHECK(engine.search(Query::parse("Abdullah khuln", 50, 50)).hits.size() == 6);
  CHECK(engine.search(Query::parse("Abdullah khuln", 50, 96)).hits.empty());
  const auto limited = engine.search(Query::parse("Abdullah khuln", 4));
  REQUIRE(limited.hits.size() == 4);
  CHECK(limited.hits[3].score_percent == 50);
  CHECK(limited.hits[3].pointer == DataPointer{0, 4});
}

TEST_CASE("oracle equivalence on random corpora") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Fixture fx;
    oracle::CorpusMaker maker(seed * 7919);
    const auto size = 1 + maker.rng()() % 500;
    for (std::size_t i = 0; i < size; ++i) fx.add(maker.values(8));
    // A few deletes so the store has holes.
    for (int i = 0; i < 10; ++i) {
      const DataPointer p{0, 1 + maker.rng()() % size};
      if (fx.store.retrieve(p)) fx.remove(p);
    }
    const auto records = fx.store.records();
    QueryEngine pruned(fx.index, fx.store);
    QueryEngine exhaustive(fx.index, fx.store, {ScoringWeights{}, false});
    for (int q = 0; q < 20; ++q) {
      const auto text = oracle::random_query(maker, records);
      const std::size_t limit = q % 4 == 0 ? 1 + maker.rng()() % 10 : 50;
      const int min_score = q % 5 == 0 ? static_cast<int>(maker.rng()() % 100) : 0;
      const auto query = Query::parse(text, limit, min_score);
      const auto expected = oracle::serialize(oracle::search(text, records, limit, min_score));
      CAPTURE(seed);
      CAPTURE(text);
      const auto a = pruned.search(query);
      const auto b = exhaustive.search(query);
      const auto c = pruned.scan(query);
      REQUIRE(oracle::serialize(a) == expected);
      REQUIRE(oracle::serialize(b) == expected);
      REQUIRE(oracle::serialize(c) == expected);

      const auto candidates = pruned.candidates(query);
      REQUIRE(candidates.pointers == oracle::candidates(text, records));
      CHECK(b.stats.records_scored == candidates.pointers.size());
      CHECK(a.stats.records_scored <= candidates.pointers.size());
      CHECK(c.stats.records_scored == records.size());
      for (const auto& hit : a.hits) REQUIRE(hit.matched_record == *fx.store.retrieve(hit.pointer));
    }
  }
}

TEST_CASE("misspelling tolerance") {
  Fixture fx;
  oracle::CorpusMaker maker(404);
  for (int i = 0; i < 300; ++i) fx.add(maker.values(8));
  QueryEngine engine(fx.index, fx.store, {ScoringWeights{}, false});
  int checked = 0;
  for (const auto& record : fx.store.records()) {
    for (const auto& token : oracle::tokens_of(record)) {
      const auto misspelled = maker.misspell(token.text);
      const auto word = phonetic::Word::from_normalized(misspelled);
      if (!word || misspelled == token.text || token.primary.empty()) continue;
      if (phonetic::encode(*word).primary.str() != token.primary) continue;
      const auto result = engine.search(Query::parse(misspelled, 1000));
      const auto it = std::find_if(result.hits.begin(), result.hits.end(),
                                   [&](const RankedHit& h) { return h.pointer == record.pointer; });
      REQUIRE(it != result.hits.end());
      CHECK(it->score_percent >= 90);
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("adding a non-matching record changes nothing") {
  Fixture fx;
  oracle::CorpusMaker maker(9);
  for (int i = 0; i < 200; ++i) fx.add(maker.values(8));
  QueryEngine engine(fx.index, fx.store);
  std::vector<std::pair<Query, std::string>> before;
  for (int q = 0; q < 30; ++q) {
    auto query = Query::parse(oracle::random_query(maker, fx.store.records()), 1000);
    before.emplace_back(query, oracle::serialize(engine.search(query)));
  }
  for (int i = 0; i < 20; ++i) {
    auto row = std::vector<std::string>(8);
    row[0] = "Qqqqvvv";
    row[7] = std::to_string(i);
    fx.add(row);
  }
  const Record added{DataPointer{}, [] {
    auto row = std::vector<std::string>(8);
    row[0] = "Qqqqvvv";
    return row;
  }()};
  int compared = 0;
  for (const auto& [query, text] : before) {
    // Only queries the new records cannot match.
    if (oracle::score(query.raw_text, added) > 0) continue;
    CHECK(oracle::serialize(engine.search(query)) == text);
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("determinism") {
  auto run = [] {
    Fixture fx;
    oracle::CorpusMaker maker(31337);
    for (int i = 0; i < 400; ++i) fx.add(maker.values(8));
    QueryEngine engine(fx.index, fx.store);
    std::string out;
    for (int q = 0; q < 40; ++q) out += oracle::serialize(engine.search(Query::parse(oracle::random_query(maker, fx.store.records()), 5))) + "\n";
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("custom weights") {
  Fixture fx;
  auto row = std::vector<std::string>(8);
  row[0] = "Smith";
  fx.add(row);
  QueryEngine engine(fx.index, fx.store, {ScoringWeights{100, 80, 50, 40}, true});
  CHECK(engine.search(Query::parse("Smyth")).hits.at(0).score_percent == 80);
  CHECK(engine.search(Query::parse("Schmidt")).hits.at(0).score_percent == 50);
}
