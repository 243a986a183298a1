#include <doctest.h>

#include <algorithm>
#include <map>

#include "oracle.hpp"
#include "phonosearch/errors.hpp"
#include "phonosearch/index.hpp"
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
};

bool has_posting(const PostingList& list, DataPointer pointer, std::uint16_t field) {
  return std::any_of(list.postings.begin(), list.postings.end(),
                     [&](const Posting& p) { return p.pointer == pointer && p.field_position == field; });
}

}  // namespace

TEST_CASE("postings for the demo row") {
  Fixture fx;
  for (int i = 0; i < 6; ++i) fx.store.insert(0, std::vector<std::string>(8));
  const auto pointer = fx.store.insert(0, testutil::abdullah_row());
  REQUIRE(pointer == DataPointer{0, 7});
  // 7 alphabetic tokens; the phone number contributes nothing.
  const auto added = fx.index.index_record(*fx.store.retrieve(pointer));
  CHECK(added == oracle::build_index(fx.store.records()).size());

  const auto abdullah = phonetic::encode(*phonetic::Word::from_normalized("ABDULLAH"));
  const auto list = fx.index.lookup(abdullah.primary);
  CHECK(list.code.keycode == "APTL");
  CHECK(has_posting(list, pointer, 0));
  CHECK(fx.index.lookup("KLN").postings == std::vector<Posting>{{pointer, 1, CodeKind::kPrimary}});
  CHECK(fx.index.lookup("ZZZ").empty());
  CHECK(fx.index.tokens_of(pointer)->size() == 7);
  CHECK(fx.index.record_count() == 1);
}

TEST_CASE("smith and schmidt share XMT") {
  Fixture fx;
  auto row = std::vector<std::string>(8);
  row[0] = "Smith";
  const auto smith = fx.add(row);
  row[0] = "Schmidt";
  const auto schmidt = fx.add(row);
  const auto xmt = fx.index.lookup("XMT").postings;
  REQUIRE(xmt.size() == 2);
  CHECK(xmt[0] == Posting{smith, 0, CodeKind::kSecondary});
  CHECK(xmt[1] == Posting{schmidt, 0, CodeKind::kPrimary});
  CHECK(fx.index.lookup(phonetic::PhoneticCode("SM0")).postings.size() == 1);
}

TEST_CASE("empty records and sentinel codes") {
  Fixture fx;
  CHECK(fx.index.index_record(Record{fx.store.insert(0, std::vector<std::string>(8)), std::vector<std::string>(8)}) == 0);
  auto row = std::vector<std::string>(8);
  row[0] = "H";  // encodes to nothing
  const auto p = fx.add(row);
  CHECK(phonetic::encode(*phonetic::Word::from_normalized("H")).primary.empty());
  CHECK(has_posting(fx.index.lookup(std::string_view("_")), p, 0));
}

TEST_CASE("validation") {
  Fixture fx;
  CHECK_THROWS_AS(fx.index.index_record(Record{DataPointer{4, 1}, std::vector<std::string>(8)}), ValidationError);
  CHECK_THROWS_AS(fx.index.index_record(Record{DataPointer{0, 1}, {"a"}}), ValidationError);
  CHECK_THROWS_AS(PhoneticIndex(fx.registry, 0), ConfigError);
}

TEST_CASE("deindex is the inverse of index") {
  Fixture fx;
  fx.add(testutil::abdullah_row());
  const auto before = fx.index.contents();
  const auto p = fx.add(testutil::ibtihal_row());
  CHECK(fx.index.deindex_record(p) > 0);
  CHECK(fx.index.contents() == before);
  CHECK(fx.index.deindex_record(p) == 0);
  CHECK(fx.index.deindex_record(DataPointer{0, 999}) == 0);
  CHECK(fx.index.find_word("IBTIHAL")->live_tokens == 0);
}

TEST_CASE("reindexing a pointer replaces its postings") {
  Fixture fx;
  const auto p = fx.add(testutil::abdullah_row());
  auto row = testutil::abdullah_row();
  row[1] = "Dhaka";
  fx.index.index_record(Record{p, row});
  CHECK(fx.index.lookup("KLN").empty());
  CHECK(has_posting(fx.index.lookup("TK"), p, 1));
}

TEST_CASE("khuln finds every Khulna record") {
  Fixture fx;
  oracle::CorpusMaker maker(11);
  std::vector<DataPointer> khulna;
  for (int i = 0; i < 300; ++i) {
    auto row = maker.values(8);
    if (i % 7 == 0) {
      row[1] = "Khulna";
      khulna.push_back(fx.add(row));
    } else {
      fx.add(row);
    }
  }
  const auto code = phonetic::encode(*phonetic::Word::from_normalized("KHULN")).primary;
  CHECK(code.str() == "KLN");
  std::vector<DataPointer> expected;
  for (const auto& [key, posting] : oracle::build_index(fx.store.records())) {
    if (key == code.str()) expected.push_back(posting.pointer);
  }
  expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
  std::vector<DataPointer> got;
  for (const auto& posting : fx.index.lookup(code).postings) got.push_back(posting.pointer);
  got.erase(std::unique(got.begin(), got.end()), got.end());
  CHECK(got == expected);
  for (const auto& p : khulna) CHECK(std::binary_search(got.begin(), got.end(), p));
}

TEST_CASE("500 random records match the brute-force re-indexer") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Fixture fx;
    oracle::CorpusMaker maker(seed);
    for (int i = 0; i < 500; ++i) fx.add(maker.values(8));
    CHECK(fx.index.contents() == oracle::build_index(fx.store.records()));
    CHECK(fx.index.posting_count() == fx.index.contents().size());
  }
}

TEST_CASE("random interleavings keep the index equal to a rebuild") {
  Fixture fx;
  oracle::CorpusMaker maker(77);
  auto& rng = maker.rng();
  std::vector<DataPointer> live;
  for (int op = 0; op < 10000; ++op) {
    const auto roll = rng() % 10;
    if (roll < 5 || live.size() < 20) {
      if (live.size() < 200) live.push_back(fx.add(maker.values(8)));
    } else if (roll < 8) {
      const auto p = live[rng() % live.size()];
      fx.store.update(p, maker.values(8));
      fx.index.deindex_record(p);
      fx.index.index_record(*fx.store.retrieve(p));
    } else {
      const auto i = rng() % live.size();
      fx.store.remove(live[i]);
      fx.index.deindex_record(live[i]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
    }
    if (op % 1000 == 999) {
      const auto contents = fx.index.contents();
      for (const auto& [key, posting] : contents) REQUIRE(fx.store.retrieve(posting.pointer));
      REQUIRE(contents == oracle::build_index(fx.store.records()));
    }
  }

  PhoneticIndex rebuilt(fx.registry);
  for (const auto& record : fx.store.records()) rebuilt.index_record(record);
  CHECK(rebuilt.contents() == fx.index.contents());
  CHECK(fx.index.record_count() == fx.store.size());
}

TEST_CASE("longer code caps") {
  Fixture fx;
  PhoneticIndex wide(fx.registry, 64);
  auto row = std::vector<std::string>(8);
  row[2] = "Dinajpur";
  wide.index_record(Record{DataPointer{0, 1}, row});
  CHECK_FALSE(wide.lookup("TNJPR").empty());
  CHECK(wide.lookup("TNJP").empty());
}
