#include <doctest.h>

#include <atomic>
#include <thread>

#include "oracle.hpp"
#include "phonosearch/database.hpp"
#include "phonosearch/errors.hpp"
#include "test_util.hpp"

using namespace phonosearch;

TEST_CASE("insert is searchable, update reindexes, delete removes") {
  SearchDatabase db;
  const auto p = db.insert(0, testutil::abdullah_row());
  CHECK(db.search(Query::parse("khuln")).hits.at(0).pointer == p);

  auto row = testutil::abdullah_row();
  row[1] = "Dhaka";
  db.update(p, row);
  CHECK(db.search(Query::parse("khuln")).hits.empty());
  CHECK(db.search(Query::parse("dhaka")).hits.at(0).matched_record.fields[1] == "Dhaka");

  CHECK(db.remove(p));
  CHECK_FALSE(db.remove(p));
  CHECK(db.search(Query::parse("abdullah")).hits.empty());
  CHECK_THROWS_AS(db.update(p, row), NotFoundError);
  CHECK_THROWS_AS(db.insert(0, {"short"}), ValidationError);
  CHECK(db.read([](const RecordStore&, const PhoneticIndex& index) { return index.posting_count(); }) == 0);
}

TEST_CASE("tables") {
  SearchDatabase db;
  CHECK(db.table("citizen")->table.id == 0);
  CHECK(db.table(0)->field_names.size() == 8);
  CHECK_FALSE(db.table("admin"));
  CHECK(db.register_table(TableInfo{TableId{1, "admin"}, "", {"login"}}) == TableId{1, "admin"});
  CHECK_THROWS_AS(db.register_table(TableInfo{TableId{1, "other"}, "", {"x"}}), ConfigError);
  CHECK(db.tables().size() == 2);
  const auto p = db.insert(1, {"Abdullah"});
  db.insert(0, testutil::abdullah_row());
  const auto hits = db.search(Query::parse("abdullah")).hits;
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].pointer == DataPointer{0, 1});
  CHECK(hits[1].pointer == p);
}

TEST_CASE("index is rebuilt from the store on reopen") {
  testutil::TempDir dir;
  DatabaseConfig config;
  config.data_dir = dir.path();
  std::string before;
  {
    SearchDatabase db(config);
    oracle::CorpusMaker maker(3);
    for (int i = 0; i < 300; ++i) db.insert(0, maker.values(8));
    for (std::uint64_t p = 1; p <= 300; p += 7) db.remove(DataPointer{0, p});
    db.update(DataPointer{0, 2}, testutil::abdullah_row());
    before = oracle::serialize(db.search(Query::parse("Abdullah khuln rami")));
  }
  SearchDatabase db(config);
  CHECK(db.size() == 300 - 43);
  CHECK(db.retrieve(DataPointer{0, 2})->fields == testutil::abdullah_row());
  CHECK(oracle::serialize(db.search(Query::parse("Abdullah khuln rami"))) == before);
  const auto contents = db.read([](const RecordStore& store, const PhoneticIndex& index) {
    return std::make_pair(index.contents(), oracle::build_index(store.records()));
  });
  CHECK(contents.first == contents.second);
  db.rebuild_index();
  CHECK(oracle::serialize(db.search(Query::parse("Abdullah khuln rami"))) == before);
}

TEST_CASE("concurrent readers see whole mutations") {
  SearchDatabase db;
  oracle::CorpusMaker maker(12);
  for (int i = 0; i < 200; ++i) db.insert(0, maker.values(8));

  std::atomic<bool> done{false};
  std::atomic<int> violations{0};
  std::atomic<long> searches{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&, t] {
      oracle::CorpusMaker local(100 + t);
      while (!done) {
        const auto query = Query::parse(local.word() + " " + local.word() + " abdullah", 20);
        db.read([&](const RecordStore& store, const PhoneticIndex& index) {
          QueryEngine engine(index, store);
          for (const auto& hit : engine.search(query).hits) {
            const auto tokens = index.tokens_of(hit.pointer);
            if (!store.find(hit.pointer) || !tokens) ++violations;
          }
          if (index.record_count() != store.size()) ++violations;
        });
        const auto result = db.search(query);
        for (const auto& hit : result.hits) {
          if (hit.matched_record.fields.size() != 8) ++violations;
        }
        ++searches;
      }
    });
  }
  std::vector<DataPointer> live;
  for (int op = 0; op < 3000; ++op) {
    const auto roll = maker.rng()() % 3;
    if (roll == 0 || live.empty()) {
      live.push_back(db.insert(0, maker.values(8)));
    } else if (roll == 1) {
      db.update(live[maker.rng()() % live.size()], testutil::abdullah_row());
    } else {
      const auto i = maker.rng()() % live.size();
      db.remove(live[i]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  done = true;
  for (auto& t : readers) t.join();
  CHECK(violations == 0);
  CHECK(searches > 0);
}
