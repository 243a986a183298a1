#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "phonosearch/errors.hpp"
#include "phonosearch/record_store.hpp"
#include "phonosearch/tables.hpp"
#include "test_util.hpp"

using namespace phonosearch;

namespace {

TableInfo admin_table() { return TableInfo{TableId{1, "admin"}, "Admins", {"login", "name"}}; }

std::vector<std::string> numbered_row(int i) {
  auto row = testutil::abdullah_row();
  row[0] = "Name" + std::to_string(i);
  row[7] = std::to_string(8801700000000LL + i);
  return row;
}

}  // namespace

TEST_CASE("registry") {
  TableRegistry registry;
  CHECK(registry.register_table(citizen_table()) == TableId{0, "citizen"});
  CHECK_THROWS_AS(registry.register_table(citizen_table()), ConfigError);
  CHECK_THROWS_AS(registry.register_table("other", 0, {"a"}), ConfigError);
  CHECK_THROWS_AS(registry.register_table("citizen", 5, {"a"}), ConfigError);
  CHECK(registry.register_table("admin", 1, {"login", "name"}) == TableId{1, "admin"});
  CHECK_THROWS_AS(registry.register_table("", 2, {"a"}), ConfigError);
  CHECK_THROWS_AS(registry.register_table("x", 3, {}), ConfigError);
  CHECK_THROWS_AS(registry.register_table("y", 4, {"a", "a"}), ConfigError);

  REQUIRE(registry.find(0));
  CHECK(registry.find(0)->description == "Storing the information of citizen");
  CHECK(registry.find(0)->arity() == 8);
  CHECK(registry.find("admin")->table.id == 1);
  CHECK(registry.find(9) == nullptr);
  CHECK(registry.tables().size() == 2);
  CHECK(to_string(DataPointer{0, 133}) == "(0, 133)");
}

TEST_CASE("memory store basics") {
  RecordStore store;
  CHECK_FALSE(store.durable());
  store.open_table(citizen_table());
  CHECK_THROWS_AS(store.open_table(citizen_table()), ConfigError);

  const auto first = store.insert(0, testutil::abdullah_row());
  CHECK(first == DataPointer{0, 1});
  const auto record = store.retrieve(first);
  REQUIRE(record);
  CHECK(record->fields[0] == "Abdullah");
  CHECK(record->fields == testutil::abdullah_row());

  CHECK_THROWS_AS(store.insert(0, {"too", "short"}), ValidationError);
  CHECK_THROWS_AS(store.insert(3, testutil::abdullah_row()), ValidationError);
  auto bad = testutil::abdullah_row();
  bad[2] = std::string("a") + kFieldSeparator + "b";
  CHECK_THROWS_AS(store.insert(0, bad), ValidationError);

  CHECK_FALSE(store.retrieve(DataPointer{7, 1}));
  CHECK_FALSE(store.retrieve(DataPointer{0, 99}));

  auto changed = testutil::abdullah_row();
  changed[1] = "Dhaka";
  store.update(first, changed);
  CHECK(store.retrieve(first)->fields[1] == "Dhaka");
  CHECK_THROWS_AS(store.update(first, {"x"}), ValidationError);

  CHECK(store.remove(first));
  CHECK_FALSE(store.remove(first));
  CHECK_FALSE(store.retrieve(first));
  CHECK_THROWS_AS(store.update(first, changed), NotFoundError);

  const auto again = store.insert(0, testutil::abdullah_row());
  CHECK(again.p_value == 2);
  CHECK(store.size() == 1);
}

TEST_CASE("pointer (0, 133) resolves to the 133rd insert") {
  RecordStore store;
  store.open_table(citizen_table());
  for (int i = 1; i <= 200; ++i) CHECK(store.insert(0, numbered_row(i)).p_value == static_cast<std::uint64_t>(i));
  const auto record = store.retrieve(DataPointer{0, 133});
  REQUIRE(record);
  CHECK(record->fields == numbered_row(133));
}

TEST_CASE("per-table counters") {
  RecordStore store;
  store.open_table(citizen_table());
  store.open_table(admin_table());
  CHECK(store.insert(0, numbered_row(1)) == DataPointer{0, 1});
  CHECK(store.insert(1, {"root", "Root"}) == DataPointer{1, 1});
  CHECK(store.insert(0, numbered_row(2)) == DataPointer{0, 2});
  CHECK(store.size(0) == 2);
  CHECK(store.size(1) == 1);
  const auto all = store.records();
  REQUIRE(all.size() == 3);
  CHECK(all[0].pointer == DataPointer{0, 1});
  CHECK(all[2].pointer == DataPointer{1, 1});
}

TEST_CASE("durable store survives reopen") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(citizen_table());
    for (int i = 1; i <= 5; ++i) store.insert(0, numbered_row(i));
    auto changed = numbered_row(2);
    changed[2] = "Dinajpur";
    store.update(DataPointer{0, 2}, changed);
    store.remove(DataPointer{0, 5});
    store.insert(0, {"", "", "", "", "", "", "", ""});
  }
  CHECK(std::filesystem::exists(dir.path() / "citizen.log"));
  RecordStore store(dir.path(), Durability::kBuffered);
  store.open_table(citizen_table());
  CHECK(store.discarded_tail_bytes(0) == 0);
  CHECK(store.size() == 5);
  CHECK(store.retrieve(DataPointer{0, 2})->fields[2] == "Dinajpur");
  CHECK_FALSE(store.retrieve(DataPointer{0, 5}));
  CHECK(store.retrieve(DataPointer{0, 6})->fields == std::vector<std::string>(8));
  // Deleted p_values are never reissued, even across reopen.
  CHECK(store.insert(0, numbered_row(7)).p_value == 7);
}

TEST_CASE("deleting the newest record does not recycle its p_value after reopen") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(citizen_table());
    store.insert(0, numbered_row(1));
    store.insert(0, numbered_row(2));
    store.remove(DataPointer{0, 2});
  }
  RecordStore store(dir.path());
  store.open_table(citizen_table());
  CHECK(store.insert(0, numbered_row(3)).p_value == 3);
}

TEST_CASE("on-disk framing") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(admin_table());
    store.insert(1, {"ab", "c"});
    store.remove(DataPointer{1, 1});
  }
  std::ifstream in(dir.path() / "admin.log", std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::string expected = std::string("I") + std::string("\x01\0\0\0\0\0\0\0", 8) +
                               std::string("\x04\0\0\0", 4) + "ab\x1F" "c" + std::string("D") +
                               std::string("\x01\0\0\0\0\0\0\0", 8) + std::string("\0\0\0\0", 4);
  CHECK(bytes == expected);
}

TEST_CASE("torn tail is cut at the last complete entry") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(citizen_table());
    for (int i = 1; i <= 3; ++i) store.insert(0, numbered_row(i));
  }
  const auto path = dir.path() / "citizen.log";
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 5);
  {
    RecordStore store(dir.path());
    store.open_table(citizen_table());
    CHECK(store.size() == 2);
    CHECK(store.discarded_tail_bytes(0) > 0);
    CHECK(store.insert(0, numbered_row(9)).p_value == 3);
  }
  RecordStore store(dir.path());
  store.open_table(citizen_table());
  CHECK(store.discarded_tail_bytes(0) == 0);
  CHECK(store.size() == 3);
  CHECK(store.retrieve(DataPointer{0, 3})->fields == numbered_row(9));
}

TEST_CASE("garbage tag ends replay") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(citizen_table());
    store.insert(0, numbered_row(1));
  }
  {
    std::ofstream out(dir.path() / "citizen.log", std::ios::binary | std::ios::app);
    out << "Zjunkjunkjunkjunk";
  }
  RecordStore store(dir.path());
  store.open_table(citizen_table());
  CHECK(store.size() == 1);
  CHECK(store.discarded_tail_bytes(0) == 17);
}

TEST_CASE("arity mismatch in a log is a storage error") {
  testutil::TempDir dir;
  {
    RecordStore store(dir.path());
    store.open_table(admin_table());
    store.insert(1, {"a", "b"});
  }
  RecordStore store(dir.path());
  CHECK_THROWS_AS(store.open_table(TableInfo{TableId{1, "admin"}, "", {"login", "name", "extra"}}), StorageError);
}

TEST_CASE("random round trips across reopen") {
  testutil::TempDir dir;
  std::mt19937_64 rng(5);
  std::map<std::uint64_t, std::vector<std::string>> model;
  auto random_row = [&] {
    std::vector<std::string> row;
    for (int f = 0; f < 8; ++f) {
      std::string value;
      const int len = static_cast<int>(rng() % 12);
      for (int i = 0; i < len; ++i) value.push_back(static_cast<char>(' ' + rng() % 95));
      if (rng() % 10 == 0) value += "\xC3\xA9";  // some UTF-8
      row.push_back(value);
    }
    return row;
  };
  for (int round = 0; round < 4; ++round) {
    RecordStore store(dir.path(), round % 2 ? Durability::kBuffered : Durability::kSync);
    store.open_table(citizen_table());
    REQUIRE(store.size() == model.size());
    for (const auto& [p, fields] : model) REQUIRE(store.retrieve(DataPointer{0, p})->fields == fields);
    for (int op = 0; op < 300; ++op) {
      const auto roll = rng() % 10;
      if (roll < 6 || model.empty()) {
        auto row = random_row();
        const auto pointer = store.insert(0, row);
        REQUIRE(!model.contains(pointer.p_value));
        REQUIRE(store.retrieve(pointer)->fields == row);
        model[pointer.p_value] = row;
      } else {
        auto it = model.begin();
        std::advance(it, rng() % model.size());
        if (roll < 8) {
          auto row = random_row();
          store.update(DataPointer{0, it->first}, row);
          it->second = row;
        } else {
          CHECK(store.remove(DataPointer{0, it->first}));
          model.erase(it);
        }
      }
    }
  }
}
