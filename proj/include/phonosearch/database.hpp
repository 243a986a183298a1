#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "phonosearch/index.hpp"
#include "phonosearch/query.hpp"
#include "phonosearch/record_store.hpp"
#include "phonosearch/tables.hpp"

namespace phonosearch {

struct DatabaseConfig {
  // Memory-only when unset.
  std::optional<std::filesystem::path> data_dir;
  Durability durability = Durability::kSync;
  std::size_t max_code_length = phonetic::kDefaultMaxCodeLength;
  std::vector<TableInfo> tables = {citizen_table()};
  QueryEngine::Options engine;
};

// Record store plus phonetic index behind one lock. Mutations take the lock
// exclusively and touch store and index together, so a reader never sees a
// record without its postings or the other way round. Searches share it.
//
// The index is not persisted; it is rebuilt from the store when a table is
// registered.
class SearchDatabase {
 public:
  explicit SearchDatabase(DatabaseConfig config = {});

  SearchDatabase(const SearchDatabase&) = delete;
  SearchDatabase& operator=(const SearchDatabase&) = delete;

  // Registers, opens and indexes a table. Throws ConfigError on duplicates.
  TableId register_table(TableInfo info);

  std::optional<TableInfo> table(std::string_view name) const;
  std::optional<TableInfo> table(TableIdValue id) const;
  std::vector<TableInfo> tables() const;

  DataPointer insert(TableIdValue table, std::vector<std::string> values);
  std::optional<Record> retrieve(const DataPointer& pointer) const;
  void update(const DataPointer& pointer, std::vector<std::string> values);
  bool remove(const DataPointer& pointer);

  ResultSet search(const Query& query) const;
  ResultSet scan(const Query& query) const;
  CandidateSet candidates(const Query& query) const;

  std::size_t size() const;

  // Drops the index and refiles every live record.
  void rebuild_index();

  // Runs `fn(store, index)` under the shared lock.
  template <typename Fn>
  decltype(auto) read(Fn&& fn) const {
    auto lock = read_lock();
    return fn(static_cast<const RecordStore&>(store_), static_cast<const PhoneticIndex&>(index_));
  }

  const DatabaseConfig& config() const noexcept { return config_; }

 private:
  std::shared_lock<std::shared_mutex> read_lock() const;
  std::unique_lock<std::shared_mutex> write_lock();

  DatabaseConfig config_;
  mutable std::shared_mutex mutex_;
  // glibc's rwlock lets a steady stream of readers starve writers. A writer
  // holds this while it waits, which holds back new readers.
  mutable std::mutex turnstile_;
  TableRegistry registry_;
  RecordStore store_;
  PhoneticIndex index_;
  QueryEngine engine_;
};

}  // namespace phonosearch
