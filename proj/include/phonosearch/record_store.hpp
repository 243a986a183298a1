#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phonosearch/tables.hpp"

namespace phonosearch {

struct Record {
  DataPointer pointer;
  std::vector<std::string> fields;

  friend bool operator==(const Record&, const Record&) = default;
};

// Field values are framed with this separator on disk, so it may not appear
// inside a value.
inline constexpr char kFieldSeparator = '\x1F';

enum class Durability {
  kSync,      // fsync after every operation
  kBuffered,  // flush to the OS only; survives process crashes, not power loss
};

// Log entry tags.
enum class LogOp : std::uint8_t { kInsert = 'I', kUpdate = 'U', kDelete = 'D' };

// Records of every registered table, addressed by DataPointer.
//
// A durable store keeps one append-only log per table at
// <data_dir>/<table_name>.log. Each entry is
//
//   1 byte   op tag ('I', 'U' or 'D')
//   8 bytes  p_value, little endian
//   4 bytes  payload length, little endian
//   payload  field values joined with 0x1F (empty for 'D')
//
// The log is replayed into memory when a table is opened. A truncated or
// unreadable tail (a write cut short by a crash) is cut off at the last
// complete entry. p_values come from a per-table counter starting at 1 and
// are never reissued, even after a delete.
//
// Not synchronized; SearchDatabase serializes access.
class RecordStore {
 public:
  // Memory-only store; nothing touches the filesystem.
  RecordStore();
  // Durable store. Creates `data_dir` if needed.
  explicit RecordStore(std::filesystem::path data_dir, Durability durability = Durability::kSync);
  ~RecordStore();
  RecordStore(RecordStore&&) noexcept;
  RecordStore& operator=(RecordStore&&) noexcept;

  // Makes a table available, replaying its log when the store is durable.
  // Throws StorageError if the log cannot be read or holds records of a
  // different arity, ConfigError if the id is already open.
  void open_table(const TableInfo& info);

  // Throws ValidationError on unknown table, arity mismatch or a value
  // containing the field separator; StorageError if the log write fails.
  DataPointer insert(TableIdValue table, std::vector<std::string> values);

  std::optional<Record> retrieve(const DataPointer& pointer) const;
  const std::vector<std::string>* find(const DataPointer& pointer) const;

  // Throws NotFoundError if the record is not live, ValidationError on bad
  // values, StorageError on write failure.
  void update(const DataPointer& pointer, std::vector<std::string> values);

  // Returns false if there was nothing to delete.
  bool remove(const DataPointer& pointer);

  std::size_t size() const;
  std::size_t size(TableIdValue table) const;

  // Live records in ascending pointer order.
  std::vector<Record> records() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [id, table] : tables_) {
      const auto& slots = table->rows.slots;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) fn(DataPointer{id, i + 1}, *slots[i]);
      }
    }
  }

  // Bytes cut from the end of the table's log when it was opened.
  std::uintmax_t discarded_tail_bytes(TableIdValue table) const;

  bool durable() const noexcept { return data_dir_.has_value(); }

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const noexcept;
  };

  // Rows by p_value; slot i holds p_value i + 1. Counters are dense, so
  // lookups are a single index.
  struct Rows {
    std::vector<std::optional<std::vector<std::string>>> slots;
    std::size_t live = 0;

    const std::vector<std::string>* find(std::uint64_t p_value) const;
    std::vector<std::string>* find(std::uint64_t p_value);
    void put(std::uint64_t p_value, std::vector<std::string> fields);
    bool erase(std::uint64_t p_value);
  };

  struct Table {
    TableInfo info;
    Rows rows;
    std::uint64_t last_p_value = 0;
    std::unique_ptr<std::FILE, FileCloser> log;
    // Set after a failed write; the log tail is then unknown.
    bool failed = false;
    std::uintmax_t discarded_tail = 0;
  };

  Table& table_for_write(TableIdValue id, const std::vector<std::string>& values);
  void append(Table& table, LogOp op, std::uint64_t p_value, const std::vector<std::string>* values);
  void replay(Table& table);

  std::optional<std::filesystem::path> data_dir_;
  Durability durability_ = Durability::kSync;
  std::map<TableIdValue, std::unique_ptr<Table>> tables_;
};

}  // namespace phonosearch
