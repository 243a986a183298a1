#include "phonosearch/record_store.hpp"

#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

#include "phonosearch/errors.hpp"

namespace phonosearch {

namespace {

constexpr std::size_t kHeaderSize = 1 + 8 + 4;
constexpr std::uint64_t kMaxPValueGap = 1u << 24;

void put_le(std::string& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const char* data, int bytes) {
  std::uint64_t value = 0;
  for (int i = bytes - 1; i >= 0; --i) {
    value = (value << 8) | static_cast<unsigned char>(data[i]);
  }
  return value;
}

std::vector<std::string> split_fields(std::string_view payload) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = payload.find(kFieldSeparator, start);
    fields.emplace_back(payload.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

const std::vector<std::string>* RecordStore::Rows::find(std::uint64_t p_value) const {
  if (p_value == 0 || p_value > slots.size() || !slots[p_value - 1]) return nullptr;
  return &*slots[p_value - 1];
}

std::vector<std::string>* RecordStore::Rows::find(std::uint64_t p_value) {
  if (p_value == 0 || p_value > slots.size() || !slots[p_value - 1]) return nullptr;
  return &*slots[p_value - 1];
}

void RecordStore::Rows::put(std::uint64_t p_value, std::vector<std::string> fields) {
  if (p_value > slots.size()) slots.resize(p_value);
  auto& slot = slots[p_value - 1];
  if (!slot) ++live;
  slot = std::move(fields);
}

bool RecordStore::Rows::erase(std::uint64_t p_value) {
  if (!find(p_value)) return false;
  slots[p_value - 1].reset();
  --live;
  return true;
}

void RecordStore::FileCloser::operator()(std::FILE* f) const noexcept {
  if (f) std::fclose(f);
}

RecordStore::RecordStore() = default;

RecordStore::RecordStore(std::filesystem::path data_dir, Durability durability)
    : data_dir_(std::move(data_dir)), durability_(durability) {
  std::error_code ec;
  std::filesystem::create_directories(*data_dir_, ec);
  if (ec) throw StorageError("cannot create data directory " + data_dir_->string() + ": " + ec.message());
}

RecordStore::~RecordStore() = default;
RecordStore::RecordStore(RecordStore&&) noexcept = default;
RecordStore& RecordStore::operator=(RecordStore&&) noexcept = default;

void RecordStore::open_table(const TableInfo& info) {
  if (tables_.contains(info.table.id)) {
    throw ConfigError("table id " + std::to_string(info.table.id) + " already open");
  }
  auto table = std::make_unique<Table>();
  table->info = info;
  if (data_dir_) {
    replay(*table);
    const auto path = *data_dir_ / (info.table.name + ".log");
    table->log.reset(std::fopen(path.c_str(), "ab"));
    if (!table->log) throw StorageError("cannot open " + path.string() + ": " + errno_text());
  }
  tables_.emplace(info.table.id, std::move(table));
}

void RecordStore::replay(Table& table) {
  const auto path = *data_dir_ / (table.info.table.name + ".log");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return;

  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw StorageError("cannot read " + path.string());

  std::size_t offset = 0;
  while (offset + kHeaderSize <= bytes.size()) {
    const char* header = bytes.data() + offset;
    const auto op = static_cast<LogOp>(static_cast<std::uint8_t>(header[0]));
    const std::uint64_t p_value = get_le(header + 1, 8);
    const std::uint64_t length = get_le(header + 9, 4);
    if (op != LogOp::kInsert && op != LogOp::kUpdate && op != LogOp::kDelete) break;
    if (offset + kHeaderSize + length > bytes.size()) break;
    const std::string_view payload(bytes.data() + offset + kHeaderSize, length);

    // Our own counter never skips far ahead; a wild p_value means a damaged
    // file, not a sparse table.
    if (p_value == 0 || p_value > table.last_p_value + kMaxPValueGap) {
      throw StorageError(path.string() + ": implausible p_value " + std::to_string(p_value) + " at offset " +
                         std::to_string(offset));
    }
    if (op == LogOp::kDelete) {
      table.rows.erase(p_value);
    } else {
      auto fields = split_fields(payload);
      if (fields.size() != table.info.arity()) {
        throw StorageError(path.string() + ": entry for p_value " + std::to_string(p_value) +
                           " has " + std::to_string(fields.size()) + " fields, schema has " +
                           std::to_string(table.info.arity()));
      }
      table.rows.put(p_value, std::move(fields));
    }
    table.last_p_value = std::max(table.last_p_value, p_value);
    offset += kHeaderSize + length;
  }

  if (offset < bytes.size()) {
    table.discarded_tail = bytes.size() - offset;
    std::filesystem::resize_file(path, offset, ec);
    if (ec) throw StorageError("cannot truncate damaged tail of " + path.string() + ": " + ec.message());
  }
}

RecordStore::Table& RecordStore::table_for_write(TableIdValue id,
                                                 const std::vector<std::string>& values) {
  auto it = tables_.find(id);
  if (it == tables_.end()) throw ValidationError("unknown table id " + std::to_string(id));
  Table& table = *it->second;
  if (values.size() != table.info.arity()) {
    throw ValidationError("table '" + table.info.table.name + "' expects " +
                          std::to_string(table.info.arity()) + " fields, got " +
                          std::to_string(values.size()));
  }
  for (const auto& value : values) {
    if (value.find(kFieldSeparator) != std::string::npos) {
      throw ValidationError("field values may not contain the 0x1F separator");
    }
  }
  return table;
}

void RecordStore::append(Table& table, LogOp op, std::uint64_t p_value,
                         const std::vector<std::string>* values) {
  if (!table.log) return;
  if (table.failed) {
    throw StorageError("log for table '" + table.info.table.name + "' is unusable after a failed write");
  }
  std::string payload;
  if (values) {
    for (std::size_t i = 0; i < values->size(); ++i) {
      if (i) payload.push_back(kFieldSeparator);
      payload += (*values)[i];
    }
  }
  if (payload.size() > 0xFFFFFFFFu) throw ValidationError("record too large");

  std::string entry;
  entry.reserve(kHeaderSize + payload.size());
  entry.push_back(static_cast<char>(op));
  put_le(entry, p_value, 8);
  put_le(entry, payload.size(), 4);
  entry += payload;

  std::FILE* f = table.log.get();
  const bool written = std::fwrite(entry.data(), 1, entry.size(), f) == entry.size() &&
                       std::fflush(f) == 0 &&
                       (durability_ != Durability::kSync || ::fsync(::fileno(f)) == 0);
  if (!written) {
    table.failed = true;
    throw StorageError("write to log of table '" + table.info.table.name + "' failed: " + errno_text());
  }
}

DataPointer RecordStore::insert(TableIdValue table_id, std::vector<std::string> values) {
  Table& table = table_for_write(table_id, values);
  const std::uint64_t p_value = table.last_p_value + 1;
  append(table, LogOp::kInsert, p_value, &values);
  table.last_p_value = p_value;
  table.rows.put(p_value, std::move(values));
  return DataPointer{table_id, p_value};
}

const std::vector<std::string>* RecordStore::find(const DataPointer& pointer) const {
  auto table = tables_.find(pointer.table_id);
  if (table == tables_.end()) return nullptr;
  return table->second->rows.find(pointer.p_value);
}

std::optional<Record> RecordStore::retrieve(const DataPointer& pointer) const {
  if (const auto* fields = find(pointer)) return Record{pointer, *fields};
  return std::nullopt;
}

void RecordStore::update(const DataPointer& pointer, std::vector<std::string> values) {
  Table& table = table_for_write(pointer.table_id, values);
  auto* row = table.rows.find(pointer.p_value);
  if (!row) throw NotFoundError("no live record at " + to_string(pointer));
  append(table, LogOp::kUpdate, pointer.p_value, &values);
  *row = std::move(values);
}

bool RecordStore::remove(const DataPointer& pointer) {
  auto it = tables_.find(pointer.table_id);
  if (it == tables_.end()) return false;
  Table& table = *it->second;
  if (!table.rows.find(pointer.p_value)) return false;
  append(table, LogOp::kDelete, pointer.p_value, nullptr);
  table.rows.erase(pointer.p_value);
  return true;
}

std::size_t RecordStore::size() const {
  std::size_t total = 0;
  for (const auto& [id, table] : tables_) total += table->rows.live;
  return total;
}

std::size_t RecordStore::size(TableIdValue table) const {
  auto it = tables_.find(table);
  return it == tables_.end() ? 0 : it->second->rows.live;
}

std::vector<Record> RecordStore::records() const {
  std::vector<Record> out;
  out.reserve(size());
  for_each([&](const DataPointer& pointer, const std::vector<std::string>& fields) {
    out.push_back(Record{pointer, fields});
  });
  return out;
}

std::uintmax_t RecordStore::discarded_tail_bytes(TableIdValue table) const {
  auto it = tables_.find(table);
  return it == tables_.end() ? 0 : it->second->discarded_tail;
}

}  // namespace phonosearch
