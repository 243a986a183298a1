#include "phonosearch/database.hpp"

#include "phonosearch/errors.hpp"

namespace phonosearch {

namespace {

RecordStore make_store(const DatabaseConfig& config) {
  if (config.data_dir) return RecordStore(*config.data_dir, config.durability);
  return RecordStore();
}

}  // namespace

SearchDatabase::SearchDatabase(DatabaseConfig config)
    : config_(std::move(config)),
      store_(make_store(config_)),
      index_(registry_, config_.max_code_length),
      engine_(index_, store_, config_.engine) {
  for (const auto& table : config_.tables) register_table(table);
}

std::shared_lock<std::shared_mutex> SearchDatabase::read_lock() const {
  std::lock_guard gate(turnstile_);
  return std::shared_lock(mutex_);
}

std::unique_lock<std::shared_mutex> SearchDatabase::write_lock() {
  std::lock_guard gate(turnstile_);
  return std::unique_lock(mutex_);
}

TableId SearchDatabase::register_table(TableInfo info) {
  auto lock = write_lock();
  const TableId id = registry_.register_table(info);
  store_.open_table(*registry_.find(id.id));
  store_.for_each([&](const DataPointer& pointer, const std::vector<std::string>& fields) {
    if (pointer.table_id == id.id) index_.index_record(Record{pointer, fields});
  });
  return id;
}

std::optional<TableInfo> SearchDatabase::table(std::string_view name) const {
  auto lock = read_lock();
  const TableInfo* info = registry_.find(name);
  return info ? std::optional<TableInfo>(*info) : std::nullopt;
}

std::optional<TableInfo> SearchDatabase::table(TableIdValue id) const {
  auto lock = read_lock();
  const TableInfo* info = registry_.find(id);
  return info ? std::optional<TableInfo>(*info) : std::nullopt;
}

std::vector<TableInfo> SearchDatabase::tables() const {
  auto lock = read_lock();
  std::vector<TableInfo> out;
  for (const TableInfo* info : registry_.tables()) out.push_back(*info);
  return out;
}

DataPointer SearchDatabase::insert(TableIdValue table, std::vector<std::string> values) {
  auto lock = write_lock();
  const DataPointer pointer = store_.insert(table, std::move(values));
  index_.index_record(Record{pointer, *store_.find(pointer)});
  return pointer;
}

std::optional<Record> SearchDatabase::retrieve(const DataPointer& pointer) const {
  auto lock = read_lock();
  return store_.retrieve(pointer);
}

void SearchDatabase::update(const DataPointer& pointer, std::vector<std::string> values) {
  auto lock = write_lock();
  store_.update(pointer, std::move(values));
  index_.deindex_record(pointer);
  index_.index_record(Record{pointer, *store_.find(pointer)});
}

bool SearchDatabase::remove(const DataPointer& pointer) {
  auto lock = write_lock();
  if (!store_.remove(pointer)) return false;
  index_.deindex_record(pointer);
  return true;
}

ResultSet SearchDatabase::search(const Query& query) const {
  auto lock = read_lock();
  return engine_.search(query);
}

ResultSet SearchDatabase::scan(const Query& query) const {
  auto lock = read_lock();
  return engine_.scan(query);
}

CandidateSet SearchDatabase::candidates(const Query& query) const {
  auto lock = read_lock();
  return engine_.candidates(query);
}

std::size_t SearchDatabase::size() const {
  auto lock = read_lock();
  return store_.size();
}

void SearchDatabase::rebuild_index() {
  auto lock = write_lock();
  index_.clear();
  store_.for_each([&](const DataPointer& pointer, const std::vector<std::string>& fields) {
    index_.index_record(Record{pointer, fields});
  });
}

}  // namespace phonosearch
