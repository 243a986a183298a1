#include "phonosearch/tables.hpp"

#include <set>

#include "phonosearch/errors.hpp"

namespace phonosearch {

TableInfo citizen_table() {
  return TableInfo{
      TableId{kCitizenTableId, "citizen"},
      "Storing the information of citizen",
      {"name", "division", "district", "upazila", "union", "village", "occupation", "phone"}};
}

TableId TableRegistry::register_table(std::string name, TableIdValue id,
                                      std::vector<std::string> field_names,
                                      std::string description) {
  return register_table(
      TableInfo{TableId{id, std::move(name)}, std::move(description), std::move(field_names)});
}

TableId TableRegistry::register_table(TableInfo info) {
  const auto& [id, name] = info.table;
  if (name.empty()) throw ConfigError("table name must not be empty");
  if (by_id_.contains(id)) throw ConfigError("table id " + std::to_string(id) + " already registered");
  if (by_name_.contains(name)) throw ConfigError("table name '" + name + "' already registered");
  if (info.field_names.empty()) throw ConfigError("table '" + name + "' needs at least one field");
  // Postings store the field position in 16 bits.
  if (info.field_names.size() > 65536) throw ConfigError("table '" + name + "' has too many fields");
  std::set<std::string_view> seen;
  for (const auto& field : info.field_names) {
    if (field.empty() || !seen.insert(field).second) {
      throw ConfigError("table '" + name + "' has an empty or repeated field name");
    }
  }
  TableId result = info.table;
  by_name_.emplace(name, id);
  by_id_.emplace(id, std::move(info));
  return result;
}

const TableInfo* TableRegistry::find(TableIdValue id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &it->second;
}

const TableInfo* TableRegistry::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : find(it->second);
}

std::vector<const TableInfo*> TableRegistry::tables() const {
  std::vector<const TableInfo*> out;
  out.reserve(by_id_.size());
  for (const auto& [id, info] : by_id_) out.push_back(&info);
  return out;
}

std::string to_string(const DataPointer& pointer) {
  return "(" + std::to_string(pointer.table_id) + ", " + std::to_string(pointer.p_value) + ")";
}

}  // namespace phonosearch
