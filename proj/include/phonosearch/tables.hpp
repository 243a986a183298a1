#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace phonosearch {

using TableIdValue = std::uint16_t;

// Id 0 is reserved for the citizen table.
inline constexpr TableIdValue kCitizenTableId = 0;

// Locates one row: the table it lives in plus its primary key value.
struct DataPointer {
  TableIdValue table_id = 0;
  std::uint64_t p_value = 0;

  friend bool operator==(const DataPointer&, const DataPointer&) = default;
  friend auto operator<=>(const DataPointer&, const DataPointer&) = default;
};

struct TableId {
  TableIdValue id = 0;
  std::string name;

  friend bool operator==(const TableId&, const TableId&) = default;
};

// Everything known about a registered table, including the ordered field
// names its records carry.
struct TableInfo {
  TableId table;
  std::string description;
  std::vector<std::string> field_names;

  std::size_t arity() const noexcept { return field_names.size(); }
};

// The eight-column citizen layout seen in the result listings.
TableInfo citizen_table();

class TableRegistry {
 public:
  // Throws ConfigError on a duplicate id or name, an empty name, or an
  // invalid field list (empty or repeated field names).
  TableId register_table(std::string name, TableIdValue id, std::vector<std::string> field_names,
                         std::string description = {});
  TableId register_table(TableInfo info);

  const TableInfo* find(TableIdValue id) const;
  const TableInfo* find(std::string_view name) const;
  bool contains(TableIdValue id) const { return find(id) != nullptr; }

  // Registered tables in ascending id order.
  std::vector<const TableInfo*> tables() const;

 private:
  std::map<TableIdValue, TableInfo> by_id_;
  std::map<std::string, TableIdValue, std::less<>> by_name_;
};

std::string to_string(const DataPointer& pointer);

}  // namespace phonosearch

template <>
struct std::hash<phonosearch::DataPointer> {
  std::size_t operator()(const phonosearch::DataPointer& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.p_value * 0x9E3779B97F4A7C15ULL ^ p.table_id);
  }
};
