#include "phonosearch/index.hpp"

#include <algorithm>

#include "phonosearch/errors.hpp"

namespace phonosearch {

PhoneticIndex::PhoneticIndex(const TableRegistry& registry, std::size_t max_code_length)
    : registry_(registry), max_code_length_(max_code_length) {
  if (max_code_length_ == 0) throw ConfigError("maximum code length must be positive");
}

CodeId PhoneticIndex::intern_code(std::string_view keycode) {
  auto [it, inserted] = code_ids_.try_emplace(std::string(keycode), static_cast<CodeId>(codes_.size()));
  if (inserted) codes_.push_back(CodeData{std::string(keycode), {}, 0, 0});
  return it->second;
}

WordId PhoneticIndex::intern_word(const phonetic::Word& word) {
  if (auto it = word_ids_.find(word.text()); it != word_ids_.end()) return it->second;
  const phonetic::CodePair pair = phonetic::encode(word, max_code_length_);
  const CodeId primary = intern_code(pair.primary.key());
  const CodeId secondary = intern_code(pair.secondary.key());
  const auto id = static_cast<WordId>(words_.size());
  words_.push_back(WordData{word.text(), primary, secondary, 0});
  word_ids_.emplace(word.text(), id);
  return id;
}

bool PhoneticIndex::add_posting(CodeId code, const Posting& posting) {
  auto& data = codes_[code];
  auto& list = data.postings;
  // Pointers are issued in ascending order, so appends dominate.
  auto pos = (list.empty() || list.back() < posting) ? list.end()
                                                     : std::lower_bound(list.begin(), list.end(), posting);
  if (pos != list.end() && *pos == posting) return false;
  list.insert(pos, posting);
  ++(posting.kind == CodeKind::kPrimary ? data.primary_postings : data.secondary_postings);
  ++posting_count_;
  return true;
}

bool PhoneticIndex::erase_posting(CodeId code, const Posting& posting) {
  auto& data = codes_[code];
  auto& list = data.postings;
  auto pos = std::lower_bound(list.begin(), list.end(), posting);
  if (pos == list.end() || *pos != posting) return false;
  list.erase(pos);
  --(posting.kind == CodeKind::kPrimary ? data.primary_postings : data.secondary_postings);
  --posting_count_;
  return true;
}

std::size_t PhoneticIndex::index_record(const Record& record, const DataPointer& pointer) {
  const TableInfo* table = registry_.find(pointer.table_id);
  if (!table) throw ValidationError("table id " + std::to_string(pointer.table_id) + " is not registered");
  if (record.fields.size() != table->arity()) {
    throw ValidationError("record has " + std::to_string(record.fields.size()) + " fields, table '" +
                          table->table.name + "' has " + std::to_string(table->arity()));
  }
  std::vector<std::pair<phonetic::Word, std::uint16_t>> words;
  for (std::size_t field = 0; field < record.fields.size(); ++field) {
    for (auto& word : phonetic::tokenize(record.fields[field])) {
      words.emplace_back(std::move(word), static_cast<std::uint16_t>(field));
    }
  }
  deindex_record(pointer);
  if (arena_garbage_ > (1u << 16) && arena_garbage_ > arena_.size() / 2) compact_arena();
  if (arena_.size() + words.size() >= kNotIndexed) throw StorageError("token arena is full");

  std::vector<TokenRef> tokens;
  tokens.reserve(words.size());
  std::size_t added = 0;
  for (const auto& [word, position] : words) {
    const WordId id = intern_word(word);
    WordData& data = words_[id];
    ++data.live_tokens;
    added += add_posting(data.primary, Posting{pointer, position, CodeKind::kPrimary});
    if (data.secondary != data.primary) {
      added += add_posting(data.secondary, Posting{pointer, position, CodeKind::kSecondary});
    }
    tokens.push_back(TokenRef{id, data.primary, data.secondary, position});
  }
  ForwardSlot* slot = forward_slot(pointer, true);
  slot->offset = static_cast<std::uint32_t>(arena_.size());
  slot->count = static_cast<std::uint32_t>(tokens.size());
  arena_.insert(arena_.end(), tokens.begin(), tokens.end());
  ++record_count_;
  return added;
}

std::size_t PhoneticIndex::deindex_record(const DataPointer& pointer) {
  ForwardSlot* slot = forward_slot(pointer, false);
  if (!slot || slot->offset == kNotIndexed) return 0;
  std::size_t removed = 0;
  for (std::uint32_t i = 0; i < slot->count; ++i) {
    const TokenRef& token = arena_[slot->offset + i];
    --words_[token.word].live_tokens;
    removed += erase_posting(token.primary, Posting{pointer, token.field_position, CodeKind::kPrimary});
    if (token.secondary != token.primary) {
      removed += erase_posting(token.secondary, Posting{pointer, token.field_position, CodeKind::kSecondary});
    }
  }
  arena_garbage_ += slot->count;
  *slot = ForwardSlot{};
  --record_count_;
  return removed;
}

void PhoneticIndex::compact_arena() {
  std::vector<TokenRef> packed;
  packed.reserve(arena_.size() - arena_garbage_);
  for (auto& slots : forward_) {
    for (auto& slot : slots) {
      if (slot.offset == kNotIndexed) continue;
      const auto offset = static_cast<std::uint32_t>(packed.size());
      packed.insert(packed.end(), arena_.begin() + slot.offset, arena_.begin() + slot.offset + slot.count);
      slot.offset = offset;
    }
  }
  arena_ = std::move(packed);
  arena_garbage_ = 0;
}

PhoneticIndex::ForwardSlot* PhoneticIndex::forward_slot(const DataPointer& pointer, bool create) {
  if (pointer.p_value == 0) {
    if (create) throw ValidationError("p_value 0 is never issued");
    return nullptr;
  }
  if (pointer.table_id >= forward_.size()) {
    if (!create) return nullptr;
    forward_.resize(pointer.table_id + 1u);
  }
  auto& slots = forward_[pointer.table_id];
  if (pointer.p_value > slots.size()) {
    if (!create) return nullptr;
    slots.resize(pointer.p_value);
  }
  return &slots[pointer.p_value - 1];
}

std::optional<CodeId> PhoneticIndex::find_code(std::string_view keycode) const {
  auto it = code_ids_.find(std::string(keycode));
  if (it == code_ids_.end()) return std::nullopt;
  return it->second;
}

PostingList PhoneticIndex::lookup(std::string_view keycode) const {
  const auto id = find_code(keycode);
  if (!id) return PostingList{CodeEntry{std::string(keycode), 0}, {}};
  return PostingList{CodeEntry{codes_[*id].keycode, *id}, codes_[*id].postings};
}

const PhoneticIndex::WordData* PhoneticIndex::find_word(const std::string& text) const {
  auto it = word_ids_.find(text);
  return it == word_ids_.end() ? nullptr : &words_[it->second];
}

std::optional<WordId> PhoneticIndex::find_word_id(const std::string& text) const {
  auto it = word_ids_.find(text);
  if (it == word_ids_.end()) return std::nullopt;
  return it->second;
}

phonetic::CodePair PhoneticIndex::codes_for(const phonetic::Word& word) const {
  if (const WordData* data = find_word(word.text())) {
    auto code_of = [&](CodeId id) {
      const std::string& key = codes_[id].keycode;
      return key == phonetic::kEmptyCodeKey ? phonetic::PhoneticCode() : phonetic::PhoneticCode(key);
    };
    return phonetic::CodePair{code_of(data->primary), code_of(data->secondary)};
  }
  return phonetic::encode(word, max_code_length_);
}

std::vector<std::pair<std::string, Posting>> PhoneticIndex::contents() const {
  std::vector<std::pair<std::string, Posting>> out;
  out.reserve(posting_count_);
  for (const auto& data : codes_) {
    for (const auto& posting : data.postings) out.emplace_back(data.keycode, posting);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void PhoneticIndex::clear() {
  codes_.clear();
  code_ids_.clear();
  words_.clear();
  word_ids_.clear();
  forward_.clear();
  arena_.clear();
  arena_garbage_ = 0;
  record_count_ = 0;
  posting_count_ = 0;
}

}  // namespace phonosearch
