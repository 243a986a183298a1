#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phonosearch/phonetic.hpp"
#include "phonosearch/record_store.hpp"
#include "phonosearch/tables.hpp"

namespace phonosearch {

using CodeId = std::uint32_t;
using WordId = std::uint32_t;

enum class CodeKind : std::uint8_t { kPrimary = 0, kSecondary = 1 };

struct Posting {
  DataPointer pointer;
  std::uint16_t field_position = 0;
  CodeKind kind = CodeKind::kPrimary;

  friend bool operator==(const Posting&, const Posting&) = default;
  friend auto operator<=>(const Posting&, const Posting&) = default;
};

struct CodeEntry {
  std::string keycode;
  CodeId code_id = 0;

  friend bool operator==(const CodeEntry&, const CodeEntry&) = default;
};

// Postings filed under one code, sorted by (pointer, field_position, kind).
struct PostingList {
  CodeEntry code;
  std::vector<Posting> postings;

  bool empty() const noexcept { return postings.empty(); }
};

// One token of an indexed record with its codes already resolved.
struct TokenRef {
  WordId word = 0;
  CodeId primary = 0;
  CodeId secondary = 0;
  std::uint16_t field_position = 0;
};

// Phonetic inverted index over the record store.
//
// Two structures back it: a code dictionary (keycode -> CodeId) and a
// posting map (CodeId -> sorted postings). Every token of every field is
// filed under its primary code and, when it differs, its secondary code;
// tokens that encode to nothing are filed under "_". A per-record list of
// resolved tokens lets the query engine score a candidate without
// re-encoding its fields.
//
// CodeIds and WordIds are dense and stable for the life of the index; codes
// whose posting lists drain stay in the dictionary.
//
// Not synchronized; SearchDatabase serializes writers against readers.
class PhoneticIndex {
 public:
  struct CodeData {
    std::string keycode;
    std::vector<Posting> postings;
    std::uint32_t primary_postings = 0;
    std::uint32_t secondary_postings = 0;
  };

  struct WordData {
    std::string text;
    CodeId primary = 0;
    CodeId secondary = 0;
    // Number of indexed record tokens spelled exactly like this word.
    std::uint32_t live_tokens = 0;
  };

  explicit PhoneticIndex(const TableRegistry& registry,
                         std::size_t max_code_length = phonetic::kDefaultMaxCodeLength);

  // Files every token of `record` under `pointer`. Re-indexing a pointer
  // replaces its previous postings. Returns the number of postings added.
  // Throws ValidationError for an unregistered table or wrong arity.
  std::size_t index_record(const Record& record, const DataPointer& pointer);
  std::size_t index_record(const Record& record) { return index_record(record, record.pointer); }

  // Removes every posting that references `pointer`. Idempotent; returns the
  // number of postings removed.
  std::size_t deindex_record(const DataPointer& pointer);

  PostingList lookup(const phonetic::PhoneticCode& code) const { return lookup(code.key()); }
  PostingList lookup(std::string_view keycode) const;

  std::optional<CodeId> find_code(std::string_view keycode) const;
  const CodeData& code(CodeId id) const { return codes_[id]; }
  std::size_t code_count() const noexcept { return codes_.size(); }

  const WordData* find_word(const std::string& text) const;
  std::optional<WordId> find_word_id(const std::string& text) const;
  const WordData& word(WordId id) const { return words_[id]; }

  // Resolved tokens of an indexed record, or nullptr.
  std::optional<std::span<const TokenRef>> tokens_of(const DataPointer& pointer) const {
    const ForwardSlot* slot = forward_slot(pointer);
    if (!slot || slot->offset == kNotIndexed) return std::nullopt;
    return std::span<const TokenRef>(arena_.data() + slot->offset, slot->count);
  }

  // Hints that tokens_of(pointer) is coming.
  void prefetch_tokens(const DataPointer& pointer) const noexcept {
    const ForwardSlot* slot = forward_slot(pointer);
    if (slot && slot->offset != kNotIndexed) __builtin_prefetch(arena_.data() + slot->offset);
  }
  std::size_t record_count() const noexcept { return record_count_; }

  // Codes of a word as the index files them. Uses the word cache when the
  // word has been seen.
  phonetic::CodePair codes_for(const phonetic::Word& word) const;

  std::size_t max_code_length() const noexcept { return max_code_length_; }
  std::size_t posting_count() const noexcept { return posting_count_; }

  // Every (keycode, posting) pair, sorted. Used to compare indexes.
  std::vector<std::pair<std::string, Posting>> contents() const;

  void clear();

 private:
  CodeId intern_code(std::string_view keycode);
  WordId intern_word(const phonetic::Word& word);
  bool add_posting(CodeId code, const Posting& posting);
  bool erase_posting(CodeId code, const Posting& posting);

  const TableRegistry& registry_;
  std::size_t max_code_length_;
  std::vector<CodeData> codes_;
  std::unordered_map<std::string, CodeId> code_ids_;
  std::vector<WordData> words_;
  std::unordered_map<std::string, WordId> word_ids_;
  static constexpr std::uint32_t kNotIndexed = UINT32_MAX;

  // Where a record's tokens sit in arena_. Small, so the slot arrays stay
  // cache resident and scoring a record costs one trip to memory.
  struct ForwardSlot {
    std::uint32_t offset = kNotIndexed;
    std::uint32_t count = 0;
  };
  ForwardSlot* forward_slot(const DataPointer& pointer, bool create);
  const ForwardSlot* forward_slot(const DataPointer& pointer) const noexcept {
    if (pointer.p_value == 0 || pointer.table_id >= forward_.size()) return nullptr;
    const auto& slots = forward_[pointer.table_id];
    return pointer.p_value > slots.size() ? nullptr : &slots[pointer.p_value - 1];
  }
  void compact_arena();

  // Per table id, slot p_value - 1; dense like the store's rows.
  std::vector<std::vector<ForwardSlot>> forward_;
  std::vector<TokenRef> arena_;
  // Arena entries no slot points at any more.
  std::size_t arena_garbage_ = 0;
  std::size_t record_count_ = 0;
  std::size_t posting_count_ = 0;
};

}  // namespace phonosearch
