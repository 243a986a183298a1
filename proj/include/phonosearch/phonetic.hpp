#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Double Metaphone encoding plus the tokenizer that feeds it.
//
// Every word stored in or searched against the engine goes through
// tokenize() and encode(). Soundex, Phonix, stemming and the original
// single-code Metaphone were considered and rejected: they either produce
// too few distinct codes for large name sets or cannot express the
// alternate pronunciations that let "Smith" meet "Schmidt".
namespace phonosearch::phonetic {

inline constexpr std::size_t kDefaultMaxCodeLength = 4;

// Index key used for tokens whose encoding comes out empty (e.g. "H").
inline constexpr std::string_view kEmptyCodeKey = "_";

// A normalized token: non-empty, uppercase A-Z only.
class Word {
 public:
  // Returns nullopt unless `text` already satisfies the invariant.
  static std::optional<Word> from_normalized(std::string text);

  const std::string& text() const noexcept { return text_; }
  std::size_t size() const noexcept { return text_.size(); }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  explicit Word(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

// A string over the Double Metaphone output alphabet
// {A F H J K L M N P R S T W X 0}. May be empty.
class PhoneticCode {
 public:
  PhoneticCode() = default;
  // Throws ValidationError if `symbols` contains a character outside the
  // output alphabet.
  explicit PhoneticCode(std::string symbols);

  static bool is_symbol(char c) noexcept;

  const std::string& str() const noexcept { return symbols_; }
  bool empty() const noexcept { return symbols_.empty(); }
  std::size_t size() const noexcept { return symbols_.size(); }

  // The string this code is filed under in the index.
  std::string_view key() const noexcept {
    return symbols_.empty() ? kEmptyCodeKey : std::string_view(symbols_);
  }

  friend bool operator==(const PhoneticCode&, const PhoneticCode&) = default;
  friend auto operator<=>(const PhoneticCode&, const PhoneticCode&) = default;

 private:
  std::string symbols_;
};

struct CodePair {
  PhoneticCode primary;
  PhoneticCode secondary;

  bool ambiguous() const noexcept { return primary != secondary; }

  friend bool operator==(const CodePair&, const CodePair&) = default;
};

// Uppercases, folds Latin accented letters to their base letter where a
// single-letter fold exists and drops every other character. Returns
// nullopt when nothing is left.
std::optional<Word> normalize(std::string_view raw_token);

// Splits on runs of non-letters (a letter is A-Z, a-z or a foldable accented
// Latin letter) and normalizes each piece. Order and duplicates are kept.
std::vector<Word> tokenize(std::string_view text);

// Double Metaphone, following Philips' published rule set. Codes are capped
// at `max_length` symbols; throws ValidationError when max_length == 0.
CodePair encode(const Word& word, std::size_t max_length = kDefaultMaxCodeLength);

}  // namespace phonosearch::phonetic
