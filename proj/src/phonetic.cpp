#include "phonosearch/phonetic.hpp"

#include <algorithm>
#include <array>
#include <initializer_list>

#include "phonosearch/errors.hpp"

namespace phonosearch::phonetic {

namespace {

// Single-letter folds for U+00C0..U+017F; '.' means "no fold, drop it".
constexpr std::string_view kLatin1Folds =
    "AAAAAA.CEEEEIIII"
    "DNOOOOO.OUUUUY.."
    "AAAAAA.CEEEEIIII"
    "DNOOOOO.OUUUUY.Y";
constexpr std::string_view kLatinExtendedAFolds =
    "AAAAAACCCCCCCCDDDDEEEEEEEEEEGGGGGGGGHHHHIIIIIIIIII..JJKKK"
    "LLLLLLLLLLNNNNNNNNNOOOOOO..RRRRRRSSSSSSSSTTTTTTUUUUUUUUUUUU"
    "WWYYYZZZZZZS";
static_assert(kLatin1Folds.size() == 0x40);
static_assert(kLatinExtendedAFolds.size() == 0x80);

// Decodes one UTF-8 sequence starting at text[pos]. Malformed input yields
// U+FFFD and consumes a single byte.
char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i <= extra; ++i) {
    const auto byte = static_cast<unsigned char>(text[pos + i]);
    if ((byte & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (byte & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

// Uppercase A-Z for a letter, '\0' for anything that is not one.
char fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return static_cast<char>(cp);
  if (cp >= 'a' && cp <= 'z') return static_cast<char>(cp - 'a' + 'A');
  char folded = '.';
  if (cp >= 0xC0 && cp < 0x100) {
    folded = kLatin1Folds[cp - 0xC0];
  } else if (cp >= 0x100 && cp < 0x180) {
    folded = kLatinExtendedAFolds[cp - 0x100];
  }
  return folded == '.' ? '\0' : folded;
}

bool is_vowel(char c) {
  switch (c) {
    case 'A':
    case 'E':
    case 'I':
    case 'O':
    case 'U':
    case 'Y':
      return true;
    default:
      return false;
  }
}

// One encoding pass over a single word. Positions are signed because many
// rules look behind the cursor; lookups outside the padded word never match.
class DoubleMetaphone {
 public:
  DoubleMetaphone(std::string_view word, std::size_t max_length)
      : length_(static_cast<int>(word.size())),
        last_(length_ - 1),
        max_length_(max_length),
        // Several rules test for a trailing blank ("IER ", "VAN "), so the
        // word is padded the same way the reference algorithm pads it.
        text_(std::string(word) + "     "),
        slavo_germanic_(text_.find('W') != std::string::npos ||
                        text_.find('K') != std::string::npos ||
                        text_.find("CZ") != std::string::npos) {}

  CodePair run();

 private:
  char at(int pos) const {
    if (pos < 0 || pos >= static_cast<int>(text_.size())) return '\0';
    return text_[static_cast<std::size_t>(pos)];
  }

  bool vowel_at(int pos) const { return is_vowel(at(pos)); }

  bool matches(int start, std::initializer_list<std::string_view> options) const {
    if (start < 0 || start >= static_cast<int>(text_.size())) return false;
    const std::string_view rest = std::string_view(text_).substr(static_cast<std::size_t>(start));
    return std::any_of(options.begin(), options.end(),
                       [&](std::string_view opt) { return rest.starts_with(opt); });
  }

  void add(std::string_view both) { add(both, both); }
  void add(std::string_view primary, std::string_view secondary) {
    append_capped(primary_, primary);
    append_capped(secondary_, secondary);
  }
  void append_capped(std::string& out, std::string_view symbols) const {
    const std::size_t room = max_length_ > out.size() ? max_length_ - out.size() : 0;
    out.append(symbols.substr(0, std::min(room, symbols.size())));
  }

  bool full() const { return primary_.size() >= max_length_ && secondary_.size() >= max_length_; }

  void on_c();
  void on_d();
  void on_g();
  void on_j();
  void on_l();
  void on_s();
  void on_t();
  void on_w();

  int length_;
  int last_;
  std::size_t max_length_;
  std::string text_;
  bool slavo_germanic_;
  int pos_ = 0;
  std::string primary_;
  std::string secondary_;
};

CodePair DoubleMetaphone::run() {
  // Silent leading consonant pairs.
  if (matches(0, {"GN", "KN", "PN", "WR", "PS"})) pos_ = 1;
  // Initial X sounds like Z ("Xavier"), which maps to S.
  if (at(0) == 'X') {
    add("S");
    pos_ = 1;
  }

  while (!full() && pos_ < length_) {
    const char c = at(pos_);
    switch (c) {
      case 'A':
      case 'E':
      case 'I':
      case 'O':
      case 'U':
      case 'Y':
        if (pos_ == 0) add("A");
        pos_ += 1;
        break;
      case 'B':
        // "-mb" as in "dumb" is consumed by the M rule.
        add("P");
        pos_ += at(pos_ + 1) == 'B' ? 2 : 1;
        break;
      case 'C':
        on_c();
        break;
      case 'D':
        on_d();
        break;
      case 'F':
        add("F");
        pos_ += at(pos_ + 1) == 'F' ? 2 : 1;
        break;
      case 'G':
        on_g();
        break;
      case 'H':
        // Kept only when initial or between vowels, and before a vowel.
        if ((pos_ == 0 || vowel_at(pos_ - 1)) && vowel_at(pos_ + 1)) {
          add("H");
          pos_ += 2;
        } else {
          pos_ += 1;
        }
        break;
      case 'J':
        on_j();
        break;
      case 'K':
        add("K");
        pos_ += at(pos_ + 1) == 'K' ? 2 : 1;
        break;
      case 'L':
        on_l();
        break;
      case 'M':
        // "dumb", "thumb", "plumber": the B is silent.
        if ((matches(pos_ - 1, {"UMB"}) && (pos_ + 1 == last_ || matches(pos_ + 2, {"ER"}))) ||
            at(pos_ + 1) == 'M') {
          pos_ += 2;
        } else {
          pos_ += 1;
        }
        add("M");
        break;
      case 'N':
        add("N");
        pos_ += at(pos_ + 1) == 'N' ? 2 : 1;
        break;
      case 'P':
        if (at(pos_ + 1) == 'H') {
          add("F");
          pos_ += 2;
          break;
        }
        // "campbell", "raspberry"
        pos_ += matches(pos_ + 1, {"P", "B"}) ? 2 : 1;
        add("P");
        break;
      case 'Q':
        add("K");
        pos_ += at(pos_ + 1) == 'Q' ? 2 : 1;
        break;
      case 'R':
        // French "Rogier", but not "Hochmeier".
        if (pos_ == last_ && !slavo_germanic_ && matches(pos_ - 2, {"IE"}) &&
            !matches(pos_ - 4, {"ME", "MA"})) {
          add("", "R");
        } else {
          add("R");
        }
        pos_ += at(pos_ + 1) == 'R' ? 2 : 1;
        break;
      case 'S':
        on_s();
        break;
      case 'T':
        on_t();
        break;
      case 'V':
        add("F");
        pos_ += at(pos_ + 1) == 'V' ? 2 : 1;
        break;
      case 'W':
        on_w();
        break;
      case 'X':
        // French "Breaux": a final X after AU/OU/IAU/EAU is silent.
        if (!(pos_ == last_ &&
              (matches(pos_ - 3, {"IAU", "EAU"}) || matches(pos_ - 2, {"AU", "OU"})))) {
          add("KS");
        }
        pos_ += matches(pos_ + 1, {"C", "X"}) ? 2 : 1;
        break;
      case 'Z':
        // Pinyin "Zhao".
        if (at(pos_ + 1) == 'H') {
          add("J");
          pos_ += 2;
          break;
        }
        if (matches(pos_ + 1, {"ZO", "ZI", "ZA"}) ||
            (slavo_germanic_ && pos_ > 0 && at(pos_ - 1) != 'T')) {
          add("S", "TS");
        } else {
          add("S");
        }
        pos_ += at(pos_ + 1) == 'Z' ? 2 : 1;
        break;
      default:
        pos_ += 1;
        break;
    }
  }

  return CodePair{PhoneticCode(std::move(primary_)), PhoneticCode(std::move(secondary_))};
}

void DoubleMetaphone::on_c() {
  // Germanic "-ach-" as in "Bacher", "Macher", but not "-achi-"/"-ache-".
  if (pos_ > 1 && !vowel_at(pos_ - 2) && matches(pos_ - 1, {"ACH"}) && at(pos_ + 2) != 'I' &&
      (at(pos_ + 2) != 'E' || matches(pos_ - 2, {"BACHER", "MACHER"}))) {
    add("K");
    pos_ += 2;
    return;
  }
  if (pos_ == 0 && matches(pos_, {"CAESAR"})) {
    add("S");
    pos_ += 2;
    return;
  }
  // Italian "Chianti".
  if (matches(pos_, {"CHIA"})) {
    add("K");
    pos_ += 2;
    return;
  }
  if (matches(pos_, {"CH"})) {
    // "Michael"
    if (pos_ > 0 && matches(pos_, {"CHAE"})) {
      add("K", "X");
      pos_ += 2;
      return;
    }
    // Greek roots: "chemistry", "chorus", but not "chore".
    if (pos_ == 0 &&
        (matches(pos_ + 1, {"HARAC", "HARIS"}) || matches(pos_ + 1, {"HOR", "HYM", "HIA", "HEM"})) &&
        !matches(0, {"CHORE"})) {
      add("K");
      pos_ += 2;
      return;
    }
    // Germanic or Greek CH pronounced like KH: "Wachtler", "Wechsler",
    // "orchestra", "architect" (but not "Tichner", "arch", "orchid").
    if (matches(0, {"VAN ", "VON ", "SCH"}) || matches(pos_ - 2, {"ORCHES", "ARCHIT", "ORCHID"}) ||
        matches(pos_ + 2, {"T", "S"}) ||
        ((matches(pos_ - 1, {"A", "O", "U", "E"}) || pos_ == 0) &&
         matches(pos_ + 2, {"L", "R", "N", "M", "B", "H", "F", "V", "W", " "}))) {
      add("K");
    } else if (pos_ > 0) {
      if (matches(0, {"MC"})) {
        add("K");  // "McHugh"
      } else {
        add("X", "K");
      }
    } else {
      add("X");
    }
    pos_ += 2;
    return;
  }
  // "Czerny", but not "-wicz".
  if (matches(pos_, {"CZ"}) && !matches(pos_ - 2, {"WICZ"})) {
    add("S", "X");
    pos_ += 2;
    return;
  }
  // "Focaccia"
  if (matches(pos_ + 1, {"CIA"})) {
    add("X");
    pos_ += 3;
    return;
  }
  // Double C, but not "McClellan".
  if (matches(pos_, {"CC"}) && !(pos_ == 1 && at(0) == 'M')) {
    // "Bellocchio" but not "Bacchus".
    if (matches(pos_ + 2, {"I", "E", "H"}) && !matches(pos_ + 2, {"HU"})) {
      // "accident", "accede", "succeed" versus Italian "Bertucci".
      if ((pos_ == 1 && at(pos_ - 1) == 'A') || matches(pos_ - 1, {"UCCEE", "UCCES"})) {
        add("KS");
      } else {
        add("X");
      }
      pos_ += 3;
    } else {
      add("K");
      pos_ += 2;
    }
    return;
  }
  if (matches(pos_, {"CK", "CG", "CQ"})) {
    add("K");
    pos_ += 2;
    return;
  }
  if (matches(pos_, {"CI", "CE", "CY"})) {
    if (matches(pos_, {"CIO", "CIE", "CIA"})) {
      add("S", "X");
    } else {
      add("S");
    }
    pos_ += 2;
    return;
  }
  add("K");
  // "Mac Caffrey", "Mac Gregor"
  if (matches(pos_ + 1, {" C", " Q", " G"})) {
    pos_ += 3;
  } else if (matches(pos_ + 1, {"C", "K", "Q"}) && !matches(pos_ + 1, {"CE", "CI"})) {
    pos_ += 2;
  } else {
    pos_ += 1;
  }
}

void DoubleMetaphone::on_d() {
  if (matches(pos_, {"DG"})) {
    if (matches(pos_ + 2, {"I", "E", "Y"})) {
      add("J");  // "edge"
      pos_ += 3;
    } else {
      add("TK");  // "Edgar"
      pos_ += 2;
    }
    return;
  }
  add("T");
  pos_ += matches(pos_, {"DT", "DD"}) ? 2 : 1;
}

void DoubleMetaphone::on_g() {
  if (at(pos_ + 1) == 'H') {
    if (pos_ > 0 && !vowel_at(pos_ - 1)) {
      add("K");
      pos_ += 2;
      return;
    }
    // "Ghislane", "Ghiradelli"
    if (pos_ == 0) {
      add(at(pos_ + 2) == 'I' ? "J" : "K");
      pos_ += 2;
      return;
    }
    // Parker's rule: silent GH after B/H/D ("Hugh", "bough", "Broughton").
    if ((pos_ > 1 && matches(pos_ - 2, {"B", "H", "D"})) ||
        (pos_ > 2 && matches(pos_ - 3, {"B", "H", "D"})) ||
        (pos_ > 3 && matches(pos_ - 4, {"B", "H"}))) {
      pos_ += 2;
      return;
    }
    // "laugh", "McLaughlin", "cough", "Gough", "rough", "tough"
    if (pos_ > 2 && at(pos_ - 1) == 'U' && matches(pos_ - 3, {"C", "G", "L", "R", "T"})) {
      add("F");
    } else if (pos_ > 0 && at(pos_ - 1) != 'I') {
      add("K");
    }
    pos_ += 2;
    return;
  }

  if (at(pos_ + 1) == 'N') {
    if (pos_ == 1 && vowel_at(0) && !slavo_germanic_) {
      add("KN", "N");
    } else if (!matches(pos_ + 2, {"EY"}) && at(pos_ + 1) != 'Y' && !slavo_germanic_) {
      add("N", "KN");  // not e.g. "Cagney"
    } else {
      add("KN");
    }
    pos_ += 2;
    return;
  }
  // "Tagliaro"
  if (matches(pos_ + 1, {"LI"}) && !slavo_germanic_) {
    add("KL", "L");
    pos_ += 2;
    return;
  }
  // -ges-, -gep-, -gel-, -gie- at the start of the word.
  if (pos_ == 0 && (at(pos_ + 1) == 'Y' || matches(pos_ + 1, {"ES", "EP", "EB", "EL", "EY", "IB",
                                                             "IL", "IN", "IE", "EI", "ER"}))) {
    add("K", "J");
    pos_ += 2;
    return;
  }
  // -ger-, -gy-
  if ((matches(pos_ + 1, {"ER"}) || at(pos_ + 1) == 'Y') &&
      !matches(0, {"DANGER", "RANGER", "MANGER"}) && !matches(pos_ - 1, {"E", "I"}) &&
      !matches(pos_ - 1, {"RGY", "OGY"})) {
    add("K", "J");
    pos_ += 2;
    return;
  }
  // Italian "Biaggi"
  if (matches(pos_ + 1, {"E", "I", "Y"}) || matches(pos_ - 1, {"AGGI", "OGGI"})) {
    if (matches(0, {"VAN ", "VON ", "SCH"}) || matches(pos_ + 1, {"ET"})) {
      add("K");  // obviously Germanic
    } else if (matches(pos_ + 1, {"IER "})) {
      add("J");  // French ending
    } else {
      add("J", "K");
    }
    pos_ += 2;
    return;
  }
  add("K");
  pos_ += at(pos_ + 1) == 'G' ? 2 : 1;
}

void DoubleMetaphone::on_j() {
  // Spanish "Jose", "San Jacinto".
  if (matches(pos_, {"JOSE"}) || matches(0, {"SAN "})) {
    if ((pos_ == 0 && at(pos_ + 4) == ' ') || matches(0, {"SAN "})) {
      add("H");
    } else {
      add("J", "H");
    }
    pos_ += 1;
    return;
  }
  if (pos_ == 0) {
    add("J", "A");  // "Yankelovich" / "Jankelowicz"
  } else if (vowel_at(pos_ - 1) && !slavo_germanic_ && (at(pos_ + 1) == 'A' || at(pos_ + 1) == 'O')) {
    add("J", "H");  // Spanish "bajador"
  } else if (pos_ == last_) {
    // The published rule appends a blank to the secondary here; a blank is
    // not a code symbol, so nothing is appended.
    add("J", "");
  } else if (!matches(pos_ + 1, {"L", "T", "K", "S", "N", "M", "B", "Z"}) &&
             !matches(pos_ - 1, {"S", "K", "L"})) {
    add("J");
  }
  pos_ += at(pos_ + 1) == 'J' ? 2 : 1;
}

void DoubleMetaphone::on_l() {
  if (at(pos_ + 1) == 'L') {
    // Spanish "Cabrillo", "Gallegos"
    if ((pos_ == length_ - 3 && matches(pos_ - 1, {"ILLO", "ILLA", "ALLE"})) ||
        ((matches(last_ - 1, {"AS", "OS"}) || matches(last_, {"A", "O"})) &&
         matches(pos_ - 1, {"ALLE"}))) {
      add("L", "");
      pos_ += 2;
      return;
    }
    pos_ += 2;
  } else {
    pos_ += 1;
  }
  add("L");
}

void DoubleMetaphone::on_s() {
  // "island", "isle", "Carlisle", "Carlysle"
  if (matches(pos_ - 1, {"ISL", "YSL"})) {
    pos_ += 1;
    return;
  }
  if (pos_ == 0 && matches(pos_, {"SUGAR"})) {
    add("X", "S");
    pos_ += 1;
    return;
  }
  if (matches(pos_, {"SH"})) {
    if (matches(pos_ + 1, {"HEIM", "HOEK", "HOLM", "HOLZ"})) {
      add("S");  // Germanic
    } else {
      add("X");
    }
    pos_ += 2;
    return;
  }
  // Italian and Armenian
  if (matches(pos_, {"SIO", "SIA", "SIAN"})) {
    if (slavo_germanic_) {
      add("S");
    } else {
      add("S", "X");
    }
    pos_ += 3;
    return;
  }
  // German and anglicized forms: "Smith" meets "Schmidt", "Snider" meets
  // "Schneider". Also Slavic -sz-.
  if ((pos_ == 0 && matches(pos_ + 1, {"M", "N", "L", "W"})) || matches(pos_ + 1, {"Z"})) {
    add("S", "X");
    pos_ += matches(pos_ + 1, {"Z"}) ? 2 : 1;
    return;
  }
  if (matches(pos_, {"SC"})) {
    // Schlesinger's rule
    if (at(pos_ + 2) == 'H') {
      // Dutch "school", "schooner"; "Schermerhorn", "Schenker"
      if (matches(pos_ + 3, {"OO", "ER", "EN", "UY", "ED", "EM"})) {
        if (matches(pos_ + 3, {"ER", "EN"})) {
          add("X", "SK");
        } else {
          add("SK");
        }
      } else if (pos_ == 0 && !vowel_at(3) && at(3) != 'W') {
        add("X", "S");
      } else {
        add("X");
      }
      pos_ += 3;
      return;
    }
    if (matches(pos_ + 2, {"I", "E", "Y"})) {
      add("S");
    } else {
      add("SK");
    }
    pos_ += 3;
    return;
  }
  // French "Resnais", "Artois"
  if (pos_ == last_ && matches(pos_ - 2, {"AI", "OI"})) {
    add("", "S");
  } else {
    add("S");
  }
  pos_ += matches(pos_ + 1, {"S", "Z"}) ? 2 : 1;
}

void DoubleMetaphone::on_t() {
  if (matches(pos_, {"TION", "TIA", "TCH"})) {
    add("X");
    pos_ += 3;
    return;
  }
  if (matches(pos_, {"TH", "TTH"})) {
    // "Thomas", "Thames", or Germanic
    if (matches(pos_ + 2, {"OM", "AM"}) || matches(0, {"VAN ", "VON ", "SCH"})) {
      add("T");
    } else {
      add("0", "T");
    }
    pos_ += 2;
    return;
  }
  add("T");
  pos_ += matches(pos_ + 1, {"T", "D"}) ? 2 : 1;
}

void DoubleMetaphone::on_w() {
  if (matches(pos_, {"WR"})) {
    add("R");
    pos_ += 2;
    return;
  }
  if (pos_ == 0 && (vowel_at(pos_ + 1) || matches(pos_, {"WH"}))) {
    // "Wasserman" meets "Vasserman"; "Uomo" meets "Womo".
    if (vowel_at(pos_ + 1)) {
      add("A", "F");
    } else {
      add("A");
    }
  }
  // "Arnow" meets "Arnoff"
  if ((pos_ == last_ && vowel_at(pos_ - 1)) ||
      matches(pos_ - 1, {"EWSKI", "EWSKY", "OWSKI", "OWSKY"}) || matches(0, {"SCH"})) {
    add("", "F");
    pos_ += 1;
    return;
  }
  // Polish "Filipowicz"
  if (matches(pos_, {"WICZ", "WITZ"})) {
    add("TS", "FX");
    pos_ += 4;
    return;
  }
  pos_ += 1;
}

}  // namespace

std::optional<Word> Word::from_normalized(std::string text) {
  if (text.empty()) return std::nullopt;
  if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
    return std::nullopt;
  }
  return Word(std::move(text));
}

PhoneticCode::PhoneticCode(std::string symbols) : symbols_(std::move(symbols)) {
  if (!std::all_of(symbols_.begin(), symbols_.end(), is_symbol)) {
    throw ValidationError("phonetic code contains a symbol outside the output alphabet: " +
                          symbols_);
  }
}

bool PhoneticCode::is_symbol(char c) noexcept {
  static constexpr std::string_view kAlphabet = "AFHJKLMNPRSTWX0";
  return kAlphabet.find(c) != std::string_view::npos;
}

std::optional<Word> normalize(std::string_view raw_token) {
  std::string out;
  out.reserve(raw_token.size());
  for (std::size_t pos = 0; pos < raw_token.size();) {
    if (const char c = fold(decode_utf8(raw_token, pos))) out.push_back(c);
  }
  return Word::from_normalized(std::move(out));
}

std::vector<Word> tokenize(std::string_view text) {
  std::vector<Word> words;
  std::string current;
  auto flush = [&] {
    if (auto word = Word::from_normalized(std::move(current))) words.push_back(std::move(*word));
    current.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    if (const char c = fold(decode_utf8(text, pos))) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return words;
}

CodePair encode(const Word& word, std::size_t max_length) {
  if (max_length == 0) throw ValidationError("maximum code length must be positive");
  return DoubleMetaphone(word.text(), max_length).run();
}

}  // namespace phonosearch::phonetic
