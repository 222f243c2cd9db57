#include "keystage/textseg.hpp"

#include <algorithm>
#include <array>

namespace keystage::textseg {

namespace {

struct CodePoint {
  char32_t value = 0;
  std::size_t length = 1;
};

// Invalid sequences decode as a single byte so offsets always advance.
CodePoint decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0xA0 || (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

bool is_alnum(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  return (c >= 0x370 && c <= 0x3FF && c != 0x37E && c != 0x387) ||  // Greek
         (c >= 0x400 && c <= 0x52F) ||                              // Cyrillic
         (c >= 0x1E00 && c <= 0x1FFF);                              // Latin/Greek ext.
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019 || c == 0x02BC; }
bool is_hyphen(char32_t c) { return c == '-' || c == 0x2010 || c == 0x2011; }

bool is_punctuation(char32_t c) {
  if (c < 0x80) return c > 0x20 && c < 0x7F;  // every printable non-alnum ASCII
  return (c >= 0xA1 && c <= 0xBF) || (c >= 0x2010 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x303F) || c == 0x37E || c == 0x387;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

std::size_t syllables_of_part(std::string_view part) {
  std::string w;
  for (char ch : part) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    if (ch >= 'a' && ch <= 'z') w.push_back(ch);
  }
  std::size_t groups = 0;
  bool in_group = false;
  for (char ch : w) {
    const bool v = is_vowel(ch);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  // Terminal silent 'e': a final 'e' that forms its own vowel group, not
  // after 'l' ("table" keeps it).
  const std::size_t n = w.size();
  if (n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) && w[n - 2] != 'l' && groups > 0) {
    --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "mr",  "mrs", "ms",  "messrs", "dr",   "st",  "prof", "sr",
    "jr",  "vs",  "mt",  "capt",   "col",  "gen", "lt",   "sgt",
    "rev", "hon", "gov", "sen",    "esq",  "mme", "mlle", "rep"};

bool is_abbreviation(std::string_view word) {
  const std::string lower = to_lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) !=
         kAbbreviations.end();
}

bool starts_lowercase(const Token& t) {
  return !t.surface.empty() && t.surface[0] >= 'a' && t.surface[0] <= 'z';
}

bool is_terminator(const Token& t) {
  return t.is_punct() && (t.surface == "." || t.surface == "!" || t.surface == "?");
}

bool is_closer(const Token& t) {
  if (!t.is_punct()) return false;
  const std::string_view s = t.surface;
  return s == "\"" || s == "'" || s == ")" || s == "]" || s == "}" ||
         s == "\xE2\x80\x9D" /* ” */ || s == "\xE2\x80\x99" /* ’ */ ||
         s == "\xC2\xBB" /* » */;
}

// A '.' that does not end a sentence: decimal points and dotted acronyms
// (directly followed by a word), known abbreviations, single-letter initials.
bool period_suppressed(const std::vector<Token>& tokens, std::size_t i) {
  if (i + 1 < tokens.size() && !tokens[i + 1].space_before && tokens[i + 1].is_word()) {
    return true;
  }
  if (i == 0 || tokens[i].space_before) return false;
  const Token& prev = tokens[i - 1];
  if (!prev.is_word()) return false;
  if (is_abbreviation(prev.surface)) return true;
  if (prev.surface.size() == 1) {
    const char c = prev.surface[0];
    return c != 'I' && c != 'a' && c != 'A' && ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
  }
  return false;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::size_t SegmentedText::word_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word(); }));
}

std::size_t count_syllables(std::string_view word) {
  std::size_t total = 0;
  std::size_t parts = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= word.size(); ++i) {
    if (i == word.size() || word[i] == '-') {
      if (i > start) {
        total += syllables_of_part(word.substr(start, i - start));
        ++parts;
      }
      start = i + 1;
    }
  }
  return parts == 0 ? 1 : total;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  std::size_t newlines = 0;
  bool space = true;
  while (pos < text.size()) {
    const CodePoint cp = decode(text, pos);
    if (is_space(cp.value)) {
      if (cp.value == '\n') ++newlines;
      space = true;
      pos += cp.length;
      continue;
    }

    Token tok;
    tok.begin = pos;
    tok.newlines_before = newlines;
    tok.space_before = space;
    newlines = 0;
    space = false;

    if (is_alnum(cp.value)) {
      std::size_t end = pos + cp.length;
      std::size_t alnum = 1;
      while (end < text.size()) {
        const CodePoint next = decode(text, end);
        if (is_alnum(next.value)) {
          ++alnum;
          end += next.length;
          continue;
        }
        // Apostrophes and hyphens stay inside a word only between letters.
        if ((is_apostrophe(next.value) || is_hyphen(next.value)) &&
            end + next.length < text.size() && is_alnum(decode(text, end + next.length).value)) {
          end += next.length;
          continue;
        }
        break;
      }
      tok.kind = TokenKind::Word;
      tok.end = end;
      tok.surface = std::string(text.substr(pos, end - pos));
      tok.char_count = alnum;
      tok.syllables = count_syllables(tok.surface);
    } else {
      tok.kind = is_punctuation(cp.value) ? TokenKind::Punctuation : TokenKind::Other;
      tok.end = pos + cp.length;
      tok.surface = std::string(text.substr(pos, cp.length));
    }
    pos = tok.end;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<Range> split_sentences(const std::vector<Token>& tokens) {
  std::vector<Range> sentences;
  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = tokens.size();
  while (i < n) {
    if (i > start && tokens[i].newlines_before >= 2) {
      sentences.push_back({start, i});
      start = i;
    }
    if (!is_terminator(tokens[i])) {
      ++i;
      continue;
    }
    bool all_periods = tokens[i].surface == ".";
    std::size_t j = i + 1;
    // Runs like "?!" or "..." end together.
    while (j < n && is_terminator(tokens[j]) && !tokens[j].space_before) {
      if (tokens[j].surface != ".") all_periods = false;
      ++j;
    }
    bool suppressed = false;
    if (all_periods && j - i == 1) {
      suppressed = period_suppressed(tokens, i);
    } else if (all_periods && j < n && tokens[j].is_word() && starts_lowercase(tokens[j])) {
      // "and then... nothing" keeps going; an ellipsis before lowercase is a pause.
      suppressed = true;
    }
    if (suppressed) {
      i = j;
      continue;
    }
    while (j < n && is_closer(tokens[j]) && !tokens[j].space_before) ++j;
    sentences.push_back({start, j});
    start = j;
    i = j;
  }
  if (start < n) sentences.push_back({start, n});
  return sentences;
}

SegmentedText segment(std::string_view text) {
  SegmentedText seg;
  seg.tokens = tokenize(text);
  seg.sentences = split_sentences(seg.tokens);
  std::size_t para_start = 0;
  for (std::size_t s = 1; s < seg.sentences.size(); ++s) {
    if (seg.tokens[seg.sentences[s].begin].newlines_before >= 2) {
      seg.paragraphs.push_back({para_start, s});
      para_start = s;
    }
  }
  if (!seg.sentences.empty()) seg.paragraphs.push_back({para_start, seg.sentences.size()});
  seg.source_span = {0, text.size()};
  return seg;
}

std::size_t budget_tokens(const SegmentedText& seg, const Range& sentence) {
  std::size_t count = 0;
  for (std::size_t t = sentence.begin; t < sentence.end; ++t) {
    if (seg.tokens[t].kind != TokenKind::Other) ++count;
  }
  return count;
}

std::vector<Chunk> chunk_document(std::string_view text, std::size_t token_budget) {
  const std::size_t budget = std::max<std::size_t>(token_budget, 1);
  const SegmentedText doc = segment(text);
  std::vector<Chunk> chunks;
  if (doc.tokens.empty()) return chunks;

  // Group sentence indices greedily.
  std::vector<Range> groups;
  std::size_t group_start = 0;
  std::size_t group_tokens = 0;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const std::size_t count = budget_tokens(doc, doc.sentences[s]);
    if (s > group_start && group_tokens + count > budget) {
      groups.push_back({group_start, s});
      group_start = s;
      group_tokens = 0;
    }
    group_tokens += count;
  }
  groups.push_back({group_start, doc.sentences.size()});

  // Paragraph id of each sentence, to rebuild paragraph ranges per chunk.
  std::vector<std::size_t> paragraph_of(doc.sentences.size());
  for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
    for (std::size_t s = doc.paragraphs[p].begin; s < doc.paragraphs[p].end; ++s) {
      paragraph_of[s] = p;
    }
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Range sents = groups[g];
    Chunk chunk;
    chunk.index = g;
    chunk.token_budget = budget;
    SegmentedText& seg = chunk.segmented;
    const std::size_t first_token = doc.sentences[sents.begin].begin;
    const std::size_t last_token = doc.sentences[sents.end - 1].end;
    seg.tokens.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(first_token),
                      doc.tokens.begin() + static_cast<std::ptrdiff_t>(last_token));
    for (std::size_t s = sents.begin; s < sents.end; ++s) {
      seg.sentences.push_back(
          {doc.sentences[s].begin - first_token, doc.sentences[s].end - first_token});
    }
    std::size_t para_start = 0;
    for (std::size_t k = 1; k < sents.size(); ++k) {
      if (paragraph_of[sents.begin + k] != paragraph_of[sents.begin + k - 1]) {
        seg.paragraphs.push_back({para_start, k});
        para_start = k;
      }
    }
    seg.paragraphs.push_back({para_start, sents.size()});

    const std::size_t span_begin = g == 0 ? 0 : doc.tokens[first_token].begin;
    const std::size_t span_end =
        g + 1 == groups.size() ? text.size() : doc.tokens[last_token].begin;
    seg.source_span = {span_begin, span_end};
    chunk.text = std::string(text.substr(span_begin, span_end - span_begin));
    chunk.oversized = sents.size() == 1 && budget_tokens(doc, doc.sentences[sents.begin]) > budget;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

std::string_view covered_text(std::string_view document, const SegmentedText& seg) {
  if (seg.tokens.empty()) return {};
  const std::size_t b = seg.tokens.front().begin;
  const std::size_t e = seg.tokens.back().end;
  return document.substr(b, e - b);
}

std::size_t ellipsis_length(const std::vector<Token>& tokens, std::size_t i) {
  if (i >= tokens.size()) return 0;
  if (tokens[i].surface == "\xE2\x80\xA6") return 1;
  std::size_t j = i;
  while (j < tokens.size() && tokens[j].surface == "." &&
         (j == i || tokens[j].begin == tokens[j - 1].end)) {
    ++j;
  }
  return j - i >= 3 ? j - i : 0;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string chunk_id(const Chunk& chunk) {
  static const char* hex = "0123456789abcdef";
  std::uint64_t h = fnv1a64(chunk.text);
  std::string digits(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) digits[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return std::to_string(chunk.index) + "-" + digits;
}

}  // namespace keystage::textseg
