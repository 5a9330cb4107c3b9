#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hashnet/errors.hpp"

namespace hashnet {

/// A guessed hashtag. `raw` is what was extracted from the model output and
/// is what partners get to see; `normalized` is the comparison key.
struct Hashtag {
  std::string raw;
  std::string normalized;

  friend bool operator==(const Hashtag&, const Hashtag&) = default;
};

namespace detail {

/// Decodes one UTF-8 sequence starting at s[i]; advances i. Invalid bytes
/// decode to U+FFFD and consume one byte.
inline char32_t next_codepoint(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
  if (len == 0) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = b0 & (0x7F >> len);
  for (int k = 1; k < len; ++k) {
    int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

/// Non-ASCII code points treated as punctuation or symbols. Everything else
/// outside ASCII counts as a letter.
inline bool is_non_ascii_symbol(char32_t cp) {
  return (cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x206F) ||
         (cp >= 0x20A0 && cp <= 0x20CF) || (cp >= 0x2190 && cp <= 0x27BF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0xFF01 && cp <= 0xFF0F) || cp == 0xFEFF || cp == 0xFFFD ||
         (cp >= 0x1F000 && cp <= 0x1FAFF);
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

inline void erase_all(std::string& s, std::string_view needle) {
  for (std::size_t pos; (pos = s.find(needle)) != std::string::npos;) s.erase(pos, needle.size());
}

}  // namespace detail

/// Canonical comparison form: lowercase, '#' removed, and every character
/// that is not a letter or digit dropped. Idempotent.
inline std::string normalize_hashtag(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = detail::next_codepoint(text, i);
    if (cp < 0x80) {
      if (std::isalnum(static_cast<int>(cp))) out += static_cast<char>(std::tolower(static_cast<int>(cp)));
      continue;
    }
    if (detail::is_non_ascii_symbol(cp)) continue;
    if (cp >= 0xC0 && cp <= 0xDE) cp += 0x20;  // Latin-1 capitals
    detail::append_utf8(out, cp);
  }
  return out;
}

/// Maximum number of whitespace-delimited words kept in a guess.
inline constexpr std::size_t kMaxHashtagWords = 5;

/// Removes delimited reasoning blocks such as <think>...</think>. A closing
/// tag with no opener drops everything before it; an opener with no closer
/// drops everything after it.
inline std::string strip_reasoning(std::string_view text) {
  static constexpr std::array<std::string_view, 3> kTags{"think", "thinking", "reasoning"};
  std::string s(text);

  auto find_tag = [&](const std::string& lowered, bool closing, std::size_t from, std::size_t& len) {
    std::size_t best = std::string::npos;
    for (std::string_view tag : kTags) {
      std::string needle = std::string(closing ? "</" : "<") + std::string(tag) + ">";
      std::size_t pos = lowered.find(needle, from);
      if (pos < best) {
        best = pos;
        len = needle.size();
      }
    }
    return best;
  };

  for (;;) {
    std::string lowered = detail::ascii_lower(s);
    std::size_t open_len = 0, close_len = 0;
    std::size_t open = find_tag(lowered, false, 0, open_len);
    std::size_t close = find_tag(lowered, true, 0, close_len);
    if (open == std::string::npos && close == std::string::npos) break;
    if (close < open) {
      s.erase(0, close + close_len);
      continue;
    }
    std::size_t end = find_tag(lowered, true, open + open_len, close_len);
    if (end == std::string::npos) {
      s.erase(open);
    } else {
      s.erase(open, end + close_len - open);
    }
  }
  return s;
}

namespace detail {

/// Drops markdown emphasis, code fences, block quotes, list bullets and
/// double quotes.
inline std::string strip_markup(std::string_view text) {
  std::string s(text);
  for (std::string_view junk : {"```", "**", "__", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xC2\xAB", "\xC2\xBB"})
    erase_all(s, junk);
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (c != '*' && c != '`' && c != '"') out += c;

  // Line prefixes: "> ", "- ", "+ ", "1. ", "# " (markdown headings).
  std::string cleaned;
  std::size_t start = 0;
  while (start <= out.size()) {
    std::size_t nl = out.find('\n', start);
    std::string line = out.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    std::string t = trim(line);
    for (bool changed = true; changed;) {
      changed = false;
      if (!t.empty() && t[0] == '>') {
        t = trim(t.substr(1));
        changed = true;
      }
      if (t.size() >= 2 && (t[0] == '-' || t[0] == '+') && is_space(t[1])) {
        t = trim(t.substr(2));
        changed = true;
      }
      std::size_t d = 0;
      while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) ++d;
      if (d > 0 && d + 1 < t.size() && (t[d] == '.' || t[d] == ')') && is_space(t[d + 1])) {
        t = trim(t.substr(d + 2));
        changed = true;
      }
      std::size_t h = 0;
      while (h < t.size() && t[h] == '#') ++h;
      if (h > 0 && h < t.size() && is_space(t[h])) {
        t = trim(t.substr(h));
        changed = true;
      }
    }
    cleaned += t;
    cleaned += '\n';
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return cleaned;
}

inline bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' || c == ']' ||
         c == '(' || c == '[' || c == '\'';
}

/// Trims surrounding whitespace, ASCII punctuation and single curly quotes.
inline std::string trim_guess(std::string_view text) {
  std::string s = trim(text);
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    for (std::string_view q : {"\xE2\x80\x98", "\xE2\x80\x99"}) {
      if (s.size() >= q.size() && s.compare(0, q.size(), q) == 0) {
        s.erase(0, q.size());
        changed = true;
      }
      if (s.size() >= q.size() && s.compare(s.size() - q.size(), q.size(), q) == 0) {
        s.erase(s.size() - q.size());
        changed = true;
      }
    }
    if (!s.empty() && (is_trailing_punct(s.back()) || is_space(s.back()))) {
      s.pop_back();
      changed = true;
    }
    if (!s.empty() && (s.front() == '\'' || s.front() == '(' || s.front() == '[' || is_space(s.front()))) {
      s.erase(0, 1);
      changed = true;
    }
  }
  return s;
}

inline bool is_dash_token(std::string_view w) {
  return w == "-" || w == "--" || w == "\xE2\x80\x93" || w == "\xE2\x80\x94";
}

/// From a '#' at `pos`, collects words up to the end of the line, stopping
/// before the next hashtag, a standalone dash, or after a word that ends a
/// sentence.
inline std::string hashtag_sequence(std::string_view text, std::size_t pos) {
  std::size_t eol = text.find('\n', pos);
  std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
  std::vector<std::string> words = split_words(line);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    if (i > 0 && (w[0] == '#' || is_dash_token(w))) break;
    if (!out.empty()) out += ' ';
    out += w;
    char last = w.back();
    if (last == '.' || last == '!' || last == '?' || last == ';' || last == ',' || last == ':') break;
  }
  return out;
}

inline std::string cap_words(std::string_view text, std::size_t max_words) {
  std::vector<std::string> words = split_words(text);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < max_words; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace detail

/// Extracts the guessed hashtag from raw model output.
///
/// Reasoning blocks and markup are removed first. The first '#'-prefixed
/// word sequence wins; without one, the first nonempty line is used. The
/// result is capped at five words. Throws ParseError when nothing usable is
/// left.
inline Hashtag parse_response(std::string_view raw_text) {
  std::string text = detail::strip_markup(strip_reasoning(raw_text));

  std::string guess;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '#') continue;
    char next = text[i + 1];
    if (next == '#' || detail::is_space(next)) continue;
    if (i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1]))) continue;
    guess = detail::trim_guess(detail::hashtag_sequence(text, i));
    if (guess.size() > 1) break;
    guess.clear();
  }
  if (guess.empty()) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      std::string line = detail::trim_guess(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
      if (!line.empty()) {
        guess = line;
        break;
      }
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }
  guess = detail::trim_guess(detail::cap_words(guess, kMaxHashtagWords));
  if (guess.empty()) throw ParseError("response contains no hashtag text");
  Hashtag out{guess, normalize_hashtag(guess)};
  if (out.normalized.empty()) throw ParseError("response \"" + guess + "\" has no letters or digits");
  return out;
}

}  // namespace hashnet
