#include "prockit/text.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace prockit::text {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t len;
};

Decoded decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> unsigned {
    if (i + k >= s.size()) return 0x100;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : 0x100;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const unsigned c1 = cont(1);
    if (c1 <= 0x3F) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const unsigned c1 = cont(1), c2 = cont(2);
    if (c1 <= 0x3F && c2 <= 0x3F)
      return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const unsigned c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 <= 0x3F && c2 <= 0x3F && c3 <= 0x3F)
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) |
                                    (c2 << 6) | c3),
              4};
  }
  // Invalid byte: pass it through as U+FFFD, one byte at a time.
  return {0xFFFD, 1};
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_alnum_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9');
  }
  if (cp == 0xFFFD) return false;
  if (cp >= 0x80 && cp <= 0xBF) return false;  // Latin-1 punctuation, NBSP
  if (cp == 0xD7 || cp == 0xF7) return false;  // multiplication, division
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  return true;
}

char32_t fold(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x17F) {
    // Latin Extended-A alternates upper/lower, with a parity shift in the
    // 0x139..0x148 and 0x179..0x17E runs.
    const bool odd_upper = (cp >= 0x139 && cp <= 0x148) ||
                           (cp >= 0x179 && cp <= 0x17E);
    if (cp == 0x178) return 0xFF;
    if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 ||
        cp == 0x17F)
      return cp;
    if (odd_upper) return (cp % 2 == 1) ? cp + 1 : cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

bool is_upper_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return true;
  if (cp < 0x80) return false;
  return fold(cp) != cp;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_word_joiner(char c) { return c == '\'' || c == '-' || c == '/'; }

}  // namespace

std::string casefold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto d = decode(text, i);
    if (d.cp == 0xFFFD && d.len == 1 &&
        static_cast<unsigned char>(text[i]) >= 0x80) {
      out.push_back(text[i]);
    } else {
      encode(fold(d.cp), out);
    }
    i += d.len;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = decode(text, i);
    if (is_alnum_cp(d.cp)) {
      encode(fold(d.cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    i += d.len;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string normalize_space(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (is_space(c)) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

bool is_upper_start(std::string_view text) {
  if (text.empty()) return false;
  return is_upper_cp(decode(text, 0).cp);
}

std::vector<std::string> split_sentences(std::string_view text) {
  const std::string t = normalize_space(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char c = t[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool boundary = false;
    if (i + 1 == t.size()) {
      boundary = true;
    } else if (t[i + 1] == ' ' && i + 2 < t.size() &&
               is_upper_start(std::string_view(t).substr(i + 2))) {
      boundary = true;
    }
    if (!boundary) continue;
    std::string sentence = trim(std::string_view(t).substr(start, i + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = i + 1;
  }
  std::string rest = trim(std::string_view(t).substr(std::min(start, t.size())));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

std::vector<Span> spans(std::string_view text) {
  std::vector<Span> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = decode(text, i);
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (!is_alnum_cp(d.cp)) {
      Span s;
      s.text = std::string(text.substr(i, d.len));
      s.lower = s.text;
      s.begin = i;
      s.end = i + d.len;
      s.is_word = false;
      out.push_back(std::move(s));
      i += d.len;
      continue;
    }
    std::size_t j = i;
    while (j < text.size()) {
      const auto dj = decode(text, j);
      if (is_alnum_cp(dj.cp)) {
        j += dj.len;
        continue;
      }
      // Joiners only count when a letter or digit follows.
      if (is_word_joiner(text[j]) && j + 1 < text.size() &&
          is_alnum_cp(decode(text, j + 1).cp)) {
        ++j;
        continue;
      }
      break;
    }
    Span s;
    s.text = std::string(text.substr(i, j - i));
    s.lower = casefold(s.text);
    s.begin = i;
    s.end = j;
    out.push_back(std::move(s));
    i = j;
  }
  return out;
}

double jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string slugify(std::string_view text) {
  std::string out;
  for (const auto& tok : tokenize(text)) {
    if (!out.empty()) out.push_back('-');
    out += tok;
  }
  return out;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace prockit::text
