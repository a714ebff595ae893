#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "personaflow/corpus_builder.hpp"

namespace personaflow {

namespace {

constexpr std::array<std::string_view, 12> kDropped = {"script", "style", "noscript", "svg",  "template", "head",
                                                       "nav",    "footer", "aside",  "iframe", "form",    "button"};
constexpr std::array<std::string_view, 24> kBlock = {
    "p",     "div", "section", "article", "main",       "h1",  "h2", "h3", "h4",  "h5", "h6", "li",
    "ul",    "ol",  "br",      "tr",      "td",         "th",  "table", "blockquote", "pre", "header", "dd", "dt"};

bool iequals_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != word[i]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (iequals_at(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
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

std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, std::uint32_t> kNamed[] = {
      {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
      {"nbsp", ' '},      {"mdash", 0x2014},  {"ndash", 0x2013},  {"hellip", 0x2026}, {"copy", 0xA9},
      {"reg", 0xAE},      {"rsquo", 0x2019},  {"lsquo", 0x2018},  {"rdquo", 0x201D},  {"ldquo", 0x201C},
      {"trade", 0x2122},  {"middot", 0xB7},   {"bull", 0x2022},
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      const auto digits = name.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        const int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                      : hex && std::isxdigit(static_cast<unsigned char>(c))
                          ? std::tolower(static_cast<unsigned char>(c)) - 'a' + 10
                          : -1;
        if (d < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
      }
      if (ok) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& [entity, cp] : kNamed) {
        if (name == entity) {
          append_utf8(out, cp);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  return out;
}

struct Block {
  std::string text;
  std::size_t link_chars = 0;
  int tags = 0;
  bool heading = false;
};

std::string tag_name(std::string_view html, std::size_t pos, bool& closing) {
  std::size_t i = pos + 1;
  closing = i < html.size() && html[i] == '/';
  if (closing) ++i;
  std::string name;
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-')) {
    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[i]))));
    ++i;
  }
  return name;
}

bool keep(const Block& b, const std::string& text) {
  if (text.empty()) return false;
  if (b.heading) return true;
  const double link_density = static_cast<double>(b.link_chars) / static_cast<double>(b.text.size() + 1);
  if (link_density > 0.5) return false;
  const double text_per_tag = static_cast<double>(text.size()) / static_cast<double>(b.tags + 1);
  return text_per_tag >= 3.0;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::vector<Block> blocks(1);
  int in_link = 0;
  std::size_t i = 0;
  auto flush = [&](bool heading) {
    if (!blocks.back().text.empty() || blocks.back().tags > 0) blocks.emplace_back();
    blocks.back().heading = heading;
  };
  while (i < html.size()) {
    if (html[i] != '<') {
      blocks.back().text.push_back(html[i]);
      if (in_link > 0) ++blocks.back().link_chars;
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    bool closing = false;
    const auto name = tag_name(html, i, closing);
    const auto gt = html.find('>', i);
    const auto after = gt == std::string_view::npos ? html.size() : gt + 1;
    if (name.empty()) {
      // A bare '<' in text, or a doctype/processing instruction.
      if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
        i = after;
      } else {
        blocks.back().text.push_back('<');
        ++i;
      }
      continue;
    }
    const bool self_closing = gt != std::string_view::npos && gt > 0 && html[gt - 1] == '/';
    if (!closing && !self_closing && std::find(kDropped.begin(), kDropped.end(), name) != kDropped.end()) {
      const auto end = ifind(html, "</" + name, after);
      if (end == std::string_view::npos) {
        i = html.size();
      } else {
        const auto end_gt = html.find('>', end);
        i = end_gt == std::string_view::npos ? html.size() : end_gt + 1;
      }
      continue;
    }
    if (name == "a") in_link = closing ? std::max(0, in_link - 1) : in_link + 1;
    if (std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end()) {
      const bool heading = !closing && name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6';
      flush(heading);
    } else {
      ++blocks.back().tags;
      blocks.back().text.push_back(' ');
    }
    i = after;
  }

  std::string out;
  for (const auto& b : blocks) {
    const auto text = collapse_whitespace(decode_entities(b.text));
    if (!keep(b, text)) continue;
    if (!out.empty()) out += '\n';
    out += text;
  }
  return out;
}

std::int64_t count_chars(std::string_view text) {
  return std::count_if(text.begin(), text.end(),
                       [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
}

std::string truncate_chars(std::string_view text, std::int64_t max_chars) {
  if (max_chars <= 0) return {};
  std::int64_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (seen == max_chars) return std::string(text.substr(0, i));
      ++seen;
    }
  }
  return std::string(text);
}

}  // namespace personaflow
