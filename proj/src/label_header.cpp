// Mulan label header: any element whose local name is "label" contributes
// its `name` attribute, in document order. Namespace prefixes are ignored.

#include <cctype>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "mlrules/dataset.hpp"
#include "mlrules/error.hpp"

namespace mlrules {
namespace {

std::string_view local_name(std::string_view qname) {
  const auto colon = qname.rfind(':');
  return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
}

std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos) throw ParseError("label header: unterminated entity");
    const auto entity = s.substr(i + 1, semi - i - 1);
    if (entity == "amp") out += '&';
    else if (entity == "lt") out += '<';
    else if (entity == "gt") out += '>';
    else if (entity == "quot") out += '"';
    else if (entity == "apos") out += '\'';
    else if (!entity.empty() && entity[0] == '#') {
      const bool hex = entity.size() > 1 && (entity[1] == 'x' || entity[1] == 'X');
      const long code = std::stol(std::string(entity.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
      if (code < 0x80) {
        out += static_cast<char>(code);
      } else if (code < 0x800) {
        out += static_cast<char>(0xC0 | (code >> 6));
        out += static_cast<char>(0x80 | (code & 0x3F));
      } else {
        out += static_cast<char>(0xE0 | (code >> 12));
        out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (code & 0x3F));
      }
    } else {
      throw ParseError("label header: unknown entity '&" + std::string(entity) + ";'");
    }
    i = semi;
  }
  return out;
}

std::size_t line_of(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace

std::vector<std::string> parse_label_header(std::string_view text) {
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  bool saw_element = false;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    if (text.substr(pos, 4) == "<!--") {
      const auto end = text.find("-->", pos + 4);
      if (end == std::string_view::npos) throw ParseError(line_of(text, pos), "unterminated comment");
      pos = end + 3;
      continue;
    }
    const auto close = text.find('>', pos);
    if (close == std::string_view::npos) throw ParseError(line_of(text, pos), "unterminated tag");
    auto tag = text.substr(pos + 1, close - pos - 1);
    const std::size_t tag_line = line_of(text, pos);
    pos = close + 1;
    if (tag.empty() || tag.front() == '?' || tag.front() == '!' || tag.front() == '/') continue;
    saw_element = true;
    if (tag.back() == '/') tag.remove_suffix(1);

    std::size_t i = 0;
    while (i < tag.size() && !std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
    if (local_name(tag.substr(0, i)) != "label") continue;

    std::optional<std::string> name;
    while (i < tag.size()) {
      while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
      if (i >= tag.size()) break;
      const auto eq = tag.find('=', i);
      if (eq == std::string_view::npos) throw ParseError(tag_line, "malformed attribute in <label>");
      auto key = tag.substr(i, eq - i);
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.remove_suffix(1);
      std::size_t v = eq + 1;
      while (v < tag.size() && std::isspace(static_cast<unsigned char>(tag[v]))) ++v;
      if (v >= tag.size() || (tag[v] != '"' && tag[v] != '\'')) {
        throw ParseError(tag_line, "attribute value must be quoted in <label>");
      }
      const char q = tag[v];
      const auto end = tag.find(q, v + 1);
      if (end == std::string_view::npos) throw ParseError(tag_line, "unterminated attribute value in <label>");
      if (local_name(key) == "name") name = decode_entities(tag.substr(v + 1, end - v - 1));
      i = end + 1;
    }
    if (!name || name->empty()) throw ParseError(tag_line, "<label> element without a name attribute");
    if (!seen.insert(*name).second) throw ParseError(tag_line, "duplicate label name '" + *name + "'");
    names.push_back(std::move(*name));
  }
  if (!saw_element) throw ParseError("label header: no XML elements found");
  if (names.empty()) throw ParseError("label header declares no labels");
  return names;
}

std::vector<std::string> parse_label_header(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_label_header(std::string_view(text));
}

}  // namespace mlrules
