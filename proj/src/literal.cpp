#include "tmotif/literal.hpp"

#include <cctype>

#include "tmotif/graph.hpp"

namespace tmotif {

namespace {

constexpr int kMaxDepth = 64;

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '+';
}

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view s) : s_(s) {}

  nlohmann::json document() {
    auto v = value(0);
    skip_ws();
    if (pos_ < s_.size()) throw ParseError("unexpected trailing text", pos_);
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  nlohmann::json value(int depth) {
    if (depth > kMaxDepth) throw ParseError("nesting too deep", pos_);
    switch (peek()) {
      case '{': return dict(depth);
      case '[': return sequence(depth, ']');
      case '(': return sequence(depth, ')');
      case '\'':
      case '"': return quoted();
      case '\0': throw ParseError("unexpected end of input", pos_);
      default: return word();
    }
  }

  nlohmann::json dict(int depth) {
    auto obj = nlohmann::json::object();
    ++pos_;
    while (true) {
      if (peek() == '}') {
        ++pos_;
        return obj;
      }
      std::size_t key_pos = pos_;
      auto key = value(depth + 1);
      std::string k;
      if (key.is_string())
        k = key.get<std::string>();
      else if (key.is_number())
        k = key.dump();
      else
        throw ParseError("dictionary key must be a string or number", key_pos);
      if (peek() != ':') throw ParseError("expected ':'", pos_);
      ++pos_;
      obj[k] = value(depth + 1);
      char c = peek();
      if (c == ',') {
        ++pos_;
      } else if (c != '}') {
        throw ParseError("expected ',' or '}'", pos_);
      }
    }
  }

  nlohmann::json sequence(int depth, char close) {
    auto arr = nlohmann::json::array();
    ++pos_;
    while (true) {
      if (peek() == close) {
        ++pos_;
        return arr;
      }
      arr.push_back(value(depth + 1));
      char c = peek();
      if (c == ',') {
        ++pos_;
      } else if (c != close) {
        throw ParseError(std::string("expected ',' or '") + close + "'", pos_);
      }
    }
  }

  nlohmann::json quoted() {
    std::size_t start = pos_;
    char q = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != q) {
      char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += e;
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) throw ParseError("unterminated string", start);
    ++pos_;
    return out;
  }

  nlohmann::json word() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && word_char(s_[pos_])) ++pos_;
    if (pos_ == start) throw ParseError(std::string("unexpected character '") + s_[pos_] + "'", pos_);
    std::string w(s_.substr(start, pos_ - start));
    if (w == "True" || w == "true") return true;
    if (w == "False" || w == "false") return false;
    if (w == "None" || w == "null") return nullptr;
    std::size_t i = (w[0] == '-' || w[0] == '+') ? 1 : 0;
    if (i < w.size() && std::isdigit(static_cast<unsigned char>(w[i]))) {
      std::size_t j = i;
      while (j < w.size() && std::isdigit(static_cast<unsigned char>(w[j]))) ++j;
      try {
        if (j == w.size()) {
          if (w[0] == '-') return std::stoll(w);
          return std::stoull(w.substr(i));
        }
        std::size_t used = 0;
        double d = std::stod(w, &used);
        if (used == w.size()) return d;
      } catch (const std::out_of_range&) {
        throw ParseError("number out of range", start);
      }
    }
    return w;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void render(const nlohmann::json& j, std::string& out) {
  if (j.is_object()) {
    out += '{';
    bool first = true;
    for (const auto& [k, v] : j.items()) {
      if (!first) out += ", ";
      first = false;
      render(k, out);
      out += ": ";
      render(v, out);
    }
    out += '}';
  } else if (j.is_array()) {
    bool scalars = !j.empty();
    for (const auto& v : j) scalars = scalars && !v.is_structured();
    out += scalars ? '(' : '[';
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ", ";
      render(j[i], out);
    }
    if (scalars && j.size() == 1) out += ',';
    out += scalars ? ')' : ']';
  } else if (j.is_string()) {
    out += '\'';
    for (char c : j.get_ref<const std::string&>()) {
      if (c == '\'' || c == '\\') out += '\\';
      out += c;
    }
    out += '\'';
  } else if (j.is_boolean()) {
    out += j.get<bool>() ? "True" : "False";
  } else if (j.is_null()) {
    out += "None";
  } else {
    out += j.dump();
  }
}

}  // namespace

nlohmann::json parse_literal(std::string_view text) { return LiteralParser(text).document(); }

std::size_t literal_extent(std::string_view text, std::size_t open) {
  int depth = 0;
  char quote = '\0';
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == '\\')
        ++i;
      else if (c == quote)
        quote = '\0';
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '{' || c == '[' || c == '(') {
      ++depth;
    } else if (c == '}' || c == ']' || c == ')') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string to_literal(const nlohmann::json& j) {
  std::string out;
  render(j, out);
  return out;
}

}  // namespace tmotif
