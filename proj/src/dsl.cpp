#include "besc/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace besc::dsl {

Tri tri_not(Tri a) {
  switch (a) {
    case Tri::True:
      return Tri::False;
    case Tri::False:
      return Tri::True;
    default:
      return Tri::Unknown;
  }
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Unknown;
}

char tri_char(Tri a) {
  switch (a) {
    case Tri::True:
      return '1';
    case Tri::False:
      return '0';
    default:
      return '?';
  }
}

Guard Guard::lit(int var, bool positive) {
  Guard g;
  g.kind = Kind::Lit;
  g.var = var;
  g.positive = positive;
  return g;
}

Guard Guard::negation(Guard g) {
  // A negated atom is the flipped literal; the parser makes the same fold.
  if (g.kind == Kind::Lit) {
    g.positive = !g.positive;
    return g;
  }
  Guard n;
  n.kind = Kind::Not;
  n.children.push_back(std::move(g));
  return n;
}

Guard Guard::conj(Guard a, Guard b) {
  Guard n;
  n.kind = Kind::And;
  n.children.push_back(std::move(a));
  n.children.push_back(std::move(b));
  return n;
}

Guard Guard::disj(Guard a, Guard b) {
  Guard n;
  n.kind = Kind::Or;
  n.children.push_back(std::move(a));
  n.children.push_back(std::move(b));
  return n;
}

int Bes::var_index(std::string_view name) const {
  for (size_t i = 0; i < decls.size(); ++i) {
    if (decls[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

size_t Bes::num_unknown() const {
  size_t n = 0;
  for (const auto& d : decls) n += d.kind == VarKind::Unknown ? 1 : 0;
  return n;
}

size_t Bes::num_known() const { return decls.size() - num_unknown(); }

std::string TriState::to_string() const {
  std::string s;
  s.reserve(values.size());
  for (Tri v : values) s.push_back(tri_char(v));
  return s;
}

TriState TriState::from_string(std::string_view s) {
  TriState st;
  st.values.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '1':
        st.values.push_back(Tri::True);
        break;
      case '0':
        st.values.push_back(Tri::False);
        break;
      case '?':
        st.values.push_back(Tri::Unknown);
        break;
      default:
        throw std::invalid_argument("bad state character: " +
                                    std::string(1, c));
    }
  }
  return st;
}

size_t TriStateHash::operator()(const TriState& s) const {
  size_t h = 1469598103934665603ull;
  for (Tri v : s.values) {
    h ^= static_cast<size_t>(v) + 1;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

enum class Tok : uint8_t {
  Ident,
  KwKnown,
  KwUnknown,
  KwRule,
  KwTrue,
  KwFalse,
  Semi,
  Comma,
  Eq,
  Arrow,
  Bang,
  Amp,
  Pipe,
  LParen,
  RParen,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    int line = line_, col = col_;
    if (pos_ >= text_.size()) return {Tok::End, "", line, col};
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        id.push_back(text_[pos_]);
        advance();
      }
      if (id == "known") return {Tok::KwKnown, id, line, col};
      if (id == "unknown") return {Tok::KwUnknown, id, line, col};
      if (id == "rule") return {Tok::KwRule, id, line, col};
      if (id == "true") return {Tok::KwTrue, id, line, col};
      if (id == "false") return {Tok::KwFalse, id, line, col};
      return {Tok::Ident, id, line, col};
    }
    switch (c) {
      case ';':
        advance();
        return {Tok::Semi, ";", line, col};
      case ',':
        advance();
        return {Tok::Comma, ",", line, col};
      case '=':
        advance();
        return {Tok::Eq, "=", line, col};
      case '!':
        advance();
        return {Tok::Bang, "!", line, col};
      case '&':
        advance();
        return {Tok::Amp, "&", line, col};
      case '|':
        advance();
        return {Tok::Pipe, "|", line, col};
      case '(':
        advance();
        return {Tok::LParen, "(", line, col};
      case ')':
        advance();
        return {Tok::RParen, ")", line, col};
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          advance();
          advance();
          return {Tok::Arrow, "->", line, col};
        }
        break;
      default:
        break;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line,
                     col);
  }

private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lexer_(text) { bump(); }

  Bes parse() {
    while (cur_.kind != Tok::End) {
      if (cur_.kind == Tok::KwKnown || cur_.kind == Tok::KwUnknown) {
        parse_decl();
      } else if (cur_.kind == Tok::KwRule) {
        parse_rule();
      } else {
        throw ParseError("expected 'known', 'unknown' or 'rule'", cur_.line,
                         cur_.column);
      }
    }
    if (bes_.decls.empty())
      throw ParseError("system declares no variables", 1, 1);
    if (bes_.rules.empty()) throw ParseError("system has no rules", 1, 1);
    return std::move(bes_);
  }

private:
  void bump() { cur_ = lexer_.next(); }

  Token expect(Tok kind, const char* what) {
    if (cur_.kind != kind)
      throw ParseError(std::string("expected ") + what, cur_.line,
                       cur_.column);
    Token t = cur_;
    bump();
    return t;
  }

  void parse_decl() {
    VarKind kind =
        cur_.kind == Tok::KwKnown ? VarKind::Known : VarKind::Unknown;
    bump();
    for (;;) {
      Token name = expect(Tok::Ident, "variable name");
      if (bes_.var_index(name.text) >= 0)
        throw ParseError("duplicate declaration of '" + name.text + "'",
                         name.line, name.column);
      VarDecl decl;
      decl.name = name.text;
      decl.kind = kind;
      if (cur_.kind == Tok::Eq) {
        Token eq = cur_;
        bump();
        if (kind == VarKind::Unknown)
          throw ParseError("unknown variable '" + name.text +
                               "' cannot take an initial value",
                           eq.line, eq.column);
        if (cur_.kind == Tok::KwTrue) {
          decl.init = true;
        } else if (cur_.kind == Tok::KwFalse) {
          decl.init = false;
        } else {
          throw ParseError("expected 'true' or 'false'", cur_.line,
                           cur_.column);
        }
        bump();
      }
      bes_.decls.push_back(std::move(decl));
      if (cur_.kind == Tok::Comma) {
        bump();
        continue;
      }
      break;
    }
    expect(Tok::Semi, "';'");
  }

  void parse_rule() {
    bump();
    Rule rule;
    rule.guard = parse_or();
    expect(Tok::Arrow, "'->'");
    std::unordered_set<int> seen;
    for (;;) {
      bool value = true;
      if (cur_.kind == Tok::Bang) {
        value = false;
        bump();
      }
      Token name = expect(Tok::Ident, "variable name");
      int idx = resolve(name);
      if (!seen.insert(idx).second)
        throw ParseError("variable '" + name.text +
                             "' assigned twice in one rule",
                         name.line, name.column);
      rule.assignments.push_back({idx, value});
      if (cur_.kind == Tok::Amp) {
        bump();
        continue;
      }
      break;
    }
    expect(Tok::Semi, "';'");
    bes_.rules.push_back(std::move(rule));
  }

  Guard parse_or() {
    Guard g = parse_and();
    if (cur_.kind != Tok::Pipe) return g;
    Guard node;
    node.kind = Guard::Kind::Or;
    node.children.push_back(std::move(g));
    while (cur_.kind == Tok::Pipe) {
      bump();
      node.children.push_back(parse_and());
    }
    return node;
  }

  Guard parse_and() {
    Guard g = parse_unary();
    if (cur_.kind != Tok::Amp) return g;
    Guard node;
    node.kind = Guard::Kind::And;
    node.children.push_back(std::move(g));
    while (cur_.kind == Tok::Amp) {
      bump();
      node.children.push_back(parse_unary());
    }
    return node;
  }

  Guard parse_unary() {
    if (cur_.kind == Tok::Bang) {
      bump();
      Guard inner = parse_unary();
      // `!b` on an atom is a negative literal, not a Not node; forced by the
      // three-valued reading of negated atoms.
      if (inner.kind == Guard::Kind::Lit) {
        inner.positive = !inner.positive;
        return inner;
      }
      return Guard::negation(std::move(inner));
    }
    if (cur_.kind == Tok::LParen) {
      bump();
      Guard g = parse_or();
      expect(Tok::RParen, "')'");
      return g;
    }
    Token name = expect(Tok::Ident, "variable name");
    return Guard::lit(resolve(name));
  }

  int resolve(const Token& name) {
    int idx = bes_.var_index(name.text);
    if (idx < 0)
      throw ParseError("undeclared variable '" + name.text + "'", name.line,
                       name.column);
    return idx;
  }

  Lexer lexer_;
  Token cur_{Tok::End, "", 0, 0};
  Bes bes_;
};

void print_guard(std::ostringstream& out, const Guard& g, const Bes& bes) {
  switch (g.kind) {
    case Guard::Kind::Lit:
      if (!g.positive) out << '!';
      out << bes.decls[static_cast<size_t>(g.var)].name;
      return;
    case Guard::Kind::Not: {
      out << '!';
      const Guard& c = g.children[0];
      bool parens = c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or;
      if (parens) out << '(';
      print_guard(out, c, bes);
      if (parens) out << ')';
      return;
    }
    case Guard::Kind::And:
    case Guard::Kind::Or: {
      const char* sep = g.kind == Guard::Kind::And ? " & " : " | ";
      bool first = true;
      for (const Guard& c : g.children) {
        if (!first) out << sep;
        first = false;
        // Parenthesize any non-leaf child so structure survives reparsing.
        bool parens = c.kind == Guard::Kind::And || c.kind == Guard::Kind::Or;
        if (g.kind == Guard::Kind::And && c.kind == Guard::Kind::Or)
          parens = true;
        if (parens) out << '(';
        print_guard(out, c, bes);
        if (parens) out << ')';
      }
      return;
    }
  }
}

}  // namespace

Bes parse_bes(const std::string& text) { return Parser(text).parse(); }

std::string guard_to_string(const Guard& g, const Bes& bes) {
  std::ostringstream out;
  print_guard(out, g, bes);
  return out.str();
}

std::string pretty_print(const Bes& bes) {
  std::ostringstream out;
  for (const auto& d : bes.decls) {
    out << (d.kind == VarKind::Known ? "known " : "unknown ") << d.name;
    if (d.init) out << " = " << (*d.init ? "true" : "false");
    out << ";\n";
  }
  out << '\n';
  for (const auto& r : bes.rules) {
    out << "rule ";
    print_guard(out, r.guard, bes);
    out << " -> ";
    bool first = true;
    for (const auto& a : r.assignments) {
      if (!first) out << " & ";
      first = false;
      if (!a.value) out << '!';
      out << bes.decls[static_cast<size_t>(a.var)].name;
    }
    out << ";\n";
  }
  return out.str();
}

Tri eval_guard(const TriState& state, const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::Lit: {
      Tri v = state.values[static_cast<size_t>(g.var)];
      return g.positive ? v : tri_not(v);
    }
    case Guard::Kind::Not:
      return tri_not(eval_guard(state, g.children[0]));
    case Guard::Kind::And: {
      Tri acc = Tri::True;
      for (const Guard& c : g.children) acc = tri_and(acc, eval_guard(state, c));
      return acc;
    }
    case Guard::Kind::Or: {
      Tri acc = Tri::False;
      for (const Guard& c : g.children) acc = tri_or(acc, eval_guard(state, c));
      return acc;
    }
  }
  return Tri::Unknown;
}

std::vector<size_t> enabled_rules(const TriState& state, const Bes& bes) {
  std::vector<size_t> out;
  for (size_t i = 0; i < bes.rules.size(); ++i) {
    if (eval_guard(state, bes.rules[i].guard) == Tri::True) out.push_back(i);
  }
  return out;
}

}  // namespace besc::dsl
