#include "besc/ctl.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace besc::ctl {

using bdd::Bdd;

CtlFormula CtlFormula::atom_of(std::string name) {
  CtlFormula f;
  f.kind = Kind::Atom;
  f.atom = std::move(name);
  return f;
}

CtlFormula CtlFormula::negation(CtlFormula f) {
  return make(Kind::Not, {std::move(f)});
}

CtlFormula CtlFormula::make(Kind k, std::vector<CtlFormula> children) {
  CtlFormula f;
  f.kind = k;
  f.children = std::move(children);
  return f;
}

namespace {

using Kind = CtlFormula::Kind;

struct Token {
  enum class Type {
    Ident,
    TempOp,  // EX EF EG AX AG AF
    E,
    A,
    True,
    False,
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Until,
    End,
  };
  Type type;
  std::string text;
  int column;
};

class CtlLexer {
public:
  explicit CtlLexer(const std::string& text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    int col = static_cast<int>(pos_) + 1;
    if (pos_ >= text_.size()) return {Token::Type::End, "", col};
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_'))
        id.push_back(text_[pos_++]);
      if (id == "EX" || id == "EF" || id == "EG" || id == "AX" || id == "AG" ||
          id == "AF")
        return {Token::Type::TempOp, id, col};
      if (id == "E") return {Token::Type::E, id, col};
      if (id == "A") return {Token::Type::A, id, col};
      if (id == "U") return {Token::Type::Until, id, col};
      if (id == "true") return {Token::Type::True, id, col};
      if (id == "false") return {Token::Type::False, id, col};
      return {Token::Type::Ident, id, col};
    }
    ++pos_;
    switch (c) {
      case '!':
        return {Token::Type::Bang, "!", col};
      case '&':
        return {Token::Type::Amp, "&", col};
      case '|':
        return {Token::Type::Pipe, "|", col};
      case '(':
        return {Token::Type::LParen, "(", col};
      case ')':
        return {Token::Type::RParen, ")", col};
      case '[':
        return {Token::Type::LBracket, "[", col};
      case ']':
        return {Token::Type::RBracket, "]", col};
      default:
        throw dsl::ParseError("unexpected character '" + std::string(1, c) +
                                  "' in CTL formula",
                              1, col);
    }
  }

private:
  const std::string& text_;
  size_t pos_ = 0;
};

class CtlParser {
public:
  CtlParser(const encode::SymbolicTS& ts, const std::string& text)
      : ts_(ts), lexer_(text) {
    bump();
  }

  CtlFormula parse() {
    CtlFormula f = parse_or();
    if (cur_.type != Token::Type::End)
      throw dsl::ParseError("trailing input after formula", 1, cur_.column);
    return f;
  }

private:
  void bump() { cur_ = lexer_.next(); }

  void expect(Token::Type t, const char* what) {
    if (cur_.type != t)
      throw dsl::ParseError(std::string("expected ") + what, 1, cur_.column);
    bump();
  }

  CtlFormula parse_or() {
    CtlFormula f = parse_and();
    if (cur_.type != Token::Type::Pipe) return f;
    std::vector<CtlFormula> children{std::move(f)};
    while (cur_.type == Token::Type::Pipe) {
      bump();
      children.push_back(parse_and());
    }
    return CtlFormula::make(Kind::Or, std::move(children));
  }

  CtlFormula parse_and() {
    CtlFormula f = parse_unary();
    if (cur_.type != Token::Type::Amp) return f;
    std::vector<CtlFormula> children{std::move(f)};
    while (cur_.type == Token::Type::Amp) {
      bump();
      children.push_back(parse_unary());
    }
    return CtlFormula::make(Kind::And, std::move(children));
  }

  CtlFormula parse_unary() {
    switch (cur_.type) {
      case Token::Type::Bang:
        bump();
        return CtlFormula::negation(parse_unary());
      case Token::Type::TempOp: {
        std::string op = cur_.text;
        bump();
        Kind k = op == "EX"   ? Kind::EX
                 : op == "EF" ? Kind::EF
                 : op == "EG" ? Kind::EG
                 : op == "AX" ? Kind::AX
                 : op == "AG" ? Kind::AG
                              : Kind::AF;
        return CtlFormula::make(k, {parse_unary()});
      }
      case Token::Type::E:
      case Token::Type::A: {
        bool universal = cur_.type == Token::Type::A;
        bump();
        expect(Token::Type::LBracket, "'['");
        CtlFormula left = parse_or();
        expect(Token::Type::Until, "'U'");
        CtlFormula right = parse_or();
        expect(Token::Type::RBracket, "']'");
        return CtlFormula::make(universal ? Kind::AU : Kind::EU,
                                {std::move(left), std::move(right)});
      }
      case Token::Type::LParen: {
        bump();
        CtlFormula f = parse_or();
        expect(Token::Type::RParen, "')'");
        return f;
      }
      case Token::Type::True:
        bump();
        return CtlFormula::make(Kind::True, {});
      case Token::Type::False:
        bump();
        return CtlFormula::make(Kind::False, {});
      case Token::Type::Ident: {
        if (!ts_.atoms.count(cur_.text))
          throw dsl::ParseError("unknown atom '" + cur_.text + "'", 1,
                                cur_.column);
        CtlFormula f = CtlFormula::atom_of(cur_.text);
        bump();
        return f;
      }
      default:
        throw dsl::ParseError("expected a formula", 1, cur_.column);
    }
  }

  const encode::SymbolicTS& ts_;
  CtlLexer lexer_;
  Token cur_{Token::Type::End, "", 0};
};

}  // namespace

CtlFormula parse_ctl(const encode::SymbolicTS& ts, const std::string& text) {
  return normalize(CtlParser(ts, text).parse());
}

CtlFormula normalize(const CtlFormula& f) {
  std::vector<CtlFormula> children;
  children.reserve(f.children.size());
  for (const auto& c : f.children) children.push_back(normalize(c));

  switch (f.kind) {
    case Kind::AX:
      // AX f = !EX !f
      return CtlFormula::negation(CtlFormula::make(
          Kind::EX, {CtlFormula::negation(std::move(children[0]))}));
    case Kind::AG:
      // AG f = !EF !f
      return CtlFormula::negation(CtlFormula::make(
          Kind::EF, {CtlFormula::negation(std::move(children[0]))}));
    case Kind::AF:
      // AF f = !EG !f
      return CtlFormula::negation(CtlFormula::make(
          Kind::EG, {CtlFormula::negation(std::move(children[0]))}));
    case Kind::AU: {
      // A[f U g] = !(E[!g U (!f & !g)] | EG !g)
      CtlFormula nf = CtlFormula::negation(children[0]);
      CtlFormula ng = CtlFormula::negation(children[1]);
      CtlFormula eu = CtlFormula::make(
          Kind::EU, {ng, CtlFormula::make(Kind::And, {std::move(nf), ng})});
      CtlFormula eg = CtlFormula::make(Kind::EG, {std::move(ng)});
      return CtlFormula::negation(
          CtlFormula::make(Kind::Or, {std::move(eu), std::move(eg)}));
    }
    default: {
      CtlFormula out;
      out.kind = f.kind;
      out.atom = f.atom;
      out.children = std::move(children);
      return out;
    }
  }
}

std::string to_string(const CtlFormula& f) {
  std::ostringstream out;
  switch (f.kind) {
    case Kind::True:
      out << "true";
      break;
    case Kind::False:
      out << "false";
      break;
    case Kind::Atom:
      out << f.atom;
      break;
    case Kind::Not:
      out << "!(" << to_string(f.children[0]) << ")";
      break;
    case Kind::And:
    case Kind::Or: {
      const char* sep = f.kind == Kind::And ? " & " : " | ";
      out << "(";
      for (size_t i = 0; i < f.children.size(); ++i) {
        if (i) out << sep;
        out << to_string(f.children[i]);
      }
      out << ")";
      break;
    }
    case Kind::EX:
    case Kind::EF:
    case Kind::EG:
    case Kind::AX:
    case Kind::AG:
    case Kind::AF: {
      const char* names[] = {"EX", "EF", "EG", "AX", "AG", "AF"};
      out << names[static_cast<int>(f.kind) - static_cast<int>(Kind::EX)]
          << "(" << to_string(f.children[0]) << ")";
      break;
    }
    case Kind::EU:
      out << "E[" << to_string(f.children[0]) << " U "
          << to_string(f.children[1]) << "]";
      break;
    case Kind::AU:
      out << "A[" << to_string(f.children[0]) << " U "
          << to_string(f.children[1]) << "]";
      break;
  }
  return out.str();
}

namespace {

Bdd sat_rec(const encode::SymbolicTS& ts, const CtlFormula& f, Bdd universe) {
  auto& m = *ts.mgr;
  auto pre = [&](Bdd x) { return ts.preimage(x) & universe; };

  switch (f.kind) {
    case Kind::True:
      return universe;
    case Kind::False:
      return m.bdd_false();
    case Kind::Atom: {
      auto it = ts.atoms.find(f.atom);
      if (it == ts.atoms.end())
        throw std::out_of_range("unknown atom '" + f.atom + "'");
      return it->second & universe;
    }
    case Kind::Not:
      return universe - sat_rec(ts, f.children[0], universe);
    case Kind::And: {
      Bdd acc = universe;
      for (const auto& c : f.children) acc = acc & sat_rec(ts, c, universe);
      return acc;
    }
    case Kind::Or: {
      Bdd acc = m.bdd_false();
      for (const auto& c : f.children) acc = acc | sat_rec(ts, c, universe);
      return acc;
    }
    case Kind::EX:
      return pre(sat_rec(ts, f.children[0], universe));
    case Kind::EF: {
      // Least fixpoint: X grows by predecessors until stationary.
      Bdd x = sat_rec(ts, f.children[0], universe);
      for (;;) {
        Bdd grown = x | pre(x);
        if (grown == x) return x;
        x = grown;
      }
    }
    case Kind::EG: {
      Bdd x = sat_rec(ts, f.children[0], universe);
      for (;;) {
        Bdd shrunk = x & pre(x);
        if (shrunk == x) return x;
        x = shrunk;
      }
    }
    case Kind::EU: {
      Bdd keep = sat_rec(ts, f.children[0], universe);
      Bdd x = sat_rec(ts, f.children[1], universe);
      for (;;) {
        Bdd grown = x | (keep & pre(x));
        if (grown == x) return x;
        x = grown;
      }
    }
    case Kind::AX:
    case Kind::AG:
    case Kind::AF:
    case Kind::AU:
      return sat_rec(ts, normalize(f), universe);
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

Bdd sat(const encode::SymbolicTS& ts, const CtlFormula& f) {
  return sat_rec(ts, f, ts.valid);
}

Bdd sat_within(const encode::SymbolicTS& ts, const CtlFormula& f,
               Bdd universe) {
  return sat_rec(ts, f, universe);
}

bool check(const encode::SymbolicTS& ts, const CtlFormula& f) {
  Bdd reach = ts.init;
  for (;;) {
    Bdd grown = reach | ts.image(reach);
    if (grown == reach) break;
    reach = grown;
  }
  return check_within(ts, f, reach);
}

bool check_within(const encode::SymbolicTS& ts, const CtlFormula& f,
                  Bdd reach) {
  return (ts.init - sat_rec(ts, f, reach)).is_false();
}

namespace {

CtlFormula conj_all(std::vector<CtlFormula> terms) {
  if (terms.size() == 1) return std::move(terms[0]);
  return CtlFormula::make(Kind::And, std::move(terms));
}

CtlFormula disj_all(std::vector<CtlFormula> terms) {
  if (terms.size() == 1) return std::move(terms[0]);
  return CtlFormula::make(Kind::Or, std::move(terms));
}

}  // namespace

CtlFormula consistency_formula(const encode::SymbolicTS& ts) {
  std::vector<CtlFormula> terms;
  for (const auto& d : ts.bes.decls) {
    CtlFormula ex_t =
        CtlFormula::make(Kind::EX, {CtlFormula::atom_of(d.name + "_true")});
    CtlFormula ex_f =
        CtlFormula::make(Kind::EX, {CtlFormula::atom_of(d.name + "_false")});
    terms.push_back(CtlFormula::negation(
        CtlFormula::make(Kind::And, {std::move(ex_t), std::move(ex_f)})));
  }
  return CtlFormula::make(Kind::AG, {conj_all(std::move(terms))});
}

CtlFormula strict_formula(const encode::SymbolicTS& ts) {
  std::vector<CtlFormula> terms;
  for (const auto& d : ts.bes.decls) {
    CtlFormula t = CtlFormula::atom_of(d.name + "_true");
    CtlFormula fa = CtlFormula::atom_of(d.name + "_false");
    terms.push_back(CtlFormula::negation(CtlFormula::make(
        Kind::And, {t, CtlFormula::make(Kind::EX, {fa})})));
    terms.push_back(CtlFormula::negation(CtlFormula::make(
        Kind::And, {fa, CtlFormula::make(Kind::EX, {t})})));
  }
  return CtlFormula::make(Kind::AG, {conj_all(std::move(terms))});
}

CtlFormula stability_formula(const encode::SymbolicTS& ts) {
  std::vector<CtlFormula> terms;
  for (const auto& d : ts.bes.decls) {
    std::vector<CtlFormula> pinned;
    pinned.push_back(CtlFormula::make(
        Kind::AG, {CtlFormula::atom_of(d.name + "_true")}));
    pinned.push_back(CtlFormula::make(
        Kind::AG, {CtlFormula::atom_of(d.name + "_false")}));
    if (d.kind == dsl::VarKind::Unknown)
      pinned.push_back(CtlFormula::make(
          Kind::AG, {CtlFormula::atom_of(d.name + "_unknown")}));
    terms.push_back(disj_all(std::move(pinned)));
  }
  return CtlFormula::make(Kind::AF, {conj_all(std::move(terms))});
}

}  // namespace besc::ctl
