#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace besc::dsl {

/// Parse failure with 1-based source position.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(message + " (line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// Three-valued truth value. The ordering (False < True < Unknown) matters
/// only for deterministic tie-breaking; logic goes through the tri_* helpers.
enum class Tri : uint8_t { False = 0, True = 1, Unknown = 2 };

Tri tri_not(Tri a);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);
char tri_char(Tri a);

enum class VarKind : uint8_t { Known, Unknown };

struct VarDecl {
  std::string name;
  VarKind kind = VarKind::Unknown;
  // Known only. Absent means both initial values are explored.
  std::optional<bool> init;

  bool operator==(const VarDecl&) const = default;
};

/// Guard expression tree. Lit leaves carry the declaration index of the
/// variable they test; a negative literal `!b` means "b is False".
struct Guard {
  enum class Kind : uint8_t { Lit, Not, And, Or };

  Kind kind = Kind::Lit;
  int var = -1;          // Lit only
  bool positive = true;  // Lit only
  std::vector<Guard> children;

  static Guard lit(int var, bool positive = true);
  static Guard negation(Guard g);
  static Guard conj(Guard a, Guard b);
  static Guard disj(Guard a, Guard b);

  bool operator==(const Guard&) const = default;
};

struct Assignment {
  int var = -1;
  bool value = true;

  bool operator==(const Assignment&) const = default;
};

/// One evolution rule `guard -> assignments`. Rules written in grouped form
/// (`g -> a & !b`) carry several assignments; no variable appears twice.
struct Rule {
  Guard guard;
  std::vector<Assignment> assignments;

  bool operator==(const Rule&) const = default;
};

struct Bes {
  std::vector<VarDecl> decls;
  std::vector<Rule> rules;

  int var_index(std::string_view name) const;
  size_t num_unknown() const;
  size_t num_known() const;

  bool operator==(const Bes&) const = default;
};

/// A full valuation in declaration order. Known variables never hold Unknown.
struct TriState {
  std::vector<Tri> values;

  std::string to_string() const;
  static TriState from_string(std::string_view s);

  bool operator==(const TriState&) const = default;
  auto operator<=>(const TriState&) const = default;
};

struct TriStateHash {
  size_t operator()(const TriState& s) const;
};

/// Parses BES source text. Errors (syntax, undeclared variable, duplicate
/// declaration, init on an unknown variable) raise ParseError.
Bes parse_bes(const std::string& text);

/// Emits source text that parses back to a structurally equal Bes.
std::string pretty_print(const Bes& bes);

std::string guard_to_string(const Guard& g, const Bes& bes);

/// Kleene strong three-valued evaluation.
Tri eval_guard(const TriState& state, const Guard& g);

/// Indices of rules whose guard evaluates to True (Unknown is not enabled).
std::vector<size_t> enabled_rules(const TriState& state, const Bes& bes);

}  // namespace besc::dsl
