#include "besc/chain.hpp"

#include <sstream>
#include <stdexcept>

namespace besc::chain {

namespace {

void emit_ring(std::ostringstream& out, const std::string& prefix,
               unsigned m) {
  for (unsigned i = 0; i + 1 < m; ++i)
    out << "rule " << prefix << i << " -> " << prefix << i + 1 << ";\n";
  out << "rule " << prefix << m - 1 << " -> !" << prefix << 0 << ";\n";
  for (unsigned i = 0; i + 1 < m; ++i)
    out << "rule !" << prefix << i << " -> !" << prefix << i + 1 << ";\n";
  out << "rule !" << prefix << m - 1 << " -> " << prefix << 0 << ";\n";
}

}  // namespace

std::string gen_chain(unsigned m, unsigned k) {
  if (m < 2) throw std::invalid_argument("chain benchmark needs m >= 2");

  std::ostringstream out;
  out << "# ring benchmark: m=" << m << ", k=" << k << "\n";
  out << "known a0;\n";
  out << "unknown ";
  for (unsigned i = 1; i < m; ++i) out << (i > 1 ? ", " : "") << "a" << i;
  out << ";\n";
  for (unsigned j = 1; j <= k; ++j) {
    out << "known ";
    for (unsigned i = 0; i < m; ++i)
      out << (i > 0 ? ", " : "") << "a" << j << "_" << i;
    out << ";\n";
  }
  out << "\n";
  emit_ring(out, "a", m);
  for (unsigned j = 1; j <= k; ++j)
    emit_ring(out, "a" + std::to_string(j) + "_", m);
  return out.str();
}

}  // namespace besc::chain
