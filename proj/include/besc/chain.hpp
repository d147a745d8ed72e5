#pragma once

#include <string>

namespace besc::chain {

/// Source text of the ring benchmark family: one ring of length m whose
/// head is a free known variable and whose tail is unknown, plus k replica
/// rings made of free known variables. Every ring propagates its head value
/// forward and flips it at the wrap-around, so the system oscillates.
std::string gen_chain(unsigned m, unsigned k);

}  // namespace besc::chain
