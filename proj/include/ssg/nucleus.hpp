#pragma once

#include <string>
#include <vector>

#include "ssg/automata.hpp"

namespace ssg {

/**
 * The nucleus of a contracting group: the minimal restriction-closed,
 * inverse-closed set that every element of the group eventually restricts
 * into. Elements are listed in canonical order (identity first).
 */
struct Nucleus {
  std::vector<Element> elements;
  MooreDiagram diagram;

  bool contains(Element e) const;
};

/**
 * States of the restriction closure of g that lie on a directed cycle or are
 * forward-reachable from one. Every restriction of g along a word at least as
 * long as the closure lands in this set.
 */
std::vector<Element> eventual_states(Element g);

/**
 * Computes the nucleus by fixpoint: seed with the eventual states of the
 * generators and their inverses, close under the eventual states of pairwise
 * products, prune candidates no surviving pair product eventually reaches,
 * then verify the result (restriction-closed, inverse-closed, pair-eventual
 * containment, and a direct single-removal minimality check for small
 * nuclei). Raises BoundExceeded if the candidate set grows past `bound`.
 */
Nucleus compute_nucleus(const Group& group, size_t bound);

/** Outcome of a contraction attempt: a nucleus, or unknown. Never a false yes. */
struct ContractionResult {
  bool known = false;
  Nucleus nucleus;     ///< meaningful iff known
  std::string reason;  ///< set iff !known
};

/** Wraps compute_nucleus, turning a bound overrun into unknown. */
ContractionResult is_contracting(const Group& group, size_t bound);

}  // namespace ssg
