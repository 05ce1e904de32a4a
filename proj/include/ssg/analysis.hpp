#pragma once

#include <vector>

#include "ssg/nucleus.hpp"
#include "ssg/words.hpp"

namespace ssg {

/**
 * Nucleus states that lie on a directed cycle of the nucleus diagram or are
 * forward-reachable from one (the trivial state is always included). Every
 * left-infinite path through the diagram stays inside this set.
 */
std::vector<Element> backward_core(const Nucleus& nucleus);

/**
 * Decides whether every boundary identification is stable under appending
 * letters: for every left-infinite word there must be a nucleus element with
 * exactly that fixed-word behavior wherever a non-trivial identification is
 * realizable. Works on end-state subsets of the backward core reachable from
 * the full core through cycling label blocks, checking a greatest-fixpoint
 * "fixes every extension" predicate on each.
 */
bool check_condition2(const Nucleus& nucleus);

/**
 * Post-critically finite test on the nucleus: in the non-trivial part of the
 * diagram, every cyclic strongly connected component must be a simple cycle
 * (in- and out-degree one within the component, counting parallel letter
 * edges) and no directed path may join two distinct cyclic components.
 */
bool check_pcf(const Nucleus& nucleus);

/** The same cycles-simple-and-separated test on the closure of one element. */
bool is_bounded_element(Element g);

/**
 * Strict form: all generators bounded, and every nucleus element moves at
 * most one letter at a time (letters it displaces restrict to the identity;
 * letters it fixes restrict to elements with the same property).
 */
bool check_strictly_pcf(const Group& group, const Nucleus& nucleus);

/**
 * Whether two left-infinite boundary words are identified in the limit space:
 * true iff some nucleus path consumes both words in parallel, which reduces
 * to a cycle test in a finite (state, tail-phase) transition graph plus a
 * finite walk across the heads.
 */
bool are_equivalent(const Nucleus& nucleus, const EventuallyPeriodicWord& u,
                    const EventuallyPeriodicWord& v);

/**
 * All boundary words identified with w, w itself included, sorted. The size
 * never exceeds the nucleus size.
 */
std::vector<EventuallyPeriodicWord> equivalence_class(const Nucleus& nucleus,
                                                      const EventuallyPeriodicWord& w);

}  // namespace ssg
