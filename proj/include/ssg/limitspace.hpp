#pragma once

#include <string>
#include <vector>

#include "ssg/analysis.hpp"

namespace ssg {

/**
 * A family of identified boundary words with a shared recurring tail: the
 * words z̄·s_n···s_1 for every choice s_j ∈ S_j. Sets are listed deepest
 * first (S_n first); each set is sorted. Invariants: the tail block is
 * primitive and its leftmost letter does not occur in S_n, so every member
 * is in canonical form.
 */
struct GluingClass {
  FiniteWord tail;
  std::vector<std::vector<Letter>> sets;

  auto operator<=>(const GluingClass&) const = default;
};

/** Renders "z* [S_n][S_n-1]...[S_1]" with sets like {0,1}. */
std::string to_string(const GluingClass& cls);

/** All member words of a class (every selection), sorted. */
std::vector<EventuallyPeriodicWord> expand_class(const GluingClass& cls);

/**
 * Extracts the boundary gluing of the limit space from the nucleus: walks
 * every simple cycle of the non-trivial backward core, turns each departure
 * path into an identification of two boundary words over the cycle's tail,
 * merges overlapping identifications positionwise, and reports the resulting
 * classes whose rightmost set identifies more than one letter (shallower
 * relatives of deeper classes are implied by shifting). Requires the nucleus
 * to satisfy the append-stability and post-critical finiteness tests.
 */
std::vector<GluingClass> gluing_classes(const Nucleus& nucleus);

/**
 * Fuses classes that share a recurring block and depth and whose letter sets
 * intersect positionwise (overlapping families describe one identification),
 * repeating until no two entries are fusable. Sets must be sorted; the result
 * is sorted canonically.
 */
std::vector<GluingClass> fuse_classes(std::vector<GluingClass> classes);

struct CriticalSets {
  std::vector<EventuallyPeriodicWord> critical;      ///< members of all classes
  std::vector<EventuallyPeriodicWord> postcritical;  ///< all proper shifts of those
};

/** Critical and post-critical boundary words of the listed classes. */
CriticalSets critical_sets(const std::vector<GluingClass>& classes);

/** Result of shifting a class: either a smaller class or a single word. */
struct ShiftedClass {
  bool is_word = false;
  GluingClass cls;             ///< valid iff !is_word
  EventuallyPeriodicWord word; ///< valid iff is_word
};

/**
 * Drops the rightmost set. If every remaining set is a singleton the shift
 * collapses to one boundary word.
 */
ShiftedClass shift_class(const GluingClass& cls);

/** Adjacency of level-n tiles. Vertices are the words of length `level`. */
struct TileGraph {
  int level = 0;
  std::vector<FiniteWord> vertices;                      ///< lexicographic
  std::vector<std::pair<uint32_t, uint32_t>> edges;      ///< index pairs, i < j
};

/**
 * Two distinct tiles are adjacent iff some non-trivial nucleus element maps
 * one vertex word onto the other. Raises BoundExceeded if k^level exceeds
 * `budget`.
 */
TileGraph tile_graph(const Nucleus& nucleus, int level, size_t budget);

/** Renders the tile graph as deterministic ASCII Graphviz DOT (undirected). */
std::string tiles_to_dot(const TileGraph& graph);

}  // namespace ssg
