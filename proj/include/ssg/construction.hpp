#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssg/limitspace.hpp"

namespace ssg {

/** A declared identification of two boundary words. */
struct GlueEquation {
  EventuallyPeriodicWord lhs;
  EventuallyPeriodicWord rhs;
};

/** A boundary-gluing structure: alphabet size plus gluing classes. */
struct StructureSpec {
  int alphabet_size = 0;
  std::vector<GluingClass> classes;
};

/** A raw equations file: alphabet size plus declared identifications. */
struct EquationsSpec {
  int alphabet_size = 0;
  std::vector<GlueEquation> equations;
};

/**
 * Checks the listing invariants and throws InvalidInput with a diagnostic on
 * the first violation:
 *  - alphabet size and all letters in range;
 *  - recurring blocks nonempty and primitive; sets nonempty, sorted, unique;
 *  - the deepest set avoids the block's leading letter (members canonical);
 *  - no duplicate classes;
 *  - classes with the same block, compared from the deep end, must have
 *    disjoint sets at their first difference (all-equal until the shorter
 *    list ends is the shift relationship and is fine);
 *  - every shift of a class (dropping rightmost sets) is listed, down to the
 *    point where only singleton sets remain.
 */
void validate_spec(const StructureSpec& spec);

/** Result of generator synthesis from a structure. */
struct SynthesisResult {
  GroupSpec group;
  size_t generators_before = 0;  ///< count before duplicates were merged
  std::vector<std::pair<std::string, std::string>> identified;  ///< dropped -> kept
};

/**
 * Builds a self-similar group whose limit-space gluing realizes the
 * structure: each class contributes a chain of generators cycling through
 * the recurring block and descending through the letter sets; generators
 * that intern to the same minimal automaton state are merged.
 */
SynthesisResult synthesize(const StructureSpec& spec);

/**
 * Turns declared word identifications into a structure: aligns each equation
 * at its first difference from the right, reads off one class per equation,
 * fuses overlapping classes, and validates the result. Throws InvalidInput
 * whose message contains "shift map undefined" when the identifications are
 * not stable under the one-letter shift (mismatched recurring blocks,
 * misaligned finite parts, or an uncovered shifted class), and
 * "inconsistent equations" when the fused listing breaks an invariant.
 */
StructureSpec normalize_equations(const EquationsSpec& equations);

/** Full verification report for a structure. */
struct RoundtripReport {
  bool ok = false;
  size_t generators_before = 0;
  size_t generators_after = 0;
  size_t nucleus_size = 0;
  bool condition2 = false;
  bool pcf = false;
  std::vector<GluingClass> input_classes;      ///< sorted
  std::vector<GluingClass> extracted_classes;  ///< sorted
  std::string failure;                         ///< set iff !ok
};

/**
 * Synthesizes a group from the structure, computes its nucleus, checks the
 * append-stability and post-critical-finiteness conditions, extracts the
 * gluing classes, and compares them with the input. `bound` caps both the
 * generator closure and the nucleus size. Invalid structures and bound
 * overruns throw; every later divergence is reported in the returned record
 * instead.
 */
RoundtripReport roundtrip_verify(const StructureSpec& spec, size_t bound);

/**
 * Parses {"alphabet_size": k, "classes": [{"tail": [...], "sets": [[...],
 * ...]}, ...]}. Sets are sorted and deduplicated; nothing else is changed.
 * Validation is separate (validate_spec).
 */
StructureSpec parse_structure_json(const std::string& text);

/** Deterministic JSON for a structure (two-space indent, trailing newline). */
std::string structure_to_json(const StructureSpec& spec);

/**
 * Parses {"alphabet_size": k, "equations": [{"lhs": ..., "rhs": ...}, ...]}
 * where each word is either "z*u" or {"tail": [...], "head": [...]}.
 */
EquationsSpec parse_equations_json(const std::string& text);

}  // namespace ssg
