#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace ssg {

/// A letter of the alphabet X = {0, ..., k-1}.
using Letter = uint8_t;

/**
 * A finite word over X, stored in display order: letters[0] is the leftmost
 * (deepest) letter, letters.back() the rightmost. Word positions are indexed
 * from the right starting at 1, so position 1 is letters.back().
 */
struct FiniteWord {
  std::vector<Letter> letters;

  bool empty() const { return letters.empty(); }
  size_t size() const { return letters.size(); }
  auto operator<=>(const FiniteWord&) const = default;
};

/**
 * A left-infinite, eventually periodic word ...zzz·u: the block `tail` (z)
 * repeats forever to the left of the finite `head` (u). Both parts are stored
 * in display order (leftmost letter first); the head's last letter is the
 * rightmost letter of the whole word. Canonical form (see normalize): the
 * tail block is primitive and the head is shortest.
 */
struct EventuallyPeriodicWord {
  FiniteWord tail;  ///< repeating block z, never empty
  FiniteWord head;  ///< finite suffix u, possibly empty
  auto operator<=>(const EventuallyPeriodicWord&) const = default;
};

/**
 * Canonical form: replaces the tail block by its primitive root and absorbs
 * head letters into the tail while the leftmost head letter equals the
 * leftmost tail letter (each absorption rotates the block). Two inputs denote
 * the same left-infinite word iff their normal forms are equal.
 * Throws InvalidInput if the tail block is empty.
 */
EventuallyPeriodicWord normalize(const EventuallyPeriodicWord& word);

/** Drops the rightmost letter. The result is canonical if the input was. */
EventuallyPeriodicWord shift(const EventuallyPeriodicWord& word);

/** Appends finite `suffix` on the right, then normalizes. */
EventuallyPeriodicWord append(const EventuallyPeriodicWord& word,
                              const FiniteWord& suffix);

/**
 * The letter at 1-based position `pos` counted from the right (position 1 is
 * the rightmost letter); positions beyond the head read from the repeating
 * block.
 */
Letter letter_at(const EventuallyPeriodicWord& word, uint64_t pos);

/**
 * The rightmost `count` letters in display order (leftmost first). Two
 * canonical-form words are equal iff their expansions agree for
 * count >= tail size + head size of both.
 */
FiniteWord expand(const EventuallyPeriodicWord& word, size_t count);

/** Renders letters as decimal digits, e.g. "010". Requires letters <= 9. */
std::string to_string(const FiniteWord& word);

/** Renders as "z*u", e.g. "1*00"; an empty head gives "1*". */
std::string to_string(const EventuallyPeriodicWord& word);

/**
 * Parses a finite word: either a digit string ("010", "" for empty) or a
 * bracketed list ("[0,1,0]", "[]"). Letters must be < alphabet_size.
 */
FiniteWord parse_finite_word(const std::string& text, int alphabet_size);

/**
 * Parses "z*u" with both sides in either finite-word syntax, e.g. "1*00" or
 * "[1]*[0,0]". The result is normalized.
 */
EventuallyPeriodicWord parse_word(const std::string& text, int alphabet_size);

}  // namespace ssg
