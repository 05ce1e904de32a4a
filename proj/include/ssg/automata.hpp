#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssg/words.hpp"

namespace ssg {

class ElementStore;

/**
 * A tree automorphism, represented as a state of a canonical minimal
 * automaton held by an ElementStore. Two Elements of the same store denote
 * the same automorphism iff their ids are equal; this is the store's central
 * invariant (no two interned states are bisimilar).
 */
class Element {
 public:
  Element() = default;

  ElementStore* store() const { return store_; }
  uint32_t id() const { return id_; }
  bool valid() const { return store_ != nullptr; }

  friend bool operator==(const Element& a, const Element& b) {
    return a.store_ == b.store_ && a.id_ == b.id_;
  }
  friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }
  friend bool operator<(const Element& a, const Element& b) {
    return a.store_ == b.store_ ? a.id_ < b.id_ : a.store_ < b.store_;
  }

 private:
  friend class ElementStore;
  Element(ElementStore* store, uint32_t id) : store_(store), id_(id) {}

  ElementStore* store_ = nullptr;
  uint32_t id_ = 0;
};

/**
 * Hash-consing store of automaton states over a fixed alphabet.
 *
 * States are submitted as finite local graphs (intern); the store merges
 * bisimilar local states, reuses existing states wherever a submitted state
 * is bisimilar to one already interned (including across cycles), and
 * allocates canonical fresh states otherwise. The intern table is the single
 * mutable resource and is mutex-guarded, so concurrent interning is safe.
 */
class ElementStore {
 public:
  explicit ElementStore(int alphabet_size);

  int alphabet_size() const { return k_; }

  /** The identity automorphism (always state 0). */
  Element identity() { return Element(this, 0); }

  /** Reference from a submitted local node to either a local peer or an interned state. */
  struct ChildRef {
    bool is_interned = false;
    uint32_t index = 0;  ///< local node index, or interned state id

    static ChildRef local(uint32_t i) { return {false, i}; }
    static ChildRef interned(uint32_t id) { return {true, id}; }
  };

  /** One submitted automaton state: root permutation plus one child per letter. */
  struct LocalNode {
    std::vector<Letter> perm;       ///< images of 0..k-1 under the root action
    std::vector<ChildRef> children; ///< children[x] = restriction at letter x
  };

  /**
   * Canonicalizes a local automaton graph against the store. Returns the
   * interned Element for each submitted node.
   */
  std::vector<Element> intern(const std::vector<LocalNode>& nodes);

  std::vector<Letter> perm(Element e) const;
  Element child(Element e, Letter x) const;
  bool is_identity(Element e) const { return e.id_ == 0; }
  size_t size() const;

  /**
   * A deterministic key for an element, independent of allocation order:
   * the breadth-first canonical form of its reachable automaton. Distinct
   * elements always have distinct keys. Keys are cached.
   */
  std::string canonical_key(Element e);

 private:
  struct State {
    std::vector<Letter> perm;
    std::vector<uint32_t> children;
  };

  std::string flat_signature(const std::vector<Letter>& perm,
                             const std::vector<uint32_t>& children) const;

  int k_;
  mutable std::mutex mutex_;
  std::vector<State> states_;
  std::unordered_map<std::string, uint32_t> flat_sigs_;
  std::unordered_map<std::string, std::vector<uint32_t>> cyclic_sigs_;
  std::unordered_map<uint32_t, std::string> key_cache_;
};

/** σ_g(x): the image of letter x under the root permutation of g. */
Letter apply(Element g, Letter x);

/** Composition g∘h (h applied first). Both elements must share a store. */
Element multiply(Element g, Element h);

/** The inverse automorphism. */
Element invert(Element g);

/** Restriction g|_w along a finite word (leftmost letter first). */
Element restrict_word(Element g, const FiniteWord& w);

/** The image of a finite word, leftmost letter consumed first. */
FiniteWord act(Element g, const FiniteWord& w);

/**
 * The image of a left-infinite eventually periodic word. Letters are consumed
 * right to left; the (state, tail-phase) orbit eventually cycles, which makes
 * the image eventually periodic as well. The result is canonical.
 */
EventuallyPeriodicWord act_periodic(Element g, const EventuallyPeriodicWord& w);

/**
 * Equality of automorphisms. Elements are canonical by construction, so this
 * is total on constructed elements (bounds apply when elements are first
 * built, not here).
 */
bool decide_equal(Element g, Element h);

/** All states reachable from g by restrictions, g included, in canonical order. */
std::vector<Element> state_closure(Element g);

/** Sorts by canonical key (shorter first, then lexicographic), identity first. */
void sort_elements(std::vector<Element>& elements);

// ---------------------------------------------------------------------------
// Moore diagrams

struct MooreEdge {
  uint32_t from;  ///< index into MooreDiagram::states
  Letter in;
  Letter out;
  uint32_t to;    ///< index into MooreDiagram::states
};

/** A restriction-closed state set with labeled transitions g --(x|σ_g(x))--> g|_x. */
struct MooreDiagram {
  std::vector<Element> states;       ///< canonical order
  std::vector<std::string> names;    ///< display names, parallel to states
  std::vector<MooreEdge> edges;      ///< sorted by (from, in)
};

/**
 * Builds the Moore diagram of a restriction-closed state set. `name_hints`
 * maps element ids to display names; unnamed states get "s1", "s2", ... in
 * canonical order and the identity is always named "1".
 */
MooreDiagram build_moore(const std::vector<Element>& states,
                         const std::map<uint32_t, std::string>& name_hints);

/** Renders a Moore diagram as deterministic ASCII Graphviz DOT. */
std::string moore_to_dot(const MooreDiagram& diagram, const std::string& graph_name);

/** Renders "name = (01)(c0, c1, ...)" wreath recursion lines for a diagram. */
std::vector<std::string> moore_to_lines(const MooreDiagram& diagram);

/** Cycle notation for a permutation, e.g. "(01)" or "(012)(34)"; "" if trivial. */
std::string perm_to_cycles(const std::vector<Letter>& perm);

// ---------------------------------------------------------------------------
// Group description files

/**
 * A generator as written in a group file: a root permutation and, per letter,
 * a word in the generators (signed tokens: +i means generator i, -i its
 * inverse, 1-based). An empty word is the identity.
 */
struct GeneratorSpec {
  std::vector<Letter> perm;
  std::vector<std::vector<int32_t>> rest;
};

/** A parsed group description. */
struct GroupSpec {
  int alphabet_size = 0;
  std::vector<std::string> names;
  std::vector<GeneratorSpec> generators;

  int generator_index(const std::string& name) const;  // -1 if absent
};

/** A realized group: canonical generator elements over a shared store. */
struct Group {
  std::shared_ptr<ElementStore> store;
  std::vector<std::string> names;
  std::vector<Element> generators;

  int alphabet_size() const { return store->alphabet_size(); }
  std::map<uint32_t, std::string> name_hints() const;
};

/** Parses group JSON; diagnostics include line numbers for malformed files. */
GroupSpec parse_group_json(const std::string& text);

GroupSpec load_group_file(const std::string& path);

/** Serializes a GroupSpec back to deterministic JSON. */
std::string group_spec_to_json(const GroupSpec& spec);

/**
 * Builds canonical elements for the generators. The wreath recursion is
 * unfolded as a word automaton (restrictions are generator words); if more
 * than `closure_bound` distinct reduced words appear, the closure is
 * considered unresolved and BoundExceeded is raised.
 */
Group realize(const GroupSpec& spec, size_t closure_bound);

/** Reads a whole file into a string (InvalidInput on failure). */
std::string read_file(const std::string& path);

}  // namespace ssg
