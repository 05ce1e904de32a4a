#include "ssg/automata.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "corpus_helpers.hpp"
#include "ssg/errors.hpp"

using namespace ssg;
using ssg::testing::corpus_group;
using ssg::testing::generator;

namespace {

FiniteWord fword(const std::string& digits) {
  FiniteWord w;
  for (char c : digits) w.letters.push_back(static_cast<Letter>(c - '0'));
  return w;
}

EventuallyPeriodicWord eword(const std::string& tail, const std::string& head) {
  return EventuallyPeriodicWord{fword(tail), fword(head)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Interning and canonicality

TEST_CASE("intern: the identity is state 0 and is reused") {
  ElementStore store(2);
  // A node whose permutation is trivial and whose children point at the
  // interned identity is the identity itself.
  ElementStore::LocalNode node;
  node.perm = {0, 1};
  node.children = {ElementStore::ChildRef::interned(0),
                   ElementStore::ChildRef::interned(0)};
  auto out = store.intern({node});
  CHECK(out.size() == 1);
  CHECK(out[0] == store.identity());
  CHECK(store.is_identity(out[0]));
}

TEST_CASE("intern: resubmitting a cyclic node returns the original element") {
  // The binary odometer state a = (01)(1, a) refers to itself, so the store
  // must recognize the resubmitted copy through its own cycle.
  ElementStore store(2);
  ElementStore::LocalNode node;
  node.perm = {1, 0};
  node.children = {ElementStore::ChildRef::interned(0),
                   ElementStore::ChildRef::local(0)};
  Element first = store.intern({node})[0];
  Element second = store.intern({node})[0];
  CHECK(first == second);
  CHECK(store.size() == 2);  // identity + one new state, nothing leaked
}

TEST_CASE("intern: a two-state unfolding collapses onto the one-state original") {
  // Submitting a -> a' -> a (two bisimilar copies of the odometer) must
  // identify both nodes with the single existing state.
  ElementStore store(2);
  ElementStore::LocalNode direct;
  direct.perm = {1, 0};
  direct.children = {ElementStore::ChildRef::interned(0),
                     ElementStore::ChildRef::local(0)};
  Element a = store.intern({direct})[0];

  ElementStore::LocalNode n0, n1;
  n0.perm = {1, 0};
  n0.children = {ElementStore::ChildRef::interned(0),
                 ElementStore::ChildRef::local(1)};
  n1.perm = {1, 0};
  n1.children = {ElementStore::ChildRef::interned(0),
                 ElementStore::ChildRef::local(0)};
  auto out = store.intern({n0, n1});
  CHECK(out[0] == a);
  CHECK(out[1] == a);
  CHECK(store.size() == 2);
}

TEST_CASE("intern: bisimilar local nodes within one submission are merged") {
  ElementStore store(2);
  // Two copies of the order-two swap (01)(1, 1).
  ElementStore::LocalNode swap;
  swap.perm = {1, 0};
  swap.children = {ElementStore::ChildRef::interned(0),
                   ElementStore::ChildRef::interned(0)};
  auto out = store.intern({swap, swap});
  CHECK(out[0] == out[1]);
  CHECK(store.size() == 2);
}

TEST_CASE("canonical_key: equal across stores, distinct across elements") {
  auto g1 = corpus_group("adding_machine");
  auto g2 = corpus_group("adding_machine");
  Element a1 = generator(g1, "a");
  Element a2 = generator(g2, "a");
  CHECK(a1 != a2);  // different stores
  CHECK(g1.store->canonical_key(a1) == g2.store->canonical_key(a2));
  CHECK(g1.store->canonical_key(a1) != g1.store->canonical_key(g1.store->identity()));
  CHECK(g1.store->canonical_key(a1) != g1.store->canonical_key(invert(a1)));
}

// ---------------------------------------------------------------------------
// Group arithmetic

TEST_CASE("multiply: product of the interval generators in both orders") {
  auto group = corpus_group("interval");
  Element g1 = generator(group, "g1");
  Element g2 = generator(group, "g2");

  // g1 g2 swaps the top letter and restricts to (g1, g2):
  // (g1 g2)|_x = g1|_{g2(x)} g2|_x with g2 fixing both letters.
  Element p = multiply(g1, g2);
  CHECK(apply(p, 0) == 1);
  CHECK(apply(p, 1) == 0);
  CHECK(p.store()->child(p, 0) == g1);
  CHECK(p.store()->child(p, 1) == g2);

  Element q = multiply(g2, g1);
  CHECK(apply(q, 0) == 1);
  CHECK(q.store()->child(q, 0) == g2);
  CHECK(q.store()->child(q, 1) == g1);
  CHECK(p != q);
}

TEST_CASE("multiply: the identity is neutral on both sides") {
  auto group = corpus_group("wide_overlap");
  Element one = group.store->identity();
  for (Element g : group.generators) {
    CHECK(multiply(one, g) == g);
    CHECK(multiply(g, one) == g);
  }
}

TEST_CASE("invert: odometer inverse has the mirrored recursion") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  Element ai = invert(a);
  // a = (01)(1, a), so a^-1 = (01)(a^-1, 1).
  CHECK(apply(ai, 0) == 1);
  CHECK(group.store->child(ai, 0) == ai);
  CHECK(group.store->child(ai, 1) == group.store->identity());
  CHECK(multiply(a, ai) == group.store->identity());
  CHECK(multiply(ai, a) == group.store->identity());
}

TEST_CASE("invert: involution generators are their own inverses") {
  auto group = corpus_group("interval");
  CHECK(invert(generator(group, "g1")) == generator(group, "g1"));
  CHECK(invert(generator(group, "g2")) == generator(group, "g2"));
  CHECK(invert(group.store->identity()) == group.store->identity());
}

TEST_CASE("invert: double inversion returns the original element") {
  // Regression: the store once failed to recognize the re-interned cycle of
  // inv(inv(a)) and allocated a fresh state for it.
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  CHECK(invert(invert(a)) == a);
  size_t before = group.store->size();
  CHECK(invert(invert(invert(a))) == invert(a));
  CHECK(group.store->size() == before);  // no new states from reruns
}

TEST_CASE("restrict_word: follows the recursion letter by letter") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  CHECK(restrict_word(a, fword("1")) == a);
  CHECK(restrict_word(a, fword("0")) == group.store->identity());
  CHECK(restrict_word(a, fword("11")) == a);
  CHECK(restrict_word(a, fword("10")) == group.store->identity());
  CHECK(restrict_word(a, fword("")) == a);

  auto hexa = corpus_group("hexakun");
  CHECK(restrict_word(generator(hexa, "b0"), fword("2")) == generator(hexa, "a01"));
  CHECK(restrict_word(generator(hexa, "b0"), fword("0")) == generator(hexa, "b0"));
}

TEST_CASE("act: the odometer adds one with carry, leftmost letter first") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  CHECK(act(a, fword("0")) == fword("1"));
  CHECK(act(a, fword("1")) == fword("0"));
  CHECK(act(a, fword("11")) == fword("00"));
  CHECK(act(a, fword("110")) == fword("001"));  // carry reaches the third digit
  CHECK(act(a, fword("01")) == fword("11"));
  CHECK(act(group.store->identity(), fword("0101")) == fword("0101"));
  CHECK(act(a, fword("")) == fword(""));
}

TEST_CASE("act: composition order is h first, then g") {
  auto group = corpus_group("interval");
  Element g1 = generator(group, "g1");
  Element g2 = generator(group, "g2");
  FiniteWord w = fword("00");
  CHECK(act(multiply(g1, g2), w) == act(g1, act(g2, w)));
  CHECK(act(multiply(g2, g1), w) == act(g2, act(g1, w)));
  // The two products differ exactly on such words.
  CHECK(act(multiply(g1, g2), w) == fword("11"));
  CHECK(act(multiply(g2, g1), w) == fword("10"));
}

TEST_CASE("act_periodic: the odometer on periodic points") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  // ...111 + 1 = ...000 and ...000 + 1 = ...001.
  CHECK(act_periodic(a, eword("1", "")) == eword("0", ""));
  CHECK(act_periodic(a, eword("0", "")) == eword("0", "1"));
  CHECK(act_periodic(group.store->identity(), eword("01", "1")) == eword("01", "1"));
}

TEST_CASE("act_periodic: interval generators on the word ...111 0") {
  auto group = corpus_group("interval");
  Element g1 = generator(group, "g1");
  Element g2 = generator(group, "g2");
  // g1 = (01)(1, 1): the rightmost 0 maps to 1, which is then absorbed:
  // ...111 1 = ...111.
  CHECK(act_periodic(g1, eword("1", "0")) == eword("1", ""));
  // g2 = (g1, g2): position 1 reads 0 (fixed, continue as g1), position 2
  // reads 1 (g1 sends it to 0, continue as identity): ...111 00.
  CHECK(act_periodic(g2, eword("1", "0")) == eword("1", "00"));
}

TEST_CASE("act_periodic: result is canonical even when the phase shifts") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  // ...010101 + 1 = ...010110: image of (01)* under the odometer.
  auto img = act_periodic(a, eword("01", ""));
  CHECK(img == normalize(img));
  // Cross-check against the finite action. The boundary action consumes the
  // rightmost letter first while act() consumes the leftmost first, so the
  // expansions have to be reversed around the call.
  auto reversed = [](FiniteWord w) {
    std::reverse(w.letters.begin(), w.letters.end());
    return w;
  };
  FiniteWord rightmost12 = expand(eword("01", ""), 12);
  FiniteWord image12 = reversed(act(a, reversed(rightmost12)));
  CHECK(expand(img, 12) == image12);
}

TEST_CASE("decide_equal: identical automorphisms from different words") {
  auto group = corpus_group("interval");
  Element g1 = generator(group, "g1");
  Element g2 = generator(group, "g2");
  CHECK(decide_equal(multiply(g1, g1), group.store->identity()));
  CHECK(decide_equal(multiply(g2, g2), group.store->identity()));
  CHECK_FALSE(decide_equal(multiply(g1, g2), multiply(g2, g1)));
  CHECK(decide_equal(invert(multiply(g1, g2)), multiply(g2, g1)));
}

TEST_CASE("state_closure: all restrictions of an element") {
  auto adding = corpus_group("adding_machine");
  Element a = generator(adding, "a");
  auto closure = state_closure(a);
  CHECK(closure.size() == 2);
  CHECK(closure[0] == adding.store->identity());
  CHECK(std::count(closure.begin(), closure.end(), a) == 1);

  auto wide = corpus_group("wide_overlap");
  auto g_closure = state_closure(generator(wide, "g"));
  CHECK(g_closure.size() == 3);  // {1, a, g}
  CHECK(std::count(g_closure.begin(), g_closure.end(), generator(wide, "a")) == 1);
  CHECK(std::count(g_closure.begin(), g_closure.end(), generator(wide, "g")) == 1);

  auto id_closure = state_closure(adding.store->identity());
  CHECK(id_closure.size() == 1);
}

// ---------------------------------------------------------------------------
// Moore diagrams

TEST_CASE("build_moore: closure of the odometer has the expected edges") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  auto diagram = build_moore(state_closure(a), group.name_hints());
  REQUIRE(diagram.states.size() == 2);
  CHECK(diagram.names[0] == "1");
  CHECK(diagram.names[1] == "a");
  REQUIRE(diagram.edges.size() == 4);
  // Edges sorted by (from, in): identity loops, then a's two transitions.
  auto edge = [&](size_t i) {
    const MooreEdge& e = diagram.edges[i];
    return std::vector<int>{static_cast<int>(e.from), e.in, e.out,
                            static_cast<int>(e.to)};
  };
  CHECK(edge(0) == std::vector<int>{0, 0, 0, 0});
  CHECK(edge(1) == std::vector<int>{0, 1, 1, 0});
  CHECK(edge(2) == std::vector<int>{1, 0, 1, 0});  // a reads 0, writes 1, stops
  CHECK(edge(3) == std::vector<int>{1, 1, 0, 1});  // a reads 1, writes 0, carries
}

TEST_CASE("build_moore: unnamed states get stable fallback names") {
  auto group = corpus_group("adding_machine");
  Element ai = invert(generator(group, "a"));
  auto diagram = build_moore(state_closure(ai), group.name_hints());
  REQUIRE(diagram.states.size() == 2);
  CHECK(diagram.names[0] == "1");
  CHECK(diagram.names[1] == "s1");  // the inverse has no declared name
}

TEST_CASE("moore_to_lines: wreath recursion rendering") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  auto lines = moore_to_lines(build_moore(state_closure(a), group.name_hints()));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "1 = (1, 1)");
  CHECK(lines[1] == "a = (01)(1, a)");
}

TEST_CASE("moore_to_dot: deterministic ASCII output") {
  auto group = corpus_group("adding_machine");
  Element a = generator(group, "a");
  auto diagram = build_moore(state_closure(a), group.name_hints());
  std::string dot1 = moore_to_dot(diagram, "automaton");
  std::string dot2 = moore_to_dot(diagram, "automaton");
  CHECK(dot1 == dot2);
  CHECK(dot1.find("digraph automaton {") == 0);
  CHECK(dot1.find("\"a\" -> \"1\"") != std::string::npos);
  CHECK(dot1.find("label=\"0|1\"") != std::string::npos);
  for (char c : dot1) CHECK(static_cast<unsigned char>(c) < 128);
}

TEST_CASE("perm_to_cycles: cycle notation") {
  CHECK(perm_to_cycles({0, 1}) == "");
  CHECK(perm_to_cycles({1, 0}) == "(01)");
  CHECK(perm_to_cycles({1, 2, 0}) == "(012)");
  CHECK(perm_to_cycles({1, 0, 3, 2}) == "(01)(23)");
  CHECK(perm_to_cycles({2, 1, 0}) == "(02)");
}

TEST_CASE("sort_elements: identity first, order independent of insertion") {
  auto group = corpus_group("interval");
  std::vector<Element> v{generator(group, "g2"), group.store->identity(),
                         generator(group, "g1")};
  sort_elements(v);
  CHECK(v[0] == group.store->identity());
  std::vector<Element> w{generator(group, "g1"), generator(group, "g2"),
                         group.store->identity()};
  sort_elements(w);
  CHECK(v == w);
}

// ---------------------------------------------------------------------------
// Group files

TEST_CASE("parse_group_json: round-trips through the serializer") {
  std::string text = read_file(ssg::testing::corpus_path("hanoi.json"));
  GroupSpec spec = parse_group_json(text);
  CHECK(spec.alphabet_size == 3);
  CHECK(spec.names == std::vector<std::string>{"a01", "a02", "a12"});
  GroupSpec again = parse_group_json(group_spec_to_json(spec));
  CHECK(again.alphabet_size == spec.alphabet_size);
  CHECK(again.names == spec.names);
  for (size_t i = 0; i < spec.generators.size(); ++i) {
    CHECK(again.generators[i].perm == spec.generators[i].perm);
    CHECK(again.generators[i].rest == spec.generators[i].rest);
  }
}

TEST_CASE("parse_group_json: inverse tokens are understood") {
  GroupSpec spec = parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {"t": {"perm": [1, 0], "rest": [["t^-1"], []]}}
  })");
  REQUIRE(spec.generators.size() == 1);
  CHECK(spec.generators[0].rest[0] == std::vector<int32_t>{-1});
}

TEST_CASE("parse_group_json: rejects malformed input with a diagnostic") {
  CHECK_THROWS_AS(parse_group_json("{"), Error);
  // Non-bijective root permutation.
  CHECK_THROWS_AS(parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {"a": {"perm": [0, 0], "rest": [[], []]}}
  })"),
                  Error);
  // Restriction referring to an unknown generator.
  CHECK_THROWS_AS(parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {"a": {"perm": [0, 1], "rest": [["b"], []]}}
  })"),
                  Error);
  // Wrong number of restriction words.
  CHECK_THROWS_AS(parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {"a": {"perm": [0, 1], "rest": [[]]}}
  })"),
                  Error);
}

TEST_CASE("realize: raises the bound error when the word closure explodes") {
  GroupSpec spec = parse_group_json(read_file(ssg::testing::corpus_path("lamplighter.json")));
  try {
    realize(spec, 1);
    CHECK(false);  // must not get here
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoundExceeded);
  }
}

TEST_CASE("realize: identical generators become the same element") {
  GroupSpec spec = parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {
      "x": {"perm": [1, 0], "rest": [[], ["x"]]},
      "y": {"perm": [1, 0], "rest": [[], ["y"]]}
    }
  })");
  Group group = realize(spec, 100);
  CHECK(group.generators[0] == group.generators[1]);
}
