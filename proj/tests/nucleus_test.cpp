#include "ssg/nucleus.hpp"

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

bool contains(const std::vector<Element>& v, Element e) {
  return std::find(v.begin(), v.end(), e) != v.end();
}

std::set<std::string> element_keys(const Nucleus& nucleus) {
  std::set<std::string> keys;
  for (Element e : nucleus.elements)
    keys.insert(e.store()->canonical_key(e));
  return keys;
}

}  // namespace

TEST_CASE("eventual_states: states on or past a cycle of the closure") {
  auto adding = corpus_group("adding_machine");
  Element a = generator(adding, "a");
  auto ev = eventual_states(a);
  CHECK(ev.size() == 2);  // both 1 and a sit on cycles
  CHECK(contains(ev, a));
  CHECK(contains(ev, adding.store->identity()));

  // The interval generator g1 = (01)(1, 1) is not on any cycle: every long
  // enough restriction is trivial.
  auto interval = corpus_group("interval");
  auto g1_ev = eventual_states(generator(interval, "g1"));
  CHECK(g1_ev.size() == 1);
  CHECK(g1_ev[0] == interval.store->identity());

  // g2 = (g1, g2) loops at letter 1, and g1 hangs off that cycle, so all
  // three closure states are eventual.
  auto g2_ev = eventual_states(generator(interval, "g2"));
  CHECK(g2_ev.size() == 3);
}

TEST_CASE("nucleus: odometer nucleus is the generator, its inverse, and 1") {
  auto group = corpus_group("adding_machine");
  Nucleus n = compute_nucleus(group, 100);
  REQUIRE(n.elements.size() == 3);
  Element a = generator(group, "a");
  CHECK(n.contains(a));
  CHECK(n.contains(invert(a)));
  CHECK(n.contains(group.store->identity()));
  CHECK_FALSE(n.contains(multiply(a, a)));
}

TEST_CASE("nucleus: odometer wreath recursion listing is stable") {
  auto group = corpus_group("adding_machine");
  Nucleus n = compute_nucleus(group, 100);
  auto lines = moore_to_lines(n.diagram);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "1 = (1, 1)");
  CHECK(lines[1] == "s1 = (01)(s1, 1)");  // the inverse, auto-named, sorts first
  CHECK(lines[2] == "a = (01)(1, a)");
}

TEST_CASE("nucleus: self-inverse generator sets need no extra elements") {
  auto group = corpus_group("hanoi");
  Nucleus n = compute_nucleus(group, 100);
  CHECK(n.elements.size() == 4);
  for (Element g : group.generators) CHECK(n.contains(g));
  // Each nucleus state carries three letter edges.
  CHECK(n.diagram.edges.size() == 12);
  // The a01 state loops on the fixed letter 2.
  Element a01 = generator(group, "a01");
  for (const MooreEdge& e : n.diagram.edges) {
    if (n.diagram.states[e.from] == a01 && e.in == 2) {
      CHECK(e.out == 2);
      CHECK(n.diagram.states[e.to] == a01);
    }
  }
}

TEST_CASE("nucleus: product elements appear when restrictions need them") {
  auto group = corpus_group("wide_overlap");
  Nucleus n = compute_nucleus(group, 100);
  CHECK(n.elements.size() == 5);
  Element g = generator(group, "g");
  Element h = generator(group, "h");
  CHECK(n.contains(g));
  CHECK(n.contains(h));
  CHECK(n.contains(multiply(g, h)));  // gh = (2)(aa=1... ) stays in the nucleus
  CHECK(n.contains(generator(group, "a")));
}

TEST_CASE("nucleus: interval and first-level relatives") {
  auto interval = corpus_group("interval");
  Nucleus n = compute_nucleus(interval, 100);
  CHECK(n.elements.size() == 3);
  CHECK(n.contains(generator(interval, "g1")));
  CHECK(n.contains(generator(interval, "g2")));

  auto grig = corpus_group("grigorchuk");
  CHECK(compute_nucleus(grig, 100).elements.size() == 5);

  auto penta = corpus_group("pentakun");
  CHECK(compute_nucleus(penta, 200).elements.size() == 6);
}

TEST_CASE("nucleus: hexakun closes with 71 elements") {
  auto group = corpus_group("hexakun");
  Nucleus n = compute_nucleus(group, 1000);
  CHECK(n.elements.size() == 71);
  for (Element g : group.generators) CHECK(n.contains(g));
}

TEST_CASE("nucleus: restriction- and inverse-closed by construction") {
  for (const char* name : {"adding_machine", "hanoi", "wide_overlap", "grigorchuk"}) {
    auto group = corpus_group(name);
    Nucleus n = compute_nucleus(group, 500);
    const int k = group.alphabet_size();
    for (Element e : n.elements) {
      CHECK(n.contains(invert(e)));
      for (int x = 0; x < k; ++x)
        CHECK(n.contains(group.store->child(e, static_cast<Letter>(x))));
    }
  }
}

TEST_CASE("nucleus: identity-only group has the trivial nucleus") {
  GroupSpec spec = parse_group_json(R"({
    "alphabet_size": 2,
    "generators": {"e": {"perm": [0, 1], "rest": [[], []]}}
  })");
  Group group = realize(spec, 100);
  Nucleus n = compute_nucleus(group, 100);
  CHECK(n.elements.size() == 1);
  CHECK(n.elements[0] == group.store->identity());
}

TEST_CASE("nucleus: computation is deterministic across runs") {
  auto first = corpus_group("wide_overlap");
  auto second = corpus_group("wide_overlap");
  Nucleus n1 = compute_nucleus(first, 100);
  Nucleus n2 = compute_nucleus(second, 100);
  CHECK(element_keys(n1) == element_keys(n2));
  CHECK(moore_to_lines(n1.diagram) == moore_to_lines(n2.diagram));
  CHECK(moore_to_dot(n1.diagram, "nucleus") == moore_to_dot(n2.diagram, "nucleus"));
}

TEST_CASE("nucleus: overrunning the candidate bound raises the bound error") {
  auto group = corpus_group("lamplighter");
  try {
    compute_nucleus(group, 256);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoundExceeded);
  }
}

TEST_CASE("is_contracting: returns the nucleus or an honest unknown") {
  auto adding = corpus_group("adding_machine");
  ContractionResult yes = is_contracting(adding, 100);
  CHECK(yes.known);
  CHECK(yes.nucleus.elements.size() == 3);
  CHECK(yes.reason.empty());

  auto lamp = corpus_group("lamplighter");
  ContractionResult no = is_contracting(lamp, 256);
  CHECK_FALSE(no.known);
  CHECK(no.reason.find("bound") != std::string::npos);
}

TEST_CASE("is_contracting: a larger bound does not change a found nucleus") {
  auto group = corpus_group("hanoi");
  ContractionResult small = is_contracting(group, 50);
  ContractionResult large = is_contracting(group, 5000);
  REQUIRE(small.known);
  REQUIRE(large.known);
  CHECK(element_keys(small.nucleus) == element_keys(large.nucleus));
}
