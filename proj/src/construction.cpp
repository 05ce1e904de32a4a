#include "ssg/construction.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "ssg/analysis.hpp"
#include "ssg/errors.hpp"
#include "ssg/nucleus.hpp"

namespace ssg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string class_label(size_t i) { return "class " + std::to_string(i); }

void check_letters(const std::vector<Letter>& letters, int k,
                   const std::string& where) {
  for (Letter x : letters) {
    if (static_cast<int>(x) >= k) {
      fail_invalid(where + ": letter " + std::to_string(static_cast<int>(x)) +
                   " is outside the alphabet");
    }
  }
}

bool sets_meet(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  for (Letter x : a) {
    if (std::binary_search(b.begin(), b.end(), x)) return true;
  }
  return false;
}

uint64_t lcm_u64(uint64_t a, uint64_t b) { return a / std::gcd(a, b) * b; }

}  // namespace

void validate_spec(const StructureSpec& spec) {
  if (spec.alphabet_size < 1 || spec.alphabet_size > 200) {
    fail_invalid("alphabet_size must be between 1 and 200");
  }
  const int k = spec.alphabet_size;

  for (size_t i = 0; i < spec.classes.size(); ++i) {
    const GluingClass& cls = spec.classes[i];
    const std::string where = class_label(i);
    if (cls.tail.empty()) fail_invalid(where + ": recurring block is empty");
    check_letters(cls.tail.letters, k, where);
    if (normalize(EventuallyPeriodicWord{cls.tail, {}}).tail != cls.tail) {
      fail_invalid(where + ": recurring block is not primitive");
    }
    if (cls.sets.empty()) fail_invalid(where + ": no letter sets");
    for (size_t j = 0; j < cls.sets.size(); ++j) {
      const auto& set = cls.sets[j];
      const std::string at = where + ", set " + std::to_string(j);
      if (set.empty()) fail_invalid(at + ": empty");
      check_letters(set, k, at);
      for (size_t t = 0; t + 1 < set.size(); ++t) {
        if (set[t] >= set[t + 1]) {
          fail_invalid(at + ": letters must be strictly increasing");
        }
      }
    }
    if (std::binary_search(cls.sets.front().begin(), cls.sets.front().end(),
                           cls.tail.letters.front())) {
      fail_invalid(where +
                   ": the deepest set contains the recurring block's leading "
                   "letter, so some members are not in canonical form");
    }
  }

  // Pairwise: same-block classes compared from the deep end must either be
  // disjoint at their first difference or run out of sets while still equal
  // (which makes the shorter class a shift of the longer one).
  for (size_t i = 0; i < spec.classes.size(); ++i) {
    for (size_t j = i + 1; j < spec.classes.size(); ++j) {
      const GluingClass& a = spec.classes[i];
      const GluingClass& b = spec.classes[j];
      if (a.tail != b.tail) continue;
      const size_t depth = std::min(a.sets.size(), b.sets.size());
      size_t n = 0;
      for (; n < depth; ++n) {
        if (a.sets[n] == b.sets[n]) continue;
        if (sets_meet(a.sets[n], b.sets[n])) {
          fail_invalid(class_label(i) + " and " + class_label(j) +
                       ": the first differing sets from the deep end overlap "
                       "without being equal");
        }
        break;
      }
      if (n == depth && a.sets.size() == b.sets.size()) {
        fail_invalid(class_label(i) + " and " + class_label(j) +
                     " are identical");
      }
    }
  }

  // Shift closure: dropping rightmost sets must land on a listed class until
  // only singleton sets remain.
  for (size_t i = 0; i < spec.classes.size(); ++i) {
    const GluingClass& cls = spec.classes[i];
    for (size_t drop = 1; drop < cls.sets.size(); ++drop) {
      std::vector<std::vector<Letter>> rest(cls.sets.begin(),
                                            cls.sets.end() - drop);
      bool identifies = false;
      for (const auto& set : rest) identifies = identifies || set.size() > 1;
      if (!identifies) break;
      bool listed = false;
      for (size_t j = 0; j < spec.classes.size() && !listed; ++j) {
        listed = j != i && spec.classes[j].tail == cls.tail &&
                 spec.classes[j].sets == rest;
      }
      if (!listed) {
        fail_invalid(class_label(i) + ": its shift by " +
                     std::to_string(drop) + " letters is not listed");
      }
    }
  }
}

SynthesisResult synthesize(const StructureSpec& spec) {
  validate_spec(spec);
  std::vector<GluingClass> classes = spec.classes;
  std::sort(classes.begin(), classes.end());
  const int k = spec.alphabet_size;

  struct GenSlot {
    std::string name;
  };
  std::vector<ElementStore::LocalNode> nodes;
  std::vector<GenSlot> slots;

  for (size_t ci = 0; ci < classes.size(); ++ci) {
    const GluingClass& cls = classes[ci];
    const size_t depth = cls.sets.size();
    const size_t blk = cls.tail.size();
    const size_t base = nodes.size();
    auto ref = [&](size_t j) {
      return j == 0 ? ElementStore::ChildRef::interned(0)
                    : ElementStore::ChildRef::local(
                          static_cast<uint32_t>(base + j - 1));
    };
    // Generators g_1 .. g_{depth+blk-1}: the first `depth` descend through
    // the letter sets (deepest set last), the rest walk the recurring block;
    // the block's leading letter at level `depth` closes the cycle.
    for (size_t j = 1; j <= depth + blk - 1; ++j) {
      ElementStore::LocalNode node;
      node.perm.resize(static_cast<size_t>(k));
      std::iota(node.perm.begin(), node.perm.end(), static_cast<Letter>(0));
      node.children.assign(static_cast<size_t>(k),
                           ElementStore::ChildRef::interned(0));
      if (j <= depth) {
        const auto& set = cls.sets[depth - j];
        for (size_t t = 0; t + 1 < set.size(); ++t) {
          node.perm[set[t]] = set[t + 1];
        }
        if (set.size() > 1) node.perm[set.back()] = set.front();
        for (Letter x : set) node.children[x] = ref(j - 1);
        if (j == depth) {
          node.children[cls.tail.letters.front()] = ref(depth + blk - 1);
        }
      } else {
        Letter z = cls.tail.letters[blk - (j - depth)];
        node.children[z] = ref(j - 1);
      }
      nodes.push_back(std::move(node));
      slots.push_back({"g" + std::to_string(slots.size() + 1)});
    }
  }

  SynthesisResult r;
  r.generators_before = slots.size();
  r.group.alphabet_size = k;
  if (slots.empty()) return r;

  ElementStore store(k);
  std::vector<Element> elems = store.intern(nodes);

  std::map<uint32_t, std::string> keeper;
  std::vector<Element> survivors;
  for (size_t t = 0; t < slots.size(); ++t) {
    Element e = elems[t];
    if (store.is_identity(e)) {
      r.identified.emplace_back(slots[t].name, "1");
      continue;
    }
    auto [it, fresh] = keeper.emplace(e.id(), slots[t].name);
    if (fresh) {
      survivors.push_back(e);
      r.group.names.push_back(slots[t].name);
    } else {
      r.identified.emplace_back(slots[t].name, it->second);
    }
  }

  std::map<std::string, int32_t> index;
  for (size_t t = 0; t < r.group.names.size(); ++t) {
    index[r.group.names[t]] = static_cast<int32_t>(t) + 1;
  }
  for (Element e : survivors) {
    GeneratorSpec g;
    g.perm = store.perm(e);
    g.rest.assign(static_cast<size_t>(k), {});
    for (int x = 0; x < k; ++x) {
      Element c = store.child(e, static_cast<Letter>(x));
      if (store.is_identity(c)) continue;
      auto it = keeper.find(c.id());
      if (it == keeper.end()) {
        fail_internal("synthesized restriction is not a generator");
      }
      g.rest[static_cast<size_t>(x)].push_back(index.at(it->second));
    }
    r.group.generators.push_back(std::move(g));
  }
  return r;
}

StructureSpec normalize_equations(const EquationsSpec& eqs) {
  if (eqs.alphabet_size < 1 || eqs.alphabet_size > 200) {
    fail_invalid("alphabet_size must be between 1 and 200");
  }
  const int k = eqs.alphabet_size;

  std::vector<GluingClass> classes;
  for (size_t i = 0; i < eqs.equations.size(); ++i) {
    const std::string where = "equation " + std::to_string(i);
    EventuallyPeriodicWord u = normalize(eqs.equations[i].lhs);
    EventuallyPeriodicWord v = normalize(eqs.equations[i].rhs);
    check_letters(u.tail.letters, k, where);
    check_letters(u.head.letters, k, where);
    check_letters(v.tail.letters, k, where);
    check_letters(v.head.letters, k, where);
    if (u == v) fail_invalid(where + ": both sides are the same word");

    // Align at the first difference from the right: beyond the heads plus
    // one common period the words repeat, so a difference exists below that.
    const uint64_t period = lcm_u64(u.tail.size(), v.tail.size());
    const uint64_t horizon = std::max(u.head.size(), v.head.size()) + period;
    uint64_t d = 0;
    for (uint64_t p = 1; p <= horizon; ++p) {
      if (letter_at(u, p) != letter_at(v, p)) {
        d = p;
        break;
      }
    }
    if (d == 0) fail_internal(where + ": distinct words never differ");
    for (uint64_t s = 1; s < d; ++s) {
      u = shift(u);
      v = shift(v);
    }
    if (u.tail != v.tail) {
      fail_invalid("shift map undefined: the recurring blocks of " + where +
                   " differ after alignment");
    }
    if (u.head.size() != v.head.size()) {
      fail_invalid("shift map undefined: the finite parts of " + where +
                   " are misaligned");
    }
    GluingClass cls;
    cls.tail = u.tail;
    for (size_t t = 0; t < u.head.size(); ++t) {
      std::vector<Letter> set{u.head.letters[t], v.head.letters[t]};
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      cls.sets.push_back(std::move(set));
    }
    classes.push_back(std::move(cls));
  }

  classes = fuse_classes(std::move(classes));

  // The one-letter shift of every class must be covered by a listed class
  // (positionwise containment) until only singleton sets remain.
  for (const GluingClass& cls : classes) {
    for (size_t drop = 1; drop < cls.sets.size(); ++drop) {
      std::vector<std::vector<Letter>> rest(cls.sets.begin(),
                                            cls.sets.end() - drop);
      bool identifies = false;
      for (const auto& set : rest) identifies = identifies || set.size() > 1;
      if (!identifies) break;
      bool covered = false;
      for (const GluingClass& other : classes) {
        if (other.tail != cls.tail || other.sets.size() != rest.size()) {
          continue;
        }
        bool inside = true;
        for (size_t t = 0; t < rest.size() && inside; ++t) {
          inside = std::includes(other.sets[t].begin(), other.sets[t].end(),
                                 rest[t].begin(), rest[t].end());
        }
        if (inside) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        fail_invalid(
            "shift map undefined: the shift of a class is not covered by the "
            "listed classes");
      }
    }
  }

  StructureSpec out{eqs.alphabet_size, std::move(classes)};
  try {
    validate_spec(out);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) {
      fail_invalid(std::string("inconsistent equations: ") + e.what());
    }
    throw;
  }
  return out;
}

RoundtripReport roundtrip_verify(const StructureSpec& spec, size_t bound) {
  validate_spec(spec);
  RoundtripReport rep;
  rep.input_classes = spec.classes;
  std::sort(rep.input_classes.begin(), rep.input_classes.end());

  SynthesisResult syn = synthesize(spec);
  rep.generators_before = syn.generators_before;
  rep.generators_after = syn.group.names.size();

  Group group = realize(syn.group, bound);
  Nucleus nucleus = compute_nucleus(group, bound);
  rep.nucleus_size = nucleus.elements.size();
  rep.condition2 = check_condition2(nucleus);
  rep.pcf = check_pcf(nucleus);
  if (!rep.condition2 || !rep.pcf) {
    rep.failure = std::string("the synthesized group fails the ") +
                  (!rep.condition2 ? "append-stability"
                                   : "post-critical-finiteness") +
                  " test";
    return rep;
  }
  rep.extracted_classes = gluing_classes(nucleus);
  rep.ok = rep.extracted_classes == rep.input_classes;
  if (!rep.ok) {
    rep.failure = "extracted gluing classes differ from the input classes";
  }
  return rep;
}

namespace {

std::vector<Letter> parse_letter_array(const json& arr,
                                       const std::string& where) {
  if (!arr.is_array()) fail_invalid(where + " must be an array of letters");
  std::vector<Letter> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer()) {
      fail_invalid(where + " must contain integers only");
    }
    const int64_t x = v.get<int64_t>();
    if (x < 0 || x > 199) {
      fail_invalid(where + ": letter " + std::to_string(x) +
                   " is out of range");
    }
    out.push_back(static_cast<Letter>(x));
  }
  return out;
}

int parse_alphabet_size(const json& doc, const std::string& what) {
  if (!doc.is_object()) fail_invalid(what + ": top level must be an object");
  if (!doc.contains("alphabet_size") ||
      !doc["alphabet_size"].is_number_integer()) {
    fail_invalid(what + ": missing integer \"alphabet_size\"");
  }
  const int64_t k = doc["alphabet_size"].get<int64_t>();
  if (k < 1 || k > 200) {
    fail_invalid(what + ": alphabet_size must be between 1 and 200");
  }
  return static_cast<int>(k);
}

EventuallyPeriodicWord parse_word_entry(const json& v, int k,
                                        const std::string& where) {
  try {
    if (v.is_string()) return parse_word(v.get<std::string>(), k);
    if (v.is_object()) {
      if (!v.contains("tail")) {
        fail_invalid("word object needs a \"tail\" array");
      }
      FiniteWord tail{parse_letter_array(v["tail"], "\"tail\"")};
      FiniteWord head;
      if (v.contains("head")) {
        head.letters = parse_letter_array(v["head"], "\"head\"");
      }
      check_letters(tail.letters, k, "\"tail\"");
      check_letters(head.letters, k, "\"head\"");
      return normalize(EventuallyPeriodicWord{tail, head});
    }
    fail_invalid("word must be a string like \"1*00\" or an object");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) {
      fail_invalid(where + ": " + e.what());
    }
    throw;
  }
}

}  // namespace

StructureSpec parse_structure_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_invalid(std::string("structure: ") + e.what());
  }
  StructureSpec spec;
  spec.alphabet_size = parse_alphabet_size(doc, "structure");
  if (!doc.contains("classes") || !doc["classes"].is_array()) {
    fail_invalid("structure: missing array \"classes\"");
  }
  const json& arr = doc["classes"];
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "structure, " + class_label(i);
    const json& entry = arr[i];
    if (!entry.is_object()) fail_invalid(where + ": must be an object");
    if (!entry.contains("tail")) fail_invalid(where + ": missing \"tail\"");
    if (!entry.contains("sets") || !entry["sets"].is_array()) {
      fail_invalid(where + ": missing array \"sets\"");
    }
    GluingClass cls;
    cls.tail.letters = parse_letter_array(entry["tail"], where + ".tail");
    for (size_t j = 0; j < entry["sets"].size(); ++j) {
      std::vector<Letter> set = parse_letter_array(
          entry["sets"][j], where + ".sets[" + std::to_string(j) + "]");
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      cls.sets.push_back(std::move(set));
    }
    spec.classes.push_back(std::move(cls));
  }
  return spec;
}

std::string structure_to_json(const StructureSpec& spec) {
  ordered_json doc;
  doc["alphabet_size"] = spec.alphabet_size;
  doc["classes"] = ordered_json::array();
  for (const auto& cls : spec.classes) {
    ordered_json c;
    c["tail"] = cls.tail.letters;
    c["sets"] = cls.sets;
    doc["classes"].push_back(std::move(c));
  }
  return doc.dump(2) + "\n";
}

EquationsSpec parse_equations_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_invalid(std::string("equations: ") + e.what());
  }
  EquationsSpec spec;
  spec.alphabet_size = parse_alphabet_size(doc, "equations");
  if (!doc.contains("equations") || !doc["equations"].is_array()) {
    fail_invalid("equations: missing array \"equations\"");
  }
  const json& arr = doc["equations"];
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "equations[" + std::to_string(i) + "]";
    const json& entry = arr[i];
    if (!entry.is_object() || !entry.contains("lhs") ||
        !entry.contains("rhs")) {
      fail_invalid(where + ": must be an object with \"lhs\" and \"rhs\"");
    }
    GlueEquation eq;
    eq.lhs = parse_word_entry(entry["lhs"], spec.alphabet_size, where + ".lhs");
    eq.rhs = parse_word_entry(entry["rhs"], spec.alphabet_size, where + ".rhs");
    spec.equations.push_back(std::move(eq));
  }
  return spec;
}

}  // namespace ssg
