#include "ssg/limitspace.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <utility>

#include "ssg/errors.hpp"

namespace ssg {

namespace {

constexpr size_t kEquationGuard = 100000;

// Strongly connected components of the non-trivial part of the nucleus
// diagram (letter edges between non-trivial states only).
struct NontrivialSccs {
  std::vector<Element> states;
  std::map<uint32_t, size_t> index;  // element id -> position in states
  std::vector<int> comp;             // per state
  std::vector<char> comp_cyclic;     // per component
};

NontrivialSccs nontrivial_sccs(const Nucleus& nucleus) {
  NontrivialSccs r;
  for (Element e : nucleus.elements) {
    if (!e.store()->is_identity(e)) {
      r.index.emplace(e.id(), r.states.size());
      r.states.push_back(e);
    }
  }
  const size_t n = r.states.size();
  r.comp.assign(n, -1);
  if (n == 0) return r;
  ElementStore* store = r.states.front().store();
  const int k = store->alphabet_size();

  std::vector<int> low(n, -1), num(n, -1);
  std::vector<size_t> stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0;
  int comps = 0;
  std::function<void(size_t)> visit = [&](size_t i) {
    num[i] = low[i] = counter++;
    stack.push_back(i);
    on_stack[i] = 1;
    for (int x = 0; x < k; ++x) {
      Element c = store->child(r.states[i], static_cast<Letter>(x));
      auto it = r.index.find(c.id());
      if (it == r.index.end()) continue;
      size_t j = it->second;
      if (num[j] < 0) {
        visit(j);
        low[i] = std::min(low[i], low[j]);
      } else if (on_stack[j]) {
        low[i] = std::min(low[i], num[j]);
      }
    }
    if (low[i] == num[i]) {
      int id = comps++;
      while (true) {
        size_t j = stack.back();
        stack.pop_back();
        on_stack[j] = 0;
        r.comp[j] = id;
        if (j == i) break;
      }
    }
  };
  for (size_t i = 0; i < n; ++i) {
    if (num[i] < 0) visit(i);
  }

  std::vector<int> comp_size(comps, 0);
  for (size_t i = 0; i < n; ++i) comp_size[r.comp[i]]++;
  r.comp_cyclic.assign(comps, 0);
  for (size_t i = 0; i < n; ++i) {
    if (comp_size[r.comp[i]] > 1) {
      r.comp_cyclic[r.comp[i]] = 1;
      continue;
    }
    for (int x = 0; x < k; ++x) {
      if (store->child(r.states[i], static_cast<Letter>(x)) == r.states[i]) {
        r.comp_cyclic[r.comp[i]] = 1;
        break;
      }
    }
  }
  return r;
}

using Boxes = std::vector<std::vector<Letter>>;  // deepest set first

bool boxes_overlap(const Boxes& a, const Boxes& b) {
  for (size_t j = 0; j < a.size(); ++j) {
    bool hit = false;
    for (Letter x : a[j]) {
      if (std::binary_search(b[j].begin(), b[j].end(), x)) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

void boxes_fuse(Boxes& a, const Boxes& b) {
  for (size_t j = 0; j < a.size(); ++j) {
    std::vector<Letter> u;
    std::set_union(a[j].begin(), a[j].end(), b[j].begin(), b[j].end(),
                   std::back_inserter(u));
    a[j] = std::move(u);
  }
}

// Fuses every overlapping pair (positionwise non-empty intersection) until
// no two entries overlap.
void merge_bucket(std::vector<Boxes>& list) {
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t a = 0; a < list.size() && !changed; ++a) {
      for (size_t b = a + 1; b < list.size() && !changed; ++b) {
        if (boxes_overlap(list[a], list[b])) {
          boxes_fuse(list[a], list[b]);
          list.erase(list.begin() + static_cast<ptrdiff_t>(b));
          changed = true;
        }
      }
    }
  }
}

}  // namespace

std::string to_string(const GluingClass& cls) {
  std::string out = to_string(cls.tail) + "*";
  for (const auto& set : cls.sets) {
    out += out.back() == '*' ? " {" : "{";
    for (size_t i = 0; i < set.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(static_cast<int>(set[i]));
    }
    out += '}';
  }
  return out;
}

std::vector<EventuallyPeriodicWord> expand_class(const GluingClass& cls) {
  if (cls.tail.empty()) fail_invalid("gluing class has an empty recurring block");
  for (const auto& set : cls.sets) {
    if (set.empty()) fail_invalid("gluing class has an empty letter set");
  }
  std::vector<EventuallyPeriodicWord> out;
  std::vector<size_t> pick(cls.sets.size(), 0);
  while (true) {
    FiniteWord head;
    for (size_t j = 0; j < cls.sets.size(); ++j) {
      head.letters.push_back(cls.sets[j][pick[j]]);
    }
    out.push_back(normalize(EventuallyPeriodicWord{cls.tail, head}));
    size_t j = cls.sets.size();
    for (; j > 0; --j) {
      if (++pick[j - 1] < cls.sets[j - 1].size()) break;
      pick[j - 1] = 0;
    }
    if (j == 0) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<GluingClass> fuse_classes(std::vector<GluingClass> classes) {
  std::map<FiniteWord, std::map<size_t, std::vector<Boxes>>> buckets;
  for (auto& cls : classes) {
    buckets[cls.tail][cls.sets.size()].push_back(std::move(cls.sets));
  }
  std::vector<GluingClass> out;
  for (auto& [tail, by_depth] : buckets) {
    for (auto& [depth, list] : by_depth) {
      merge_bucket(list);
      for (auto& boxes : list) {
        out.push_back(GluingClass{tail, std::move(boxes)});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GluingClass> gluing_classes(const Nucleus& nucleus) {
  if (!check_pcf(nucleus)) {
    fail_invalid(
        "gluing extraction requires the post-critically-finite test to pass");
  }
  if (!check_condition2(nucleus)) {
    fail_invalid(
        "gluing extraction requires the append-stability test to pass");
  }

  NontrivialSccs sccs = nontrivial_sccs(nucleus);
  if (sccs.states.empty()) return {};
  ElementStore* store = sccs.states.front().store();
  const int k = store->alphabet_size();

  // The unique letter keeping each cyclic state inside its own component.
  std::vector<int> cycle_letter(sccs.states.size(), -1);
  for (size_t i = 0; i < sccs.states.size(); ++i) {
    if (!sccs.comp_cyclic[sccs.comp[i]]) continue;
    for (int x = 0; x < k; ++x) {
      Element c = store->child(sccs.states[i], static_cast<Letter>(x));
      auto it = sccs.index.find(c.id());
      if (it == sccs.index.end() || sccs.comp[it->second] != sccs.comp[i]) {
        continue;
      }
      if (cycle_letter[i] >= 0) {
        fail_internal("recurring component is not a simple cycle");
      }
      cycle_letter[i] = x;
    }
    if (cycle_letter[i] < 0) {
      fail_internal("recurring component has no cycle edge");
    }
    Letter x = static_cast<Letter>(cycle_letter[i]);
    if (apply(sccs.states[i], x) != x) {
      fail_internal("recurring cycle relabels its letters; no shared tail");
    }
  }

  // The recurring block anchored at cycle state i, read along the cycle and
  // reduced to its primitive root.
  auto anchored_tail = [&](size_t i) {
    FiniteWord block;
    size_t cur = i;
    do {
      Letter x = static_cast<Letter>(cycle_letter[cur]);
      block.letters.push_back(x);
      Element c = store->child(sccs.states[cur], x);
      cur = sccs.index.at(c.id());
    } while (cur != i);
    return normalize(EventuallyPeriodicWord{block, {}}).tail;
  };

  std::map<FiniteWord, std::map<size_t, std::vector<Boxes>>> buckets;
  size_t equations = 0;

  for (size_t i = 0; i < sccs.states.size(); ++i) {
    if (!sccs.comp_cyclic[sccs.comp[i]]) continue;
    FiniteWord tail = anchored_tail(i);

    // Every departure path from the cycle down to the first trivial state
    // identifies its input word with its output word.
    std::vector<std::pair<Letter, Letter>> steps;
    std::function<void(Element)> descend = [&](Element t) {
      if (steps.size() > nucleus.elements.size() + 1) {
        fail_internal("departure path exceeds the nucleus size");
      }
      std::vector<Letter> perm = store->perm(t);
      for (int x = 0; x < k; ++x) {
        if (steps.empty() && x == cycle_letter[i]) continue;
        Element c = store->child(t, static_cast<Letter>(x));
        steps.push_back({static_cast<Letter>(x), perm[static_cast<size_t>(x)]});
        if (store->is_identity(c)) {
          bool moved = false;
          for (const auto& [p, q] : steps) moved = moved || p != q;
          if (moved) {
            if (++equations > kEquationGuard) {
              fail_bound("gluing equation enumeration exceeded " +
                         std::to_string(kEquationGuard) + " paths");
            }
            Boxes boxes;
            for (const auto& [p, q] : steps) {
              std::vector<Letter> set{p, q};
              std::sort(set.begin(), set.end());
              set.erase(std::unique(set.begin(), set.end()), set.end());
              boxes.push_back(std::move(set));
            }
            buckets[tail][boxes.size()].push_back(std::move(boxes));
          }
        } else {
          descend(c);
        }
        steps.pop_back();
      }
    };
    descend(sccs.states[i]);
  }

  // Fuse overlapping identifications, then close the list under shifting:
  // dropping the rightmost set of a class yields an identification one level
  // up that must be listed too (when it still identifies anything).
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto& [tail, by_depth] : buckets) {
      for (auto& [depth, list] : by_depth) merge_bucket(list);
    }
    std::vector<std::pair<FiniteWord, Boxes>> shifted;
    for (const auto& [tail, by_depth] : buckets) {
      for (const auto& [depth, list] : by_depth) {
        for (const auto& boxes : list) {
          if (boxes.size() < 2) continue;
          Boxes up(boxes.begin(), boxes.end() - 1);
          bool identifies = false;
          for (const auto& set : up) identifies = identifies || set.size() > 1;
          if (identifies) shifted.emplace_back(tail, std::move(up));
        }
      }
    }
    for (auto& [tail, up] : shifted) {
      auto& list = buckets[tail][up.size()];
      bool subsumed = false;
      for (const auto& have : list) {
        bool inside = true;
        for (size_t j = 0; j < up.size() && inside; ++j) {
          inside = std::includes(have[j].begin(), have[j].end(),
                                 up[j].begin(), up[j].end());
        }
        if (inside) {
          subsumed = true;
          break;
        }
      }
      if (!subsumed) {
        list.push_back(std::move(up));
        grew = true;
      }
    }
  }

  // Classes whose rightmost set is a singleton are shifted-and-appended
  // copies of shallower classes; only the reduced ones are listed.
  std::vector<GluingClass> out;
  for (const auto& [tail, by_depth] : buckets) {
    for (const auto& [depth, list] : by_depth) {
      for (const auto& boxes : list) {
        if (boxes.back().size() < 2) continue;
        out.push_back(GluingClass{tail, boxes});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CriticalSets critical_sets(const std::vector<GluingClass>& classes) {
  std::set<EventuallyPeriodicWord> crit;
  for (const auto& cls : classes) {
    for (const auto& w : expand_class(cls)) crit.insert(w);
  }
  std::set<EventuallyPeriodicWord> post;
  std::vector<EventuallyPeriodicWord> frontier(crit.begin(), crit.end());
  while (!frontier.empty()) {
    std::vector<EventuallyPeriodicWord> next;
    for (const auto& w : frontier) {
      EventuallyPeriodicWord s = shift(w);
      if (post.insert(s).second) next.push_back(s);
    }
    frontier = std::move(next);
  }
  CriticalSets r;
  r.critical.assign(crit.begin(), crit.end());
  r.postcritical.assign(post.begin(), post.end());
  return r;
}

ShiftedClass shift_class(const GluingClass& cls) {
  if (cls.sets.empty()) {
    fail_invalid("cannot shift a gluing class with no letter sets");
  }
  ShiftedClass r;
  std::vector<std::vector<Letter>> rest(cls.sets.begin(), cls.sets.end() - 1);
  bool all_single = true;
  for (const auto& set : rest) all_single = all_single && set.size() == 1;
  if (all_single) {
    r.is_word = true;
    FiniteWord head;
    for (const auto& set : rest) head.letters.push_back(set.front());
    r.word = normalize(EventuallyPeriodicWord{cls.tail, head});
  } else {
    r.cls = GluingClass{cls.tail, std::move(rest)};
  }
  return r;
}

TileGraph tile_graph(const Nucleus& nucleus, int level, size_t budget) {
  if (level < 0) fail_invalid("tile level must be nonnegative");
  if (nucleus.elements.empty()) fail_internal("nucleus has no states");
  ElementStore* store = nucleus.elements.front().store();
  const size_t k = static_cast<size_t>(store->alphabet_size());

  size_t count = 1;
  for (int i = 0; i < level; ++i) {
    if (count > budget / k) {
      fail_bound("tile graph at level " + std::to_string(level) +
                 " exceeds the budget of " + std::to_string(budget) +
                 " vertices");
    }
    count *= k;
  }
  if (count > budget) {
    fail_bound("tile graph at level " + std::to_string(level) +
               " exceeds the budget of " + std::to_string(budget) +
               " vertices");
  }

  TileGraph g;
  g.level = level;
  g.vertices.reserve(count);
  FiniteWord w;
  w.letters.assign(static_cast<size_t>(level), 0);
  for (size_t idx = 0; idx < count; ++idx) {
    g.vertices.push_back(w);
    for (size_t j = w.letters.size(); j-- > 0;) {
      if (static_cast<size_t>(++w.letters[j]) < k) break;
      w.letters[j] = 0;
    }
  }
  auto index_of = [&](const FiniteWord& v) {
    size_t idx = 0;
    for (Letter x : v.letters) idx = idx * k + x;
    return idx;
  };
  std::set<std::pair<uint32_t, uint32_t>> edges;
  for (size_t i = 0; i < count; ++i) {
    for (Element n : nucleus.elements) {
      if (store->is_identity(n)) continue;
      FiniteWord img = act(n, g.vertices[i]);
      if (img == g.vertices[i]) continue;
      size_t j = index_of(img);
      edges.emplace(static_cast<uint32_t>(std::min(i, j)),
                    static_cast<uint32_t>(std::max(i, j)));
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

std::string tiles_to_dot(const TileGraph& graph) {
  std::string out = "graph tiles {\n  node [shape=box];\n";
  for (const auto& v : graph.vertices) {
    out += "  \"" + to_string(v) + "\";\n";
  }
  for (const auto& [i, j] : graph.edges) {
    out += "  \"" + to_string(graph.vertices[i]) + "\" -- \"" +
           to_string(graph.vertices[j]) + "\";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ssg
