#include "ssg/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "ssg/errors.hpp"

namespace ssg {

namespace {

constexpr size_t kSubsetGuard = 200000;

/** Ids of states (within `states`) lying on a directed cycle. */
std::set<uint32_t> on_cycle_ids(ElementStore* store, const std::vector<Element>& states) {
  const int k = store->alphabet_size();
  std::map<uint32_t, int> index;
  for (size_t i = 0; i < states.size(); ++i) index[states[i].id()] = static_cast<int>(i);

  const int n = static_cast<int>(states.size());
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0;
  std::set<uint32_t> result;

  std::function<void(int)> strongconnect = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int x = 0; x < k; ++x) {
      auto it = index.find(store->child(states[v], static_cast<Letter>(x)).id());
      if (it == index.end()) continue;  // leaving the state set
      int w = it->second;
      if (idx[w] == -1) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<int> scc;
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
        if (w == v) break;
      }
      bool cyclic = scc.size() > 1;
      if (!cyclic) {
        for (int x = 0; x < k && !cyclic; ++x)
          cyclic = store->child(states[scc[0]], static_cast<Letter>(x)) == states[scc[0]];
      }
      if (cyclic)
        for (int w : scc) result.insert(states[w].id());
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] == -1) strongconnect(v);
  return result;
}

}  // namespace

std::vector<Element> backward_core(const Nucleus& nucleus) {
  if (nucleus.elements.empty()) return {};
  ElementStore* store = nucleus.elements.front().store();
  const int k = store->alphabet_size();

  std::set<uint32_t> cyclic = on_cycle_ids(store, nucleus.elements);
  std::map<uint32_t, Element> by_id;
  for (const Element& e : nucleus.elements) by_id.emplace(e.id(), e);

  std::vector<Element> queue;
  std::set<uint32_t> seen;
  for (const Element& e : nucleus.elements)
    if (cyclic.count(e.id()) && seen.insert(e.id()).second) queue.push_back(e);
  for (size_t head = 0; head < queue.size(); ++head) {
    for (int x = 0; x < k; ++x) {
      Element c = store->child(queue[head], static_cast<Letter>(x));
      if (seen.insert(c.id()).second) queue.push_back(c);
    }
  }
  sort_elements(queue);
  return queue;
}

// ---------------------------------------------------------------------------
// Append-stable gluing (condition 2)

namespace {

using Subset = std::vector<uint32_t>;  // sorted element ids

/**
 * Greatest fixpoint of: S is good iff for every letter x the subset
 * { g|_x : g in S, g(x) = x } is nonempty and good. Evaluated by building
 * the reachable subset graph and propagating failure.
 */
bool fixes_every_extension(ElementStore* store, const Subset& start,
                           std::map<uint32_t, Element>& by_id) {
  const int k = store->alphabet_size();
  std::map<Subset, int> index;
  std::vector<Subset> nodes;
  std::vector<std::vector<int>> succ;  // per node, per-letter successor (-1 = empty subset)

  std::function<int(const Subset&)> visit = [&](const Subset& s) -> int {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(nodes.size());
    if (nodes.size() > kSubsetGuard) fail_bound("subset exploration exceeded internal guard");
    index.emplace(s, id);
    nodes.push_back(s);
    succ.emplace_back(k, -1);
    for (int x = 0; x < k; ++x) {
      std::set<uint32_t> next;
      for (uint32_t gid : s) {
        Element g = by_id.at(gid);
        if (apply(g, static_cast<Letter>(x)) == static_cast<Letter>(x))
          next.insert(store->child(g, static_cast<Letter>(x)).id());
      }
      if (next.empty()) continue;
      Subset t(next.begin(), next.end());
      int tid = visit(t);
      succ[id][x] = tid;
    }
    return id;
  };
  visit(start);

  // Propagate failure: a node fails if any letter has no successor or a
  // failing successor; survivors form the greatest fixpoint.
  std::vector<bool> failed(nodes.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (failed[i]) continue;
      for (int x = 0; x < k; ++x) {
        int t = succ[i][x];
        if (t == -1 || failed[t]) {
          failed[i] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return !failed[index.at(start)];
}

}  // namespace

bool check_condition2(const Nucleus& nucleus) {
  ElementStore* store = nucleus.elements.front().store();
  const int k = store->alphabet_size();

  std::vector<Element> core = backward_core(nucleus);
  std::map<uint32_t, Element> by_id;
  for (const Element& e : core) by_id.emplace(e.id(), e);

  Subset full;
  for (const Element& e : core) full.push_back(e.id());
  std::sort(full.begin(), full.end());

  // Subset graph: step the whole core along every label (input, output).
  std::map<Subset, int> index;
  std::vector<Subset> nodes;
  std::vector<std::vector<int>> out_edges;
  std::vector<Subset> worklist{full};
  index.emplace(full, 0);
  nodes.push_back(full);
  out_edges.emplace_back();
  for (size_t head = 0; head < nodes.size(); ++head) {
    Subset s = nodes[head];
    for (int x = 0; x < k; ++x) {
      for (int y = 0; y < k; ++y) {
        std::set<uint32_t> next;
        for (uint32_t gid : s) {
          Element g = by_id.at(gid);
          if (apply(g, static_cast<Letter>(x)) == static_cast<Letter>(y))
            next.insert(store->child(g, static_cast<Letter>(x)).id());
        }
        if (next.empty()) continue;
        Subset t(next.begin(), next.end());
        auto it = index.find(t);
        int tid;
        if (it == index.end()) {
          tid = static_cast<int>(nodes.size());
          if (nodes.size() > kSubsetGuard)
            fail_bound("subset exploration exceeded internal guard");
          index.emplace(t, tid);
          nodes.push_back(t);
          out_edges.emplace_back();
        } else {
          tid = it->second;
        }
        out_edges[head].push_back(tid);
      }
    }
  }

  // Cyclic subset nodes (Tarjan), then everything reachable from them: these
  // are exactly the end-state sets of left-infinite label paths.
  const int n = static_cast<int>(nodes.size());
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<bool> cyclic(n, false);
  int counter = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : out_edges[v]) {
      if (idx[w] == -1) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<int> scc;
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
        if (w == v) break;
      }
      bool is_cyclic = scc.size() > 1;
      if (!is_cyclic)
        is_cyclic = std::find(out_edges[scc[0]].begin(), out_edges[scc[0]].end(),
                              scc[0]) != out_edges[scc[0]].end();
      if (is_cyclic)
        for (int w : scc) cyclic[w] = true;
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] == -1) strongconnect(v);

  std::vector<bool> is_end(n, false);
  std::vector<int> bfs;
  for (int v = 0; v < n; ++v)
    if (cyclic[v]) {
      is_end[v] = true;
      bfs.push_back(v);
    }
  for (size_t head = 0; head < bfs.size(); ++head) {
    for (int w : out_edges[bfs[head]])
      if (!is_end[w]) {
        is_end[w] = true;
        bfs.push_back(w);
      }
  }

  uint32_t identity_id = store->identity().id();
  for (int v = 0; v < n; ++v) {
    if (!is_end[v]) continue;
    bool nontrivial = false;
    for (uint32_t gid : nodes[v])
      if (gid != identity_id) nontrivial = true;
    if (!nontrivial) continue;
    if (!fixes_every_extension(store, nodes[v], by_id)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Post-critical finiteness

namespace {

/**
 * In the non-trivial part of the restriction graph of `states`, every cyclic
 * strongly connected component must be a simple cycle and no directed path
 * may connect two distinct cyclic components.
 */
bool cycles_simple_and_separated(ElementStore* store, const std::vector<Element>& states) {
  const int k = store->alphabet_size();
  std::vector<Element> nontrivial;
  for (const Element& e : states)
    if (!store->is_identity(e)) nontrivial.push_back(e);
  if (nontrivial.empty()) return true;

  std::map<uint32_t, int> index;
  for (size_t i = 0; i < nontrivial.size(); ++i)
    index[nontrivial[i].id()] = static_cast<int>(i);

  const int n = static_cast<int>(nontrivial.size());
  // Letter edges within the non-trivial subdiagram.
  std::vector<std::vector<int>> out(n);
  for (int v = 0; v < n; ++v) {
    for (int x = 0; x < k; ++x) {
      auto it = index.find(store->child(nontrivial[v], static_cast<Letter>(x)).id());
      if (it != index.end()) out[v].push_back(it->second);
    }
  }

  // Strongly connected components.
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int counter = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : out[v]) {
      if (idx[w] == -1) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<int> scc;
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        scc.push_back(w);
        if (w == v) break;
      }
      int c = static_cast<int>(sccs.size());
      for (int w : scc) comp[w] = c;
      sccs.push_back(std::move(scc));
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] == -1) strongconnect(v);

  std::vector<bool> comp_cyclic(sccs.size(), false);
  for (size_t c = 0; c < sccs.size(); ++c) {
    const std::vector<int>& members = sccs[c];
    bool cyclic = members.size() > 1;
    if (!cyclic) {
      for (int w : out[members[0]])
        if (w == members[0]) cyclic = true;
    }
    comp_cyclic[c] = cyclic;
    if (!cyclic) continue;
    // Simple cycle: exactly one internal out-edge and one internal in-edge
    // per member, counting parallel letter edges separately.
    std::vector<int> in_deg(members.size(), 0);
    std::map<int, int> member_pos;
    for (size_t i = 0; i < members.size(); ++i) member_pos[members[i]] = static_cast<int>(i);
    for (int v : members) {
      int internal_out = 0;
      for (int w : out[v]) {
        if (comp[w] == static_cast<int>(c)) {
          ++internal_out;
          ++in_deg[member_pos[w]];
        }
      }
      if (internal_out != 1) return false;
    }
    for (int d : in_deg)
      if (d != 1) return false;
  }

  // No directed path between distinct cyclic components: from each cyclic
  // component, forward reachability must meet no other cyclic component.
  for (size_t c = 0; c < sccs.size(); ++c) {
    if (!comp_cyclic[c]) continue;
    std::vector<bool> seen(n, false);
    std::vector<int> bfs;
    for (int v : sccs[c]) {
      seen[v] = true;
      bfs.push_back(v);
    }
    for (size_t head = 0; head < bfs.size(); ++head) {
      for (int w : out[bfs[head]]) {
        if (comp[w] != static_cast<int>(c) && comp_cyclic[comp[w]]) return false;
        if (!seen[w]) {
          seen[w] = true;
          bfs.push_back(w);
        }
      }
    }
  }
  return true;
}

}  // namespace

bool check_pcf(const Nucleus& nucleus) {
  ElementStore* store = nucleus.elements.front().store();
  return cycles_simple_and_separated(store, nucleus.elements);
}

bool is_bounded_element(Element g) {
  return cycles_simple_and_separated(g.store(), state_closure(g));
}

bool check_strictly_pcf(const Group& group, const Nucleus& nucleus) {
  ElementStore* store = group.store.get();
  const int k = store->alphabet_size();

  for (const Element& g : group.generators)
    if (!is_bounded_element(g)) return false;

  // One-letter predicate (greatest fixpoint over all involved states):
  // displaced letters restrict to the identity, fixed letters to states with
  // the same property.
  std::set<uint32_t> universe;
  std::vector<Element> queue;
  for (const Element& e : nucleus.elements)
    if (universe.insert(e.id()).second) queue.push_back(e);
  for (size_t head = 0; head < queue.size(); ++head) {
    for (int x = 0; x < k; ++x) {
      Element c = store->child(queue[head], static_cast<Letter>(x));
      if (universe.insert(c.id()).second) queue.push_back(c);
    }
  }

  std::map<uint32_t, bool> good;
  for (const Element& e : queue) good[e.id()] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Element& e : queue) {
      if (!good[e.id()]) continue;
      for (int x = 0; x < k; ++x) {
        Element c = store->child(e, static_cast<Letter>(x));
        bool moved = apply(e, static_cast<Letter>(x)) != static_cast<Letter>(x);
        bool ok = moved ? store->is_identity(c) : good[c.id()];
        if (!ok) {
          good[e.id()] = false;
          changed = true;
          break;
        }
      }
    }
  }

  for (const Element& e : nucleus.elements)
    if (!good[e.id()]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Boundary word identification

namespace {

struct PhaseGraph {
  // Node (element index, phase) flattened as index * period + phase.
  size_t period = 0;
  std::vector<int32_t> succ;  // -1 when undefined
  std::vector<Letter> output;  // output letter at the node (valid when succ usable)
};

size_t lcm(size_t a, size_t b) { return a / std::gcd(a, b) * b; }

}  // namespace

bool are_equivalent(const Nucleus& nucleus, const EventuallyPeriodicWord& u_in,
                    const EventuallyPeriodicWord& v_in) {
  ElementStore* store = nucleus.elements.front().store();
  EventuallyPeriodicWord u = normalize(u_in), v = normalize(v_in);
  for (Letter x : u.tail.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");
  for (Letter x : u.head.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");
  for (Letter x : v.tail.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");
  for (Letter x : v.head.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");
  if (u == v) return true;

  const size_t P = lcm(u.tail.size(), v.tail.size());
  const size_t H = std::max(u.head.size(), v.head.size());
  const size_t N = nucleus.elements.size();
  if (N * P > 2000000) fail_bound("phase graph exceeds internal guard");

  std::map<uint32_t, size_t> elem_index;
  for (size_t i = 0; i < N; ++i) elem_index[nucleus.elements[i].id()] = i;

  // Deep-region transition: node (g, c) consumes input letter_u(H+1+c) and
  // must output letter_v(H+1+c); the successor has phase (c-1) mod P.
  std::vector<int64_t> succ(N * P, -1);
  for (size_t i = 0; i < N; ++i) {
    Element g = nucleus.elements[i];
    for (size_t c = 0; c < P; ++c) {
      Letter a = letter_at(u, H + 1 + c);
      Letter b = letter_at(v, H + 1 + c);
      if (apply(g, a) != b) continue;
      size_t next_elem = elem_index.at(store->child(g, a).id());
      size_t next_phase = (c + P - 1) % P;
      succ[i * P + c] = static_cast<int64_t>(next_elem * P + next_phase);
    }
  }

  // A node admits a backward-infinite path iff it lies on a cycle of this
  // partial functional graph.
  std::vector<int8_t> color(N * P, 0);  // 0 unvisited, 1 in progress, 2 done, 3 on cycle
  for (size_t start = 0; start < N * P; ++start) {
    if (color[start] != 0) continue;
    std::vector<size_t> path;
    size_t cur = start;
    for (;;) {
      if (color[cur] == 1) {
        // Found a new cycle: mark the suffix of the path from cur.
        bool in_cycle = false;
        for (size_t node : path) {
          if (node == cur) in_cycle = true;
          if (in_cycle) color[node] = 3;
        }
        break;
      }
      if (color[cur] != 0) break;  // reaches processed territory
      color[cur] = 1;
      path.push_back(cur);
      int64_t next = succ[cur];
      if (next == -1) break;
      cur = static_cast<size_t>(next);
    }
    for (size_t node : path)
      if (color[node] == 1) color[node] = 2;
  }

  for (size_t i = 0; i < N; ++i) {
    if (color[i * P + 0] != 3) continue;
    // Head walk: positions H down to 1 with the explicit letters.
    Element g = nucleus.elements[i];
    Letter a0 = letter_at(u, H + 1);
    Element state = store->child(g, a0);
    bool ok = true;
    for (size_t j = H; j >= 1 && ok; --j) {
      Letter x = letter_at(u, j);
      Letter y = letter_at(v, j);
      if (apply(state, x) != y) {
        ok = false;
        break;
      }
      state = store->child(state, x);
      if (j == 1) break;
    }
    if (ok) return true;
  }
  return false;
}

std::vector<EventuallyPeriodicWord> equivalence_class(const Nucleus& nucleus,
                                                      const EventuallyPeriodicWord& w_in) {
  ElementStore* store = nucleus.elements.front().store();
  EventuallyPeriodicWord w = normalize(w_in);
  for (Letter x : w.tail.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");
  for (Letter x : w.head.letters)
    if (x >= store->alphabet_size()) fail_invalid("word letter out of range");

  const size_t P = w.tail.size();
  const size_t H = w.head.size();
  const size_t N = nucleus.elements.size();

  std::map<uint32_t, size_t> elem_index;
  for (size_t i = 0; i < N; ++i) elem_index[nucleus.elements[i].id()] = i;

  // Input-driven total functional graph on (element, phase).
  std::vector<size_t> succ(N * P);
  for (size_t i = 0; i < N; ++i) {
    Element g = nucleus.elements[i];
    for (size_t c = 0; c < P; ++c) {
      Letter a = letter_at(w, H + 1 + c);
      size_t next_elem = elem_index.at(store->child(g, a).id());
      succ[i * P + c] = next_elem * P + (c + P - 1) % P;
    }
  }

  // Nodes on cycles.
  std::vector<int8_t> color(N * P, 0);
  for (size_t start = 0; start < N * P; ++start) {
    if (color[start] != 0) continue;
    std::vector<size_t> path;
    size_t cur = start;
    for (;;) {
      if (color[cur] == 1) {
        bool in_cycle = false;
        for (size_t node : path) {
          if (node == cur) in_cycle = true;
          if (in_cycle) color[node] = 3;
        }
        break;
      }
      if (color[cur] != 0) break;
      color[cur] = 1;
      path.push_back(cur);
      cur = succ[cur];
    }
    for (size_t node : path)
      if (color[node] == 1) color[node] = 2;
  }

  auto node_output = [&](size_t node) -> Letter {
    size_t i = node / P, c = node % P;
    Letter a = letter_at(w, H + 1 + c);
    return apply(nucleus.elements[i], a);
  };

  std::set<EventuallyPeriodicWord> members;
  for (size_t i = 0; i < N; ++i) {
    size_t start = i * P + 0;
    if (color[start] != 3) continue;

    // Image tail block: outputs along the forward cycle walk starting after
    // the start node, ending with the start node's own output.
    EventuallyPeriodicWord image;
    size_t cur = succ[start];
    for (;;) {
      image.tail.letters.push_back(node_output(cur));
      if (cur == start) break;
      cur = succ[cur];
    }
    // Image head: outputs across the explicit head letters.
    Element g = nucleus.elements[i];
    Element state = store->child(g, letter_at(w, H + 1));
    for (size_t j = H; j >= 1; --j) {
      Letter x = letter_at(w, j);
      image.head.letters.push_back(apply(state, x));
      state = store->child(state, x);
      if (j == 1) break;
    }
    members.insert(normalize(image));
  }
  return std::vector<EventuallyPeriodicWord>(members.begin(), members.end());
}

}  // namespace ssg
