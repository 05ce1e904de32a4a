#include "ssg/automata.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssg/errors.hpp"

namespace ssg {

// ---------------------------------------------------------------------------
// ElementStore

ElementStore::ElementStore(int alphabet_size) : k_(alphabet_size) {
  if (alphabet_size < 1 || alphabet_size > 200)
    fail_invalid("alphabet size must be between 1 and 200, got " +
                 std::to_string(alphabet_size));
  // State 0 is the identity: trivial permutation, every child is itself.
  State identity;
  identity.perm.resize(k_);
  for (int x = 0; x < k_; ++x) identity.perm[x] = static_cast<Letter>(x);
  identity.children.assign(k_, 0);
  states_.push_back(identity);
  flat_sigs_[flat_signature(identity.perm, identity.children)] = 0;
  // The identity is cyclic (self-loops), so register its rooted signature too.
  std::string sig = "n1;p";
  for (int x = 0; x < k_; ++x) sig += std::to_string(x) + ",";
  sig += ";";
  for (int x = 0; x < k_; ++x) sig += "l0,";
  sig += ";";
  cyclic_sigs_[sig] = {0};
}

std::string ElementStore::flat_signature(const std::vector<Letter>& perm,
                                         const std::vector<uint32_t>& children) const {
  std::string s = "p";
  for (Letter p : perm) s += std::to_string(static_cast<int>(p)) + ",";
  s += ";c";
  for (uint32_t c : children) s += std::to_string(c) + ",";
  return s;
}

std::vector<Letter> ElementStore::perm(Element e) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return states_[e.id_].perm;
}

Element ElementStore::child(Element e, Letter x) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return Element(const_cast<ElementStore*>(this), states_[e.id_].children[x]);
}

size_t ElementStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return states_.size();
}

std::vector<Element> ElementStore::intern(const std::vector<LocalNode>& nodes) {
  if (nodes.empty()) return {};
  std::lock_guard<std::mutex> lock(mutex_);

  const size_t L = nodes.size();
  for (const LocalNode& node : nodes) {
    if (node.perm.size() != static_cast<size_t>(k_) ||
        node.children.size() != static_cast<size_t>(k_))
      fail_invalid("local node arity does not match the alphabet");
    std::vector<bool> seen(k_, false);
    for (Letter p : node.perm) {
      if (p >= k_ || seen[p]) fail_invalid("local node permutation is not a bijection");
      seen[p] = true;
    }
    for (const ChildRef& ref : node.children) {
      if (ref.is_interned ? ref.index >= states_.size() : ref.index >= L)
        fail_invalid("local node child reference out of range");
    }
  }

  // Transitively closed set R of referenced interned states.
  std::vector<uint32_t> referenced;
  {
    std::set<uint32_t> seen;
    std::vector<uint32_t> stack;
    for (const LocalNode& node : nodes)
      for (const ChildRef& ref : node.children)
        if (ref.is_interned && seen.insert(ref.index).second) stack.push_back(ref.index);
    while (!stack.empty()) {
      uint32_t id = stack.back();
      stack.pop_back();
      for (uint32_t c : states_[id].children)
        if (seen.insert(c).second) stack.push_back(c);
    }
    referenced.assign(seen.begin(), seen.end());
  }
  std::unordered_map<uint32_t, size_t> rank;
  for (size_t i = 0; i < referenced.size(); ++i) rank[referenced[i]] = i;

  // Universe: local nodes, then referenced interned states.
  const size_t n = L + referenced.size();
  auto node_perm = [&](size_t u) -> const std::vector<Letter>& {
    return u < L ? nodes[u].perm : states_[referenced[u - L]].perm;
  };
  auto node_child = [&](size_t u, int x) -> size_t {
    if (u < L) {
      const ChildRef& ref = nodes[u].children[x];
      return ref.is_interned ? L + rank[ref.index] : ref.index;
    }
    return L + rank[states_[referenced[u - L]].children[x]];
  };

  // Coarsest partition refinement (bisimilarity on the combined graph).
  std::vector<int> block(n);
  size_t block_count;
  {
    std::map<std::string, int> by_perm;
    for (size_t u = 0; u < n; ++u) {
      std::string key;
      for (Letter p : node_perm(u)) key += std::to_string(static_cast<int>(p)) + ",";
      auto [it, inserted] = by_perm.emplace(key, static_cast<int>(by_perm.size()));
      block[u] = it->second;
    }
    block_count = by_perm.size();
  }
  for (;;) {
    std::map<std::string, int> sigs;
    std::vector<int> next(n);
    for (size_t u = 0; u < n; ++u) {
      std::string sig = std::to_string(block[u]) + ":";
      for (int x = 0; x < k_; ++x) sig += std::to_string(block[node_child(u, x)]) + ",";
      auto [it, inserted] = sigs.emplace(sig, static_cast<int>(sigs.size()));
      next[u] = it->second;
    }
    if (sigs.size() == block_count) break;
    block = next;
    block_count = sigs.size();
  }

  // Blocks containing an interned member resolve to that state.
  std::vector<int64_t> resolved(block_count, -1);
  for (size_t u = L; u < n; ++u) {
    uint32_t id = referenced[u - L];
    int64_t& slot = resolved[block[u]];
    if (slot != -1 && slot != id)
      fail_internal("two distinct interned states refined into one block");
    slot = id;
  }

  // Representative local node per still-unresolved block, plus the block graph.
  std::vector<int64_t> rep(block_count, -1);
  for (size_t u = 0; u < L; ++u)
    if (resolved[block[u]] == -1 && rep[block[u]] == -1) rep[block[u]] = static_cast<int64_t>(u);

  std::vector<int> pending;  // block ids needing allocation or reuse
  for (size_t b = 0; b < block_count; ++b)
    if (resolved[b] == -1) {
      if (rep[b] == -1) fail_internal("unresolved block without a local representative");
      pending.push_back(static_cast<int>(b));
    }

  auto block_child = [&](int b, int x) -> int {
    return block[node_child(static_cast<size_t>(rep[b]), x)];
  };

  // Tarjan over pending blocks; SCCs are emitted children-first.
  std::vector<std::vector<int>> sccs;
  {
    std::unordered_map<int, int> idx, low;
    std::vector<int> stack;
    std::vector<bool> on_stack_flag(block_count, false);
    int counter = 0;
    std::function<void(int)> strongconnect = [&](int b) {
      idx[b] = low[b] = counter++;
      stack.push_back(b);
      on_stack_flag[b] = true;
      for (int x = 0; x < k_; ++x) {
        int c = block_child(b, x);
        if (resolved[c] != -1) continue;
        if (!idx.count(c)) {
          strongconnect(c);
          low[b] = std::min(low[b], low[c]);
        } else if (on_stack_flag[c]) {
          low[b] = std::min(low[b], idx[c]);
        }
      }
      if (low[b] == idx[b]) {
        std::vector<int> scc;
        for (;;) {
          int c = stack.back();
          stack.pop_back();
          on_stack_flag[c] = false;
          scc.push_back(c);
          if (c == b) break;
        }
        sccs.push_back(std::move(scc));
      }
    };
    for (int b : pending)
      if (!idx.count(b)) strongconnect(b);
  }

  for (const std::vector<int>& scc : sccs) {
    bool cyclic = scc.size() > 1;
    if (!cyclic) {
      for (int x = 0; x < k_ && !cyclic; ++x) cyclic = block_child(scc[0], x) == scc[0];
    }

    if (!cyclic) {
      int b = scc[0];
      std::vector<uint32_t> children(k_);
      for (int x = 0; x < k_; ++x) {
        int64_t id = resolved[block_child(b, x)];
        if (id == -1) fail_internal("acyclic block has unresolved child");
        children[x] = static_cast<uint32_t>(id);
      }
      const std::vector<Letter>& perm = node_perm(static_cast<size_t>(rep[b]));
      std::string sig = flat_signature(perm, children);
      auto it = flat_sigs_.find(sig);
      if (it != flat_sigs_.end()) {
        resolved[b] = it->second;
      } else {
        uint32_t id = static_cast<uint32_t>(states_.size());
        states_.push_back(State{perm, children});
        flat_sigs_.emplace(std::move(sig), id);
        resolved[b] = id;
      }
      continue;
    }

    // Cyclic strongly connected component of new blocks.
    std::set<int> in_scc(scc.begin(), scc.end());
    auto rooted_signature = [&](int root, std::vector<int>* order_out) {
      std::vector<int> order;
      std::unordered_map<int, int> number;
      order.push_back(root);
      number[root] = 0;
      for (size_t head = 0; head < order.size(); ++head) {
        int b = order[head];
        for (int x = 0; x < k_; ++x) {
          int c = block_child(b, x);
          if (resolved[c] == -1 && in_scc.count(c) && !number.count(c)) {
            number[c] = static_cast<int>(order.size());
            order.push_back(c);
          }
        }
      }
      std::string sig = "n" + std::to_string(order.size()) + ";";
      for (int b : order) {
        sig += "p";
        for (Letter p : node_perm(static_cast<size_t>(rep[b])))
          sig += std::to_string(static_cast<int>(p)) + ",";
        sig += ";";
        for (int x = 0; x < k_; ++x) {
          int c = block_child(b, x);
          if (resolved[c] != -1)
            sig += "i" + std::to_string(resolved[c]) + ",";
          else
            sig += "l" + std::to_string(number[c]) + ",";
        }
        sig += ";";
      }
      if (order_out) *order_out = order;
      return sig;
    };

    std::vector<int> order;
    std::string sig = rooted_signature(scc[0], &order);
    if (order.size() != scc.size())
      fail_internal("component traversal missed a member");

    auto it = cyclic_sigs_.find(sig);
    if (it != cyclic_sigs_.end()) {
      const std::vector<uint32_t>& ids = it->second;
      if (ids.size() != order.size()) fail_internal("stored component has wrong size");
      for (size_t j = 0; j < order.size(); ++j) resolved[order[j]] = ids[j];
      continue;
    }

    // Signatures of every member as an entry point, computed before the
    // allocation fills `resolved` (afterwards internal references would
    // serialize as interned ids and never match a future lookup).
    std::vector<std::pair<std::string, std::vector<int>>> member_sigs;
    member_sigs.reserve(scc.size());
    for (int member : scc) {
      std::vector<int> member_order;
      std::string member_sig = rooted_signature(member, &member_order);
      member_sigs.emplace_back(std::move(member_sig), std::move(member_order));
    }

    // Allocate the whole component.
    std::vector<uint32_t> fresh(order.size());
    for (size_t j = 0; j < order.size(); ++j) {
      fresh[j] = static_cast<uint32_t>(states_.size());
      resolved[order[j]] = fresh[j];
      states_.push_back(State{node_perm(static_cast<size_t>(rep[order[j]])), {}});
    }
    for (size_t j = 0; j < order.size(); ++j) {
      std::vector<uint32_t> children(k_);
      for (int x = 0; x < k_; ++x) {
        int64_t id = resolved[block_child(order[j], x)];
        if (id == -1) fail_internal("component child remained unresolved");
        children[x] = static_cast<uint32_t>(id);
      }
      states_[fresh[j]].children = children;
      flat_sigs_.emplace(flat_signature(states_[fresh[j]].perm, children), fresh[j]);
    }
    // Register every member as a possible future entry point.
    for (auto& [member_sig, member_order] : member_sigs) {
      std::vector<uint32_t> ids(member_order.size());
      for (size_t j = 0; j < member_order.size(); ++j)
        ids[j] = static_cast<uint32_t>(resolved[member_order[j]]);
      cyclic_sigs_.emplace(std::move(member_sig), std::move(ids));
    }
  }

  std::vector<Element> out;
  out.reserve(L);
  for (size_t u = 0; u < L; ++u) {
    int64_t id = resolved[block[u]];
    if (id == -1) fail_internal("local node remained unresolved");
    out.push_back(Element(this, static_cast<uint32_t>(id)));
  }
  return out;
}

std::string ElementStore::canonical_key(Element e) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto cached = key_cache_.find(e.id_);
  if (cached != key_cache_.end()) return cached->second;

  std::vector<uint32_t> order{e.id_};
  std::unordered_map<uint32_t, int> number{{e.id_, 0}};
  for (size_t head = 0; head < order.size(); ++head) {
    for (uint32_t c : states_[order[head]].children) {
      if (!number.count(c)) {
        number[c] = static_cast<int>(order.size());
        order.push_back(c);
      }
    }
  }
  std::string key = "n" + std::to_string(order.size()) + ";";
  for (uint32_t id : order) {
    key += "p";
    for (Letter p : states_[id].perm) key += std::to_string(static_cast<int>(p)) + ",";
    key += ";";
    for (uint32_t c : states_[id].children) key += std::to_string(number[c]) + ",";
    key += ";";
  }
  key_cache_.emplace(e.id_, key);
  return key;
}

// ---------------------------------------------------------------------------
// Operations

namespace {

void require_same_store(Element a, Element b, const char* op) {
  if (!a.valid() || !b.valid() || a.store() != b.store())
    fail_invalid(std::string(op) + " requires elements of the same store");
}

}  // namespace

Letter apply(Element g, Letter x) { return g.store()->perm(g)[x]; }

Element multiply(Element g, Element h) {
  require_same_store(g, h, "multiply");
  ElementStore* store = g.store();
  const int k = store->alphabet_size();

  std::map<std::pair<uint32_t, uint32_t>, uint32_t> local_of;
  std::vector<ElementStore::LocalNode> nodes;

  std::function<ElementStore::ChildRef(Element, Element)> build =
      [&](Element a, Element b) -> ElementStore::ChildRef {
    if (store->is_identity(a)) return ElementStore::ChildRef::interned(b.id());
    if (store->is_identity(b)) return ElementStore::ChildRef::interned(a.id());
    auto key = std::make_pair(a.id(), b.id());
    auto it = local_of.find(key);
    if (it != local_of.end()) return ElementStore::ChildRef::local(it->second);

    uint32_t idx = static_cast<uint32_t>(nodes.size());
    local_of.emplace(key, idx);
    nodes.emplace_back();

    ElementStore::LocalNode node;
    const std::vector<Letter> pa = store->perm(a), pb = store->perm(b);
    node.perm.resize(k);
    node.children.resize(k);
    for (int x = 0; x < k; ++x) node.perm[x] = pa[pb[x]];
    for (int x = 0; x < k; ++x)
      node.children[x] =
          build(store->child(a, pb[x]), store->child(b, static_cast<Letter>(x)));
    nodes[idx] = std::move(node);
    return ElementStore::ChildRef::local(idx);
  };

  ElementStore::ChildRef root = build(g, h);
  if (root.is_interned) {
    // One factor was the identity.
    return store->is_identity(g) ? h : g;
  }
  return store->intern(nodes)[root.index];
}

Element invert(Element g) {
  ElementStore* store = g.store();
  const int k = store->alphabet_size();

  std::map<uint32_t, uint32_t> local_of;
  std::vector<ElementStore::LocalNode> nodes;

  std::function<ElementStore::ChildRef(Element)> build =
      [&](Element a) -> ElementStore::ChildRef {
    if (store->is_identity(a)) return ElementStore::ChildRef::interned(0);
    auto it = local_of.find(a.id());
    if (it != local_of.end()) return ElementStore::ChildRef::local(it->second);

    uint32_t idx = static_cast<uint32_t>(nodes.size());
    local_of.emplace(a.id(), idx);
    nodes.emplace_back();

    const std::vector<Letter> pa = store->perm(a);
    ElementStore::LocalNode node;
    node.perm.resize(k);
    node.children.resize(k);
    for (int x = 0; x < k; ++x) node.perm[pa[x]] = static_cast<Letter>(x);
    // (g^-1)|_x = (g|_{g^-1(x)})^-1
    for (int x = 0; x < k; ++x)
      node.children[x] = build(store->child(a, node.perm[x]));
    nodes[idx] = std::move(node);
    return ElementStore::ChildRef::local(idx);
  };

  ElementStore::ChildRef root = build(g);
  if (root.is_interned) return store->identity();
  return store->intern(nodes)[root.index];
}

Element restrict_word(Element g, const FiniteWord& w) {
  Element e = g;
  for (Letter x : w.letters) {
    if (x >= g.store()->alphabet_size()) fail_invalid("restriction letter out of range");
    e = g.store()->child(e, x);
  }
  return e;
}

FiniteWord act(Element g, const FiniteWord& w) {
  ElementStore* store = g.store();
  FiniteWord out;
  out.letters.reserve(w.size());
  Element state = g;
  for (Letter x : w.letters) {
    if (x >= store->alphabet_size()) fail_invalid("acted letter out of range");
    out.letters.push_back(apply(state, x));
    state = store->child(state, x);
  }
  return out;
}

EventuallyPeriodicWord act_periodic(Element g, const EventuallyPeriodicWord& w) {
  ElementStore* store = g.store();
  EventuallyPeriodicWord in = normalize(w);
  for (Letter x : in.tail.letters)
    if (x >= store->alphabet_size()) fail_invalid("acted letter out of range");
  for (Letter x : in.head.letters)
    if (x >= store->alphabet_size()) fail_invalid("acted letter out of range");

  const size_t P = in.tail.size(), H = in.head.size();

  // Consume the head right to left.
  std::vector<Letter> head_out_rtl;  // outputs for positions 1..H
  Element state = g;
  for (size_t j = 1; j <= H; ++j) {
    Letter x = letter_at(in, j);
    head_out_rtl.push_back(apply(state, x));
    state = store->child(state, x);
  }

  // Beyond the head the input letter depends only on the phase m mod P, so
  // the (state, phase) orbit is eventually periodic.
  std::map<std::pair<uint32_t, size_t>, size_t> seen;
  std::vector<Letter> outputs;  // outputs at positions H+1, H+2, ...
  size_t m = 0;
  size_t cycle_start;
  for (;;) {
    size_t phase = m % P;
    auto key = std::make_pair(state.id(), phase);
    auto it = seen.find(key);
    if (it != seen.end()) {
      cycle_start = it->second;
      break;
    }
    seen.emplace(key, m);
    Letter x = in.tail.letters[P - 1 - phase];
    outputs.push_back(apply(state, x));
    state = store->child(state, x);
    ++m;
  }

  EventuallyPeriodicWord result;
  // Repeating block: outputs[cycle_start..m-1], display order is reversed.
  for (size_t j = outputs.size(); j > cycle_start; --j)
    result.tail.letters.push_back(outputs[j - 1]);
  // Head: pre-periodic outputs (higher positions) then the head outputs.
  for (size_t j = cycle_start; j > 0; --j)
    result.head.letters.push_back(outputs[j - 1]);
  for (size_t j = head_out_rtl.size(); j > 0; --j)
    result.head.letters.push_back(head_out_rtl[j - 1]);
  return normalize(result);
}

bool decide_equal(Element g, Element h) {
  require_same_store(g, h, "decide_equal");
  return g.id() == h.id();
}

std::vector<Element> state_closure(Element g) {
  ElementStore* store = g.store();
  std::set<uint32_t> seen{g.id()};
  std::vector<Element> order{g};
  for (size_t head = 0; head < order.size(); ++head) {
    for (int x = 0; x < store->alphabet_size(); ++x) {
      Element c = store->child(order[head], static_cast<Letter>(x));
      if (seen.insert(c.id()).second) order.push_back(c);
    }
  }
  sort_elements(order);
  return order;
}

void sort_elements(std::vector<Element>& elements) {
  if (elements.empty()) return;
  ElementStore* store = elements.front().store();
  std::sort(elements.begin(), elements.end(), [&](Element a, Element b) {
    if (store->is_identity(a) != store->is_identity(b)) return store->is_identity(a);
    std::string ka = store->canonical_key(a), kb = store->canonical_key(b);
    if (ka.size() != kb.size()) return ka.size() < kb.size();
    return ka < kb;
  });
}

// ---------------------------------------------------------------------------
// Moore diagrams

MooreDiagram build_moore(const std::vector<Element>& states,
                         const std::map<uint32_t, std::string>& name_hints) {
  MooreDiagram diagram;
  if (states.empty()) return diagram;
  ElementStore* store = states.front().store();
  const int k = store->alphabet_size();

  diagram.states = states;
  sort_elements(diagram.states);
  diagram.states.erase(std::unique(diagram.states.begin(), diagram.states.end()),
                       diagram.states.end());

  std::map<uint32_t, uint32_t> index;
  for (uint32_t i = 0; i < diagram.states.size(); ++i)
    index[diagram.states[i].id()] = i;

  int unnamed = 0;
  for (Element e : diagram.states) {
    if (store->is_identity(e)) {
      diagram.names.push_back("1");
      continue;
    }
    auto hint = name_hints.find(e.id());
    if (hint != name_hints.end()) {
      diagram.names.push_back(hint->second);
    } else {
      diagram.names.push_back("s" + std::to_string(++unnamed));
    }
  }

  for (uint32_t i = 0; i < diagram.states.size(); ++i) {
    Element e = diagram.states[i];
    for (int x = 0; x < k; ++x) {
      Element to = store->child(e, static_cast<Letter>(x));
      auto it = index.find(to.id());
      if (it == index.end())
        fail_invalid("state set is not restriction-closed; diagram would dangle");
      diagram.edges.push_back(MooreEdge{i, static_cast<Letter>(x),
                                        apply(e, static_cast<Letter>(x)), it->second});
    }
  }
  return diagram;
}

std::string moore_to_dot(const MooreDiagram& diagram, const std::string& graph_name) {
  std::ostringstream out;
  out << "digraph " << graph_name << " {\n";
  out << "  rankdir=LR;\n";
  for (size_t i = 0; i < diagram.states.size(); ++i) {
    const std::string& name = diagram.names[i];
    out << "  \"" << name << "\" [shape=" << (name == "1" ? "doublecircle" : "circle")
        << "];\n";
  }
  for (const MooreEdge& e : diagram.edges) {
    out << "  \"" << diagram.names[e.from] << "\" -> \"" << diagram.names[e.to]
        << "\" [label=\"" << static_cast<int>(e.in) << "|" << static_cast<int>(e.out)
        << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string perm_to_cycles(const std::vector<Letter>& perm) {
  const int k = static_cast<int>(perm.size());
  std::string out;
  std::vector<bool> seen(k, false);
  for (int start = 0; start < k; ++start) {
    if (seen[start] || perm[start] == start) continue;
    std::string cycle = "(";
    int x = start;
    bool first = true;
    while (!seen[x]) {
      seen[x] = true;
      if (!first && k > 10) cycle += ",";
      cycle += std::to_string(x);
      first = false;
      x = perm[x];
    }
    cycle += ")";
    out += cycle;
  }
  return out;
}

std::vector<std::string> moore_to_lines(const MooreDiagram& diagram) {
  std::vector<std::string> lines;
  if (diagram.states.empty()) return lines;
  ElementStore* store = diagram.states.front().store();
  const int k = store->alphabet_size();

  std::map<uint32_t, std::string> names;
  for (size_t i = 0; i < diagram.states.size(); ++i)
    names[diagram.states[i].id()] = diagram.names[i];

  for (size_t i = 0; i < diagram.states.size(); ++i) {
    Element e = diagram.states[i];
    std::string line = diagram.names[i] + " = ";
    line += perm_to_cycles(store->perm(e));
    line += "(";
    for (int x = 0; x < k; ++x) {
      if (x) line += ", ";
      line += names[store->child(e, static_cast<Letter>(x)).id()];
    }
    line += ")";
    lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Group description files

int GroupSpec::generator_index(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

std::map<uint32_t, std::string> Group::name_hints() const {
  std::map<uint32_t, std::string> hints;
  for (size_t i = 0; i < generators.size(); ++i)
    hints.emplace(generators[i].id(), names[i]);
  return hints;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_invalid("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

[[noreturn]] void fail_json_at(const std::string& text, size_t byte,
                               const std::string& what) {
  size_t line = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  fail_invalid("line " + std::to_string(line) + ": " + what);
}

}  // namespace

GroupSpec parse_group_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail_json_at(text, e.byte, std::string("malformed JSON: ") + e.what());
  }

  GroupSpec spec;
  if (!doc.is_object() || !doc.contains("alphabet_size") ||
      !doc["alphabet_size"].is_number_integer())
    fail_invalid("group file must be an object with integer \"alphabet_size\"");
  spec.alphabet_size = doc["alphabet_size"].get<int>();
  if (spec.alphabet_size < 1 || spec.alphabet_size > 200)
    fail_invalid("alphabet_size must be between 1 and 200");
  if (!doc.contains("generators") || !doc["generators"].is_object())
    fail_invalid("group file must contain a \"generators\" object");

  // First pass: collect names (file order) so rest words can reference any of them.
  nlohmann::ordered_json ordered;
  try {
    ordered = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    fail_json_at(text, e.byte, std::string("malformed JSON: ") + e.what());
  }
  for (auto it = ordered["generators"].begin(); it != ordered["generators"].end(); ++it) {
    if (it.key().empty() || it.key() == "1")
      fail_invalid("generator name '" + it.key() + "' is reserved or empty");
    spec.names.push_back(it.key());
  }

  const int k = spec.alphabet_size;
  for (const std::string& name : spec.names) {
    const nlohmann::ordered_json& g = ordered["generators"][name];
    if (!g.is_object() || !g.contains("perm") || !g.contains("rest"))
      fail_invalid("generator '" + name + "' must have \"perm\" and \"rest\"");
    GeneratorSpec gen;

    const auto& perm = g["perm"];
    if (!perm.is_array() || perm.size() != static_cast<size_t>(k))
      fail_invalid("generator '" + name + "': perm must list " + std::to_string(k) +
                   " images");
    std::vector<bool> seen(k, false);
    for (const auto& v : perm) {
      if (!v.is_number_integer()) fail_invalid("generator '" + name + "': perm entries must be integers");
      int p = v.get<int>();
      if (p < 0 || p >= k || seen[p])
        fail_invalid("generator '" + name + "': perm is not a bijection on 0.." +
                     std::to_string(k - 1));
      seen[p] = true;
      gen.perm.push_back(static_cast<Letter>(p));
    }

    const auto& rest = g["rest"];
    if (!rest.is_array() || rest.size() != static_cast<size_t>(k))
      fail_invalid("generator '" + name + "': rest must list " + std::to_string(k) +
                   " words");
    for (const auto& word : rest) {
      if (!word.is_array())
        fail_invalid("generator '" + name + "': each rest entry must be a token list");
      std::vector<int32_t> tokens;
      for (const auto& tok : word) {
        if (!tok.is_string())
          fail_invalid("generator '" + name + "': rest tokens must be strings");
        std::string t = tok.get<std::string>();
        bool inverse = false;
        if (t.size() > 3 && t.substr(t.size() - 3) == "^-1") {
          inverse = true;
          t = t.substr(0, t.size() - 3);
        }
        int idx = -1;
        for (size_t i = 0; i < spec.names.size(); ++i)
          if (spec.names[i] == t) idx = static_cast<int>(i);
        if (idx < 0)
          fail_invalid("generator '" + name + "': unknown token '" + t + "'");
        tokens.push_back(inverse ? -(idx + 1) : idx + 1);
      }
      gen.rest.push_back(std::move(tokens));
    }
    spec.generators.push_back(std::move(gen));
  }
  return spec;
}

GroupSpec load_group_file(const std::string& path) {
  return parse_group_json(read_file(path));
}

std::string group_spec_to_json(const GroupSpec& spec) {
  nlohmann::ordered_json doc;
  doc["alphabet_size"] = spec.alphabet_size;
  nlohmann::ordered_json gens = nlohmann::ordered_json::object();
  for (size_t i = 0; i < spec.names.size(); ++i) {
    nlohmann::ordered_json g;
    g["perm"] = nlohmann::ordered_json::array();
    for (Letter p : spec.generators[i].perm) g["perm"].push_back(static_cast<int>(p));
    g["rest"] = nlohmann::ordered_json::array();
    for (const auto& word : spec.generators[i].rest) {
      nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
      for (int32_t t : word) {
        std::string name = spec.names[static_cast<size_t>(std::abs(t)) - 1];
        tokens.push_back(t > 0 ? name : name + "^-1");
      }
      g["rest"].push_back(tokens);
    }
    gens[spec.names[i]] = g;
  }
  doc["generators"] = gens;
  return doc.dump(2) + "\n";
}

namespace {

using TokenWord = std::vector<int32_t>;

TokenWord free_reduce(const TokenWord& word) {
  TokenWord out;
  for (int32_t t : word) {
    if (!out.empty() && out.back() == -t)
      out.pop_back();
    else
      out.push_back(t);
  }
  return out;
}

}  // namespace

Group realize(const GroupSpec& spec, size_t closure_bound) {
  const int k = spec.alphabet_size;
  Group group;
  group.store = std::make_shared<ElementStore>(k);
  group.names = spec.names;

  auto token_perm = [&](int32_t t, Letter x) -> Letter {
    const GeneratorSpec& g = spec.generators[static_cast<size_t>(std::abs(t)) - 1];
    if (t > 0) return g.perm[x];
    for (int y = 0; y < k; ++y)
      if (g.perm[y] == x) return static_cast<Letter>(y);
    fail_internal("permutation inverse lookup failed");
  };
  auto token_rest = [&](int32_t t, Letter y) -> TokenWord {
    const GeneratorSpec& g = spec.generators[static_cast<size_t>(std::abs(t)) - 1];
    if (t > 0) return g.rest[y];
    // (g^-1)|_y = (g|_{g^-1(y)})^-1: reverse the word and flip every token.
    Letter x = token_perm(t, y);
    TokenWord out;
    const TokenWord& w = g.rest[x];
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(-*it);
    return out;
  };

  std::map<TokenWord, uint32_t> index;
  std::vector<TokenWord> words;
  auto word_index = [&](const TokenWord& w) -> uint32_t {
    auto it = index.find(w);
    if (it != index.end()) return it->second;
    uint32_t i = static_cast<uint32_t>(words.size());
    if (words.size() >= closure_bound)
      fail_bound("generator closure exceeded bound of " + std::to_string(closure_bound) +
                 " states");
    index.emplace(w, i);
    words.push_back(w);
    return i;
  };

  std::vector<uint32_t> generator_nodes;
  for (size_t i = 0; i < spec.generators.size(); ++i)
    generator_nodes.push_back(word_index(TokenWord{static_cast<int32_t>(i) + 1}));

  std::vector<ElementStore::LocalNode> nodes;
  for (size_t w = 0; w < words.size(); ++w) {  // words grows during the loop
    TokenWord word = words[w];
    ElementStore::LocalNode node;
    node.perm.resize(k);
    node.children.resize(k);
    for (int x = 0; x < k; ++x) {
      // Apply tokens right to left, collecting restriction pieces.
      std::vector<TokenWord> pieces(word.size());
      Letter y = static_cast<Letter>(x);
      for (size_t i = word.size(); i > 0; --i) {
        pieces[i - 1] = token_rest(word[i - 1], y);
        y = token_perm(word[i - 1], y);
      }
      node.perm[x] = y;
      TokenWord restriction;
      for (const TokenWord& piece : pieces)
        restriction.insert(restriction.end(), piece.begin(), piece.end());
      restriction = free_reduce(restriction);
      if (restriction.empty())
        node.children[x] = ElementStore::ChildRef::interned(0);
      else
        node.children[x] = ElementStore::ChildRef::local(word_index(restriction));
    }
    nodes.push_back(std::move(node));
  }

  std::vector<Element> interned = group.store->intern(nodes);
  for (uint32_t node : generator_nodes) group.generators.push_back(interned[node]);
  return group;
}

}  // namespace ssg
