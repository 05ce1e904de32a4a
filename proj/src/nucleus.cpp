#include "ssg/nucleus.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "ssg/errors.hpp"

namespace ssg {

bool Nucleus::contains(Element e) const {
  for (const Element& n : elements)
    if (n == e) return true;
  return false;
}

namespace {

/** Ids of closure states that lie on a directed cycle. */
std::set<uint32_t> cycle_states(ElementStore* store, const std::vector<Element>& closure) {
  const int k = store->alphabet_size();
  std::map<uint32_t, int> index;
  for (size_t i = 0; i < closure.size(); ++i) index[closure[i].id()] = static_cast<int>(i);

  // Tarjan strongly connected components.
  const int n = static_cast<int>(closure.size());
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
      int w = index[store->child(closure[v], static_cast<Letter>(x)).id()];
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
          cyclic = store->child(closure[scc[0]], static_cast<Letter>(x)) == closure[scc[0]];
      }
      if (cyclic)
        for (int w : scc) result.insert(closure[w].id());
    }
  };
  for (int v = 0; v < n; ++v)
    if (idx[v] == -1) strongconnect(v);
  return result;
}

}  // namespace

std::vector<Element> eventual_states(Element g) {
  ElementStore* store = g.store();
  const int k = store->alphabet_size();
  std::vector<Element> closure = state_closure(g);
  std::set<uint32_t> cyclic = cycle_states(store, closure);

  // Forward closure of the cyclic states.
  std::map<uint32_t, Element> by_id;
  for (const Element& e : closure) by_id.emplace(e.id(), e);
  std::vector<Element> queue;
  std::set<uint32_t> seen;
  for (uint32_t id : cyclic)
    if (seen.insert(id).second) queue.push_back(by_id.at(id));
  for (size_t head = 0; head < queue.size(); ++head) {
    for (int x = 0; x < k; ++x) {
      Element c = store->child(queue[head], static_cast<Letter>(x));
      if (seen.insert(c.id()).second) queue.push_back(c);
    }
  }
  sort_elements(queue);
  return queue;
}

Nucleus compute_nucleus(const Group& group, size_t bound) {
  ElementStore* store = group.store.get();
  const int k = store->alphabet_size();

  std::map<uint32_t, Element> candidates;
  std::map<uint32_t, std::vector<Element>> eventual_memo;
  std::map<std::pair<uint32_t, uint32_t>, Element> product_memo;
  std::set<std::pair<uint32_t, uint32_t>> processed;

  auto eventual_of = [&](Element e) -> const std::vector<Element>& {
    auto it = eventual_memo.find(e.id());
    if (it == eventual_memo.end())
      it = eventual_memo.emplace(e.id(), eventual_states(e)).first;
    return it->second;
  };
  auto product_of = [&](Element g, Element h) -> Element {
    auto key = std::make_pair(g.id(), h.id());
    auto it = product_memo.find(key);
    if (it == product_memo.end()) it = product_memo.emplace(key, multiply(g, h)).first;
    return it->second;
  };

  bool grew = false;
  auto add = [&](Element e) {
    if (candidates.emplace(e.id(), e).second) {
      grew = true;
      if (candidates.size() > bound)
        fail_bound("nucleus candidate set exceeded bound of " + std::to_string(bound));
      Element inv = invert(e);
      if (candidates.emplace(inv.id(), inv).second && candidates.size() > bound)
        fail_bound("nucleus candidate set exceeded bound of " + std::to_string(bound));
    }
  };

  // Seed: identity plus the eventual states of generators and inverses
  // (inverses are covered because add() inserts inverses alongside).
  add(store->identity());
  for (const Element& g : group.generators)
    for (const Element& e : eventual_of(g)) add(e);

  // Close under eventual states of pairwise products.
  for (;;) {
    grew = false;
    std::vector<Element> snapshot;
    snapshot.reserve(candidates.size());
    for (const auto& [id, e] : candidates) snapshot.push_back(e);
    for (const Element& g : snapshot) {
      for (const Element& h : snapshot) {
        if (!processed.insert(std::make_pair(g.id(), h.id())).second) continue;
        for (const Element& e : eventual_of(product_of(g, h))) add(e);
      }
    }
    if (!grew) break;
  }

  // Prune: repeatedly drop candidates that appear in no eventual state set of
  // a product of surviving candidates (the identity always stays).
  std::set<uint32_t> keep;
  for (const auto& [id, e] : candidates) keep.insert(id);
  for (;;) {
    std::set<uint32_t> witnessed{store->identity().id()};
    for (uint32_t gid : keep) {
      for (uint32_t hid : keep) {
        Element product = product_of(candidates.at(gid), candidates.at(hid));
        for (const Element& e : eventual_of(product))
          if (keep.count(e.id())) witnessed.insert(e.id());
      }
    }
    if (witnessed.size() == keep.size()) break;
    keep = std::move(witnessed);
  }

  std::vector<Element> elements;
  for (uint32_t id : keep) elements.push_back(candidates.at(id));
  sort_elements(elements);

  // ---- verification -------------------------------------------------------
  auto in_keep = [&](Element e) { return keep.count(e.id()) > 0; };

  for (const Element& n : elements) {
    for (int x = 0; x < k; ++x)
      if (!in_keep(store->child(n, static_cast<Letter>(x))))
        fail_internal("nucleus is not restriction-closed");
    if (!in_keep(invert(n))) fail_internal("nucleus is not inverse-closed");
  }
  for (const Element& g : elements) {
    for (const Element& h : elements) {
      for (const Element& e : eventual_of(product_of(g, h)))
        if (!in_keep(e)) fail_internal("pair product escapes the nucleus");
    }
  }
  // The group's own generators must eventually restrict into the set.
  std::set<uint32_t> seed;
  for (const Element& g : group.generators) {
    for (const Element& e : eventual_of(g)) {
      if (!in_keep(e)) fail_internal("generator eventually escapes the nucleus");
      seed.insert(e.id());
      seed.insert(invert(e).id());
    }
  }

  // Minimality: for small nuclei check directly that removing any single
  // non-identity element breaks one of the defining properties.
  if (elements.size() <= 12) {
    for (const Element& n : elements) {
      if (store->is_identity(n)) continue;
      bool needed = seed.count(n.id()) > 0;
      for (const Element& m : elements) {
        if (needed) break;
        if (m == n) continue;
        for (int x = 0; x < k && !needed; ++x)
          needed = store->child(m, static_cast<Letter>(x)) == n;
      }
      for (const Element& g : elements) {
        if (needed) break;
        if (g == n) continue;
        for (const Element& h : elements) {
          if (needed) break;
          if (h == n) continue;
          for (const Element& e : eventual_of(product_of(g, h)))
            if (e == n) {
              needed = true;
              break;
            }
        }
      }
      if (!needed) fail_internal("nucleus is not minimal: removable element found");
    }
  }

  Nucleus nucleus;
  nucleus.elements = elements;
  nucleus.diagram = build_moore(elements, group.name_hints());
  return nucleus;
}

ContractionResult is_contracting(const Group& group, size_t bound) {
  ContractionResult result;
  try {
    result.nucleus = compute_nucleus(group, bound);
    result.known = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BoundExceeded) throw;
    result.known = false;
    result.reason = e.what();
  }
  return result;
}

}  // namespace ssg
