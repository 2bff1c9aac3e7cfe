#pragma once

#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "omega/automata.hpp"
#include "omega/grammar.hpp"
#include "omega/lasso.hpp"

namespace omega {

using Device = std::variant<OmegaFSA, OmegaPDA, OmegaTM, OmegaGrammar>;

inline const std::string& device_name(const Device& d) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; },
                    d);
}
inline Alphabet device_alphabet(const Device& d) {
  if (auto* g = std::get_if<OmegaGrammar>(&d)) {
    Alphabet a;
    a.symbols = g->terminals;
    return a;
  }
  return std::visit(
      [](const auto& x) -> Alphabet {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, OmegaGrammar>)
          return Alphabet{};
        else
          return x.alphabet;
      },
      d);
}

// ---------------------------------------------------------------------------
// Verdicts and certificates
// ---------------------------------------------------------------------------

enum class VerdictKind { Accepted, Rejected, Unknown };

inline std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Accepted: return "Accepted";
    case VerdictKind::Rejected: return "Rejected";
    default: return "Unknown";
  }
}

struct StepRecord {
  std::string tag;  // identifies the transition / (production,position)
  Sym elem;         // profile element contributed by this step
  int consumed = 0;
};

// Finite witness: replaying stem then loop from the initial configuration
// yields a pumpable loop whose profile satisfies the mode.
struct Certificate {
  std::string device;
  LassoWord word;
  AcceptanceMode mode;
  std::vector<StepRecord> stem;
  std::vector<StepRecord> loop;
  long loop_consumption = 0;
  OccurrenceProfile profile;
  std::string growth_witness;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::optional<Certificate> certificate;
  std::string reason;

  static Verdict accepted(Certificate c) {
    return {VerdictKind::Accepted, std::move(c), ""};
  }
  static Verdict rejected(std::string why) {
    return {VerdictKind::Rejected, std::nullopt, std::move(why)};
  }
  static Verdict unknown(std::string why) {
    return {VerdictKind::Unknown, std::nullopt, std::move(why)};
  }
};

struct SearchOptions {
  long bound = 200;              // node expansion budget
  int oscillation_threshold = 64;  // tape-1 scans per cell before pruning
};

// ---------------------------------------------------------------------------
// Exact FSA lasso membership over the product of the automaton with the
// lasso skeleton. Kept independent of the generic bounded engine so the two
// can cross-check each other.
// ---------------------------------------------------------------------------

namespace fsa_exact {

struct Product {
  // node id = state_index * span + pos
  size_t span = 0;
  std::vector<Sym> states;
  std::map<Sym, size_t> state_index;
  struct E {
    int to;
    bool consuming;
    Sym entered;
  };
  std::vector<std::vector<E>> adj;
  int root = 0;
};

inline Product build_product(const OmegaFSA& a, const LassoWord& w) {
  Product p;
  p.span = w.skeleton();
  p.states = a.states;
  for (size_t i = 0; i < a.states.size(); ++i) p.state_index[a.states[i]] = i;
  p.adj.assign(a.states.size() * p.span, {});
  auto node = [&](const Sym& q, size_t pos) {
    return static_cast<int>(p.state_index.at(q) * p.span + pos);
  };
  for (size_t pos = 0; pos < p.span; ++pos) {
    size_t next = pos + 1;
    if (next >= p.span) next = w.stem.size();
    for (const auto& t : a.transitions) {
      if (!t.symbol) {
        p.adj[node(t.from, pos)].push_back({node(t.to, pos), false, t.to});
      } else if (*t.symbol == w.at(pos)) {
        p.adj[node(t.from, pos)].push_back({node(t.to, next), true, t.to});
      }
    }
  }
  p.root = node(a.start, 0);
  return p;
}

inline std::vector<bool> reachable_from(const Product& p, int src) {
  std::vector<bool> seen(p.adj.size(), false);
  std::vector<int> work{src};
  seen[src] = true;
  while (!work.empty()) {
    int n = work.back();
    work.pop_back();
    for (const auto& e : p.adj[n])
      if (!seen[e.to]) {
        seen[e.to] = true;
        work.push_back(e.to);
      }
  }
  return seen;
}

// SCC ids via iterative Tarjan restricted to nodes whose entered-state value
// passes `allow` (the root state of a node is irrelevant: acceptance profiles
// collect states *entered*, so we restrict edges by their target element).
// A node passes if reached; edges are filtered by elem.
struct SccResult {
  std::vector<int> comp;  // -1 when not in any component
  int count = 0;
};

inline SccResult scc(const Product& p,
                     const std::function<bool(const Product::E&)>& edge_ok) {
  int n = static_cast<int>(p.adj.size());
  SccResult r;
  r.comp.assign(n, -1);
  std::vector<int> low(n, -1), idx(n, -1), stk;
  std::vector<bool> on(n, false);
  int counter = 0;
  struct Frame {
    int v;
    size_t ei;
  };
  for (int s = 0; s < n; ++s) {
    if (idx[s] != -1) continue;
    std::vector<Frame> frames{{s, 0}};
    idx[s] = low[s] = counter++;
    stk.push_back(s);
    on[s] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.ei < p.adj[f.v].size()) {
        const auto& e = p.adj[f.v][f.ei++];
        if (!edge_ok(e)) continue;
        if (idx[e.to] == -1) {
          idx[e.to] = low[e.to] = counter++;
          stk.push_back(e.to);
          on[e.to] = true;
          frames.push_back({e.to, 0});
        } else if (on[e.to]) {
          low[f.v] = std::min(low[f.v], idx[e.to]);
        }
      } else {
        int v = f.v;
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        if (low[v] == idx[v]) {
          while (true) {
            int w2 = stk.back();
            stk.pop_back();
            on[w2] = false;
            r.comp[w2] = r.count;
            if (w2 == v) break;
          }
          r.count++;
        }
      }
    }
  }
  return r;
}

}  // namespace fsa_exact

// Exact decision; mode.pi must be none.
inline bool fsa_lasso_member(const OmegaFSA& a, const LassoWord& word,
                             const AcceptanceMode& mode) {
  if (mode.pi != Pi::none)
    throw ValidationError("automata take no derivation policy");
  for (const auto& s : word.stem)
    if (!a.alphabet.contains(s))
      throw ValidationError("lasso symbol not in device alphabet: " + s);
  for (const auto& s : word.loop)
    if (!a.alphabet.contains(s))
      throw ValidationError("lasso symbol not in device alphabet: " + s);

  using namespace fsa_exact;
  Product p = build_product(a, word);
  std::vector<bool> reach = reachable_from(p, p.root);

  // A live tail from node n: a cycle with at least one consuming edge,
  // reachable from n through edges allowed by `allow`.
  auto live_from = [&](const std::function<bool(const Product::E&)>& allow) {
    SccResult comps = scc(p, allow);
    // components containing an internal consuming edge
    std::vector<bool> live_comp(comps.count, false);
    for (size_t v = 0; v < p.adj.size(); ++v)
      for (const auto& e : p.adj[v])
        if (allow(e) && comps.comp[v] != -1 && comps.comp[v] == comps.comp[e.to] &&
            e.consuming)
          live_comp[comps.comp[v]] = true;
    std::vector<bool> node_live(p.adj.size(), false);
    for (size_t v = 0; v < p.adj.size(); ++v)
      if (comps.comp[v] != -1 && live_comp[comps.comp[v]]) node_live[v] = true;
    // propagate backwards: n is live if it reaches a live node
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t v = 0; v < p.adj.size(); ++v) {
        if (node_live[v]) continue;
        for (const auto& e : p.adj[v])
          if (allow(e) && node_live[e.to]) {
            node_live[v] = true;
            changed = true;
            break;
          }
      }
    }
    return node_live;
  };

  auto any_edge = [](const Product::E&) { return true; };

  if (mode.rho == Rho::cap) {
    SymSet useful = cap_useful_elems(a.family);
    if (useful.empty()) return false;
    auto node_live = live_from(any_edge);
    if (!node_live[p.root]) return false;
    if (mode.sigma == Sigma::ran) {
      // the start state counts toward ran
      if (useful.count(a.start)) return true;
      // reach an edge entering a useful state, then stay alive
      std::vector<bool> seen(p.adj.size(), false);
      std::vector<int> work{p.root};
      seen[p.root] = true;
      while (!work.empty()) {
        int v = work.back();
        work.pop_back();
        for (const auto& e : p.adj[v]) {
          if (useful.count(e.entered) && node_live[e.to]) return true;
          if (!seen[e.to]) {
            seen[e.to] = true;
            work.push_back(e.to);
          }
        }
      }
      return false;
    }
    // inf: some reachable SCC holding both a consuming edge and a useful entry
    SccResult comps = scc(p, any_edge);
    std::vector<bool> has_consume(comps.count, false), has_useful(comps.count, false),
        comp_reach(comps.count, false);
    for (size_t v = 0; v < p.adj.size(); ++v) {
      if (comps.comp[v] == -1) continue;
      if (reach[v]) comp_reach[comps.comp[v]] = true;
      for (const auto& e : p.adj[v])
        if (comps.comp[e.to] == comps.comp[v]) {
          if (e.consuming) has_consume[comps.comp[v]] = true;
          if (useful.count(e.entered)) has_useful[comps.comp[v]] = true;
        }
    }
    for (int c = 0; c < comps.count; ++c)
      if (comp_reach[c] && has_consume[c] && has_useful[c]) return true;
    return false;
  }

  if (mode.rho == Rho::subseteq) {
    for (const auto& top : subseteq_tops(a.family)) {
      auto allow = [&](const Product::E& e) { return top.count(e.entered) > 0; };
      if (mode.sigma == Sigma::ran) {
        if (!top.count(a.start)) continue;
        // whole run inside top: restricted reachability to a live node
        auto node_live = live_from(allow);
        std::vector<bool> seen(p.adj.size(), false);
        std::vector<int> work{p.root};
        seen[p.root] = true;
        bool ok = node_live[p.root];
        while (!work.empty() && !ok) {
          int v = work.back();
          work.pop_back();
          for (const auto& e : p.adj[v])
            if (allow(e) && !seen[e.to]) {
              seen[e.to] = true;
              if (node_live[e.to]) ok = true;
              work.push_back(e.to);
            }
        }
        if (ok) return true;
      } else {
        // tail cycle within the top-induced subgraph, stem unrestricted
        SccResult comps = scc(p, allow);
        std::vector<bool> has_consume(comps.count, false), comp_reach(comps.count, false);
        for (size_t v = 0; v < p.adj.size(); ++v) {
          if (comps.comp[v] == -1) continue;
          if (reach[v]) comp_reach[comps.comp[v]] = true;
          for (const auto& e : p.adj[v])
            if (allow(e) && comps.comp[e.to] == comps.comp[v] && e.consuming)
              has_consume[comps.comp[v]] = true;
        }
        for (int c = 0; c < comps.count; ++c)
          if (comp_reach[c] && has_consume[c]) return true;
      }
    }
    return false;
  }

  // rho = eq: visited-set tracking per block
  for (const auto& blk : eq_blocks(a.family)) {
    auto allow = [&](const Product::E& e) {
      return blk.restrict_to.count(e.entered) > 0;
    };
    size_t nh = blk.hits.size();
    if (nh > 20) throw ResourceError("eq block with too many hit sets");
    auto hitmask = [&](const Sym& q) {
      size_t m = 0;
      for (size_t i = 0; i < nh; ++i)
        if (blk.hits[i].count(q)) m |= size_t{1} << i;
      return m;
    };
    size_t full = (size_t{1} << nh) - 1;
    if (mode.sigma == Sigma::ran) {
      if (!blk.restrict_to.count(a.start)) continue;
      size_t init_mask = hitmask(a.start);
      auto node_live = live_from(allow);
      // BFS over (node, mask)
      std::set<std::pair<int, size_t>> seen;
      std::deque<std::pair<int, size_t>> q;
      q.push_back({p.root, init_mask});
      seen.insert({p.root, init_mask});
      bool ok = false;
      while (!q.empty() && !ok) {
        auto [v, m] = q.front();
        q.pop_front();
        if (m == full && node_live[v]) {
          ok = true;
          break;
        }
        for (const auto& e : p.adj[v]) {
          if (!allow(e)) continue;
          size_t m2 = m | hitmask(e.entered);
          if (seen.insert({e.to, m2}).second) q.push_back({e.to, m2});
        }
      }
      if (ok) return true;
    } else {
      // inf: an SCC of the restricted graph whose entered-set meets every hit
      SccResult comps = scc(p, allow);
      std::vector<size_t> comp_mask(comps.count, 0);
      std::vector<bool> has_consume(comps.count, false), comp_reach(comps.count, false);
      for (size_t v = 0; v < p.adj.size(); ++v) {
        if (comps.comp[v] == -1) continue;
        if (reach[v]) comp_reach[comps.comp[v]] = true;
        for (const auto& e : p.adj[v])
          if (allow(e) && comps.comp[e.to] == comps.comp[v]) {
            comp_mask[comps.comp[v]] |= hitmask(e.entered);
            if (e.consuming) has_consume[comps.comp[v]] = true;
          }
      }
      for (int c = 0; c < comps.count; ++c)
        if (comp_reach[c] && has_consume[c] && comp_mask[c] == full) return true;
    }
  }
  return false;
}

}  // namespace omega
