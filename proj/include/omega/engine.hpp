#pragma once

#include <deque>
#include <unordered_map>

#include "omega/oracle.hpp"

namespace omega {
namespace engine {

inline long phase_of(const LassoWord& w, long offset) {
  long u = static_cast<long>(w.stem.size());
  long v = static_cast<long>(w.loop.size());
  if (offset < u) return offset;
  return u + (offset - u) % v;
}

template <typename Config>
struct EStep {
  Config config;
  int consumed = 0;
  Sym elem;
  std::string tag;
};

struct Edge {
  int from, to;
  int consumed;
  Sym elem;
  std::string tag;
};

template <typename Config>
struct Graph {
  std::vector<Config> configs;
  std::vector<int> parent;  // BFS tree parent node (-1 at root)
  std::vector<int> via;     // edge index used to first discover the node
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;  // edge indices per source node
  bool closed = false;
  long expanded = 0;
  int root = 0;
};

template <typename Driver>
Graph<typename Driver::Config> build_graph(Driver& drv, long bound) {
  using Config = typename Driver::Config;
  Graph<Config> g;
  std::unordered_map<std::string, int> index;
  std::deque<int> queue;
  auto add_node = [&](Config c, int par, int via_edge) {
    int idx = static_cast<int>(g.configs.size());
    g.configs.push_back(std::move(c));
    g.parent.push_back(par);
    g.via.push_back(via_edge);
    g.out.emplace_back();
    queue.push_back(idx);
    return idx;
  };
  Config init = drv.initial();
  index[drv.key(init)] = 0;
  add_node(std::move(init), -1, -1);
  while (!queue.empty()) {
    if (g.expanded >= bound) return g;  // budget hit: not closed
    int n = queue.front();
    queue.pop_front();
    g.expanded++;
    for (auto& s : drv.successors(g.configs[n])) {
      std::string key = drv.key(s.config);
      auto it = index.find(key);
      int to;
      int eidx = static_cast<int>(g.edges.size());
      if (it == index.end()) {
        to = add_node(std::move(s.config), n, eidx);
        index[key] = to;
      } else {
        to = it->second;
      }
      g.edges.push_back({n, to, s.consumed, s.elem, s.tag});
      g.out[n].push_back(eidx);
    }
  }
  g.closed = !drv.search_pruned();
  return g;
}

// ---------------------------------------------------------------------------
// Acceptance over a (possibly partial) configuration graph. On a closed
// graph the decision is exact; on a partial graph only the accepting side is
// meaningful.
// ---------------------------------------------------------------------------

struct CertPath {
  std::vector<int> stem_edges;
  std::vector<int> loop_edges;
};

template <typename Config>
class GraphDecider {
 public:
  GraphDecider(const Graph<Config>& g, const AcceptanceMode& mode,
               const Family& family, SymSet init_elems)
      : g_(g), mode_(mode), init_elems_(std::move(init_elems)) {
    switch (mode.rho) {
      case Rho::cap: {
        SymSet useful = cap_useful_elems(family);
        if (!useful.empty()) blocks_.push_back({std::nullopt, {useful}});
        break;
      }
      case Rho::subseteq:
        for (auto& t : subseteq_tops(family)) blocks_.push_back({t, {}});
        break;
      case Rho::eq:
        for (auto& b : eq_blocks(family))
          blocks_.push_back({b.restrict_to, b.hits});
        break;
    }
  }

  std::optional<CertPath> find() {
    for (const auto& blk : blocks_) {
      auto r = mode_.sigma == Sigma::inf ? find_inf(blk) : find_ran(blk);
      if (r) return r;
    }
    return std::nullopt;
  }

 private:
  struct Block {
    std::optional<SymSet> restrict_to;  // nullopt = no restriction
    std::vector<SymSet> hits;
  };

  const Graph<Config>& g_;
  AcceptanceMode mode_;
  SymSet init_elems_;
  std::vector<Block> blocks_;

  bool allowed(const Block& b, const Edge& e) const {
    return !b.restrict_to || b.restrict_to->count(e.elem) > 0;
  }

  // Tarjan over the block-restricted edge set.
  std::vector<int> scc(const Block& b, int& count) const {
    int n = static_cast<int>(g_.configs.size());
    std::vector<int> comp(n, -1), low(n, -1), idx(n, -1), stk;
    std::vector<bool> on(n, false);
    int counter = 0;
    count = 0;
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
        if (f.ei < g_.out[f.v].size()) {
          const Edge& e = g_.edges[g_.out[f.v][f.ei++]];
          if (!allowed(b, e)) continue;
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
              int w = stk.back();
              stk.pop_back();
              on[w] = false;
              comp[w] = count;
              if (w == v) break;
            }
            count++;
          }
        }
      }
    }
    return comp;
  }

  size_t hitmask(const Block& b, const Sym& x) const {
    size_t m = 0;
    for (size_t i = 0; i < b.hits.size(); ++i)
      if (b.hits[i].count(x)) m |= size_t{1} << i;
    return m;
  }

  // BFS path from `src` to any node satisfying `goal`, using only allowed
  // edges. Returns edge sequence.
  template <typename Goal>
  std::optional<std::vector<int>> path_to(const Block& b, int src,
                                          Goal goal) const {
    std::vector<int> via(g_.configs.size(), -2);
    std::deque<int> q{src};
    via[src] = -1;
    if (goal(src)) return std::vector<int>{};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int ei : g_.out[v]) {
        const Edge& e = g_.edges[ei];
        if (!allowed(b, e) || via[e.to] != -2) continue;
        via[e.to] = ei;
        if (goal(e.to)) {
          std::vector<int> path;
          for (int cur = e.to; via[cur] != -1; cur = g_.edges[via[cur]].from)
            path.push_back(via[cur]);
          std::reverse(path.begin(), path.end());
          return path;
        }
        q.push_back(e.to);
      }
    }
    return std::nullopt;
  }

  // Closed walk from `start` through every edge in `required`, inside one
  // SCC of the block-restricted graph.
  std::vector<int> cover_walk(const Block& b, const std::vector<int>& comp,
                              int start, std::vector<int> required) const {
    std::sort(required.begin(), required.end());
    required.erase(std::unique(required.begin(), required.end()),
                   required.end());
    std::vector<int> walk;
    int cur = start;
    auto in_comp = [&](int ei) {
      const Edge& e = g_.edges[ei];
      return comp[e.from] != -1 && comp[e.from] == comp[start] &&
             comp[e.to] == comp[start] && allowed(b, e);
    };
    auto connect = [&](int to) {
      // BFS within the component
      std::vector<int> via(g_.configs.size(), -2);
      std::deque<int> q{cur};
      via[cur] = -1;
      if (cur == to) return;
      bool found = false;
      while (!q.empty() && !found) {
        int v = q.front();
        q.pop_front();
        for (int ei : g_.out[v]) {
          if (!in_comp(ei)) continue;
          const Edge& e = g_.edges[ei];
          if (via[e.to] != -2) continue;
          via[e.to] = ei;
          if (e.to == to) {
            found = true;
            break;
          }
          q.push_back(e.to);
        }
      }
      std::vector<int> path;
      for (int c2 = to; via[c2] != -1; c2 = g_.edges[via[c2]].from)
        path.push_back(via[c2]);
      std::reverse(path.begin(), path.end());
      walk.insert(walk.end(), path.begin(), path.end());
      cur = to;
    };
    for (int ei : required) {
      connect(g_.edges[ei].from);
      walk.push_back(ei);
      cur = g_.edges[ei].to;
    }
    connect(start);
    return walk;
  }

  std::vector<int> tree_path(int node) const {
    std::vector<int> path;
    for (int cur = node; g_.parent[cur] != -1; cur = g_.parent[cur])
      path.push_back(g_.via[cur]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  std::optional<CertPath> find_inf(const Block& b) {
    int count = 0;
    std::vector<int> comp = scc(b, count);
    if (count == 0) return std::nullopt;
    std::vector<size_t> comp_mask(count, 0);
    std::vector<int> comp_consume(count, -1);
    std::vector<std::vector<int>> comp_hit_edge(count,
                                                std::vector<int>(b.hits.size(), -1));
    for (size_t ei = 0; ei < g_.edges.size(); ++ei) {
      const Edge& e = g_.edges[ei];
      if (!allowed(b, e) || comp[e.from] == -1 || comp[e.from] != comp[e.to])
        continue;
      int c = comp[e.from];
      size_t m = hitmask(b, e.elem);
      comp_mask[c] |= m;
      for (size_t i = 0; i < b.hits.size(); ++i)
        if ((m & (size_t{1} << i)) && comp_hit_edge[c][i] == -1)
          comp_hit_edge[c][i] = static_cast<int>(ei);
      if (e.consumed > 0 && comp_consume[c] == -1)
        comp_consume[c] = static_cast<int>(ei);
    }
    size_t full = (size_t{1} << b.hits.size()) - 1;
    // deterministic choice: smallest node index whose component qualifies
    for (size_t v = 0; v < g_.configs.size(); ++v) {
      int c = comp[v];
      if (c == -1 || comp_consume[c] == -1 || comp_mask[c] != full) continue;
      std::vector<int> required{comp_consume[c]};
      for (size_t i = 0; i < b.hits.size(); ++i)
        required.push_back(comp_hit_edge[c][i]);
      CertPath cert;
      cert.stem_edges = tree_path(static_cast<int>(v));
      cert.loop_edges = cover_walk(b, comp, static_cast<int>(v), required);
      if (cert.loop_edges.empty()) continue;  // degenerate
      return cert;
    }
    return std::nullopt;
  }

  std::optional<CertPath> find_ran(const Block& b) {
    if (b.restrict_to)
      for (const auto& x : init_elems_)
        if (!b.restrict_to->count(x)) return std::nullopt;
    if (b.hits.size() > 20)
      throw ResourceError("eq block with too many hit sets");
    size_t full = (size_t{1} << b.hits.size()) - 1;
    size_t init_mask = 0;
    for (const auto& x : init_elems_) init_mask |= hitmask(b, x);
    // live nodes: can reach a consuming cycle within the restricted graph
    int count = 0;
    std::vector<int> comp = scc(b, count);
    std::vector<bool> comp_live(count, false);
    for (const auto& e : g_.edges)
      if (allowed(b, e) && comp[e.from] != -1 && comp[e.from] == comp[e.to] &&
          e.consumed > 0)
        comp_live[comp[e.from]] = true;
    std::vector<bool> node_live(g_.configs.size(), false);
    for (size_t v = 0; v < g_.configs.size(); ++v)
      if (comp[v] != -1 && comp_live[comp[v]]) node_live[v] = true;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& e : g_.edges)
        if (allowed(b, e) && !node_live[e.from] && node_live[e.to]) {
          node_live[e.from] = true;
          changed = true;
        }
    }
    // BFS over (node, mask)
    std::map<std::pair<int, size_t>, std::pair<int, size_t>> parent;  // -> (edge, prev mask)
    std::set<std::pair<int, size_t>> seen;
    std::deque<std::pair<int, size_t>> q;
    q.push_back({g_.root, init_mask});
    seen.insert({g_.root, init_mask});
    std::optional<std::pair<int, size_t>> goal;
    if (init_mask == full && node_live[g_.root])
      goal = std::make_pair(g_.root, init_mask);
    while (!q.empty() && !goal) {
      auto [v, m] = q.front();
      q.pop_front();
      for (int ei : g_.out[v]) {
        const Edge& e = g_.edges[ei];
        if (!allowed(b, e)) continue;
        size_t m2 = m | hitmask(b, e.elem);
        auto key = std::make_pair(e.to, m2);
        if (!seen.insert(key).second) continue;
        parent[key] = {ei, m};
        if (m2 == full && node_live[e.to]) {
          goal = key;
          break;
        }
        q.push_back(key);
      }
    }
    if (!goal) return std::nullopt;
    CertPath cert;
    // reconstruct stem prefix through the (node, mask) layers
    {
      std::vector<int> rev;
      auto cur = *goal;
      while (parent.count(cur)) {
        auto [ei, pm] = parent[cur];
        rev.push_back(ei);
        cur = {g_.edges[ei].from, pm};
      }
      std::reverse(rev.begin(), rev.end());
      cert.stem_edges = std::move(rev);
    }
    int at = goal->first;
    // extend the stem to a live component, then loop around it
    auto to_live_comp = path_to(b, at, [&](int v2) {
      return comp[v2] != -1 && comp_live[comp[v2]];
    });
    if (!to_live_comp) return std::nullopt;
    for (int ei : *to_live_comp) {
      cert.stem_edges.push_back(ei);
      at = g_.edges[ei].to;
    }
    int c = comp[at];
    int consume_edge = -1;
    for (size_t ei = 0; ei < g_.edges.size() && consume_edge == -1; ++ei) {
      const Edge& e = g_.edges[ei];
      if (allowed(b, e) && comp[e.from] == c && comp[e.to] == c && e.consumed > 0)
        consume_edge = static_cast<int>(ei);
    }
    cert.loop_edges = cover_walk(b, comp, at, {consume_edge});
    if (cert.loop_edges.empty()) return std::nullopt;
    return cert;
  }
};

}  // namespace engine
}  // namespace omega
