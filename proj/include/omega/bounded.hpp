#pragma once

#include <climits>
#include <cstdint>

#include "omega/engine.hpp"

namespace omega {
namespace drivers {

using engine::EStep;
using engine::phase_of;

struct FsaDriver {
  using Config = FsaConfig;
  const OmegaFSA& dev;
  const LassoWord& word;

  Config initial() const { return initial_config(dev); }
  std::vector<EStep<Config>> successors(const Config& c) const {
    std::vector<EStep<Config>> out;
    for (auto& s : step(dev, c, word))
      out.push_back({std::move(s.config), s.consumed, s.state_entered, s.label});
    return out;
  }
  std::string key(const Config& c) const {
    return c.state + "|" + std::to_string(phase_of(word, c.offset));
  }
  SymSet initial_elems() const { return {dev.start}; }
  bool search_pruned() const { return false; }

  struct Stats {};
  Stats stats_init() const { return {}; }
  void stats_absorb(Stats&, const Config&) const {}
  bool pump_class(const Config& a, const Config& b) const {
    return a.state == b.state &&
           phase_of(word, a.offset) == phase_of(word, b.offset);
  }
  std::optional<std::string> pumpable(const Config&, const Config&,
                                      const Stats&) const {
    return "state and phase repeat";
  }
};

struct PdaDriver {
  using Config = PdaConfig;
  const OmegaPDA& dev;
  const LassoWord& word;

  Config initial() const { return initial_config(dev); }
  std::vector<EStep<Config>> successors(const Config& c) const {
    std::vector<EStep<Config>> out;
    for (auto& s : step(dev, c, word))
      out.push_back({std::move(s.config), s.consumed, s.state_entered, s.label});
    return out;
  }
  std::string key(const Config& c) const {
    return c.state + "|" + join(c.stack, " ") + "|" +
           std::to_string(phase_of(word, c.offset));
  }
  SymSet initial_elems() const { return {dev.start}; }
  bool search_pruned() const { return false; }

  struct Stats {
    size_t min_preserved = SIZE_MAX;  // stack depth untouched so far
  };
  Stats stats_init() const { return {}; }
  void stats_absorb(Stats& st, const Config& c) const {
    if (!c.stack.empty())
      st.min_preserved = std::min(st.min_preserved, c.stack.size() - 1);
  }
  bool pump_class(const Config& a, const Config& b) const {
    return a.state == b.state &&
           phase_of(word, a.offset) == phase_of(word, b.offset);
  }
  // Loop maps (q, gamma delta) to (q, gamma eta delta): delta untouched and
  // the old top segment reproduced on top.
  std::optional<std::string> pumpable(const Config& a, const Config& b,
                                      const Stats& st) const {
    if (b.stack.size() < a.stack.size()) return std::nullopt;
    size_t m = std::min(st.min_preserved, a.stack.size());
    size_t top = a.stack.size() - m;
    for (size_t i = 0; i < top; ++i)
      if (a.stack[i] != b.stack[i]) return std::nullopt;
    for (size_t i = 0; i < m; ++i)
      if (a.stack[a.stack.size() - 1 - i] != b.stack[b.stack.size() - 1 - i])
        return std::nullopt;
    return "stack loop preserves suffix of depth " + std::to_string(m) +
           ", grows by " + std::to_string(b.stack.size() - a.stack.size());
  }
};

struct GramConfig {
  Word form;  // sentential form after the emitted prefix
  long offset = 0;
};

struct GrammarDriver {
  using Config = GramConfig;
  const OmegaGrammar& dev;
  const LassoWord& word;
  Pi policy;

  Config initial() const { return {{dev.start}, 0}; }

  std::vector<EStep<Config>> successors(const Config& c) const {
    std::vector<EStep<Config>> out;
    auto lm = leftmost_nonterminal(dev, c.form);
    if (!lm) return out;  // all-terminal forms were stripped: dead
    for (const auto& p : dev.productions) {
      std::vector<size_t> positions;
      if (policy == Pi::leftmost) {
        if (lhs_matches(p, c.form, *lm)) positions.push_back(*lm);
      } else {
        for (size_t pos = 0; pos + p.lhs.size() <= c.form.size(); ++pos)
          if (lhs_matches(p, c.form, pos)) positions.push_back(pos);
      }
      for (size_t pos : positions) {
        Word next;
        next.reserve(c.form.size() - p.lhs.size() + p.rhs.size());
        next.insert(next.end(), c.form.begin(), c.form.begin() + pos);
        next.insert(next.end(), p.rhs.begin(), p.rhs.end());
        next.insert(next.end(), c.form.begin() + pos + p.lhs.size(),
                    c.form.end());
        // strip the emitted terminal prefix against the word
        long off = c.offset;
        size_t k = 0;
        bool ok = true;
        while (k < next.size() && dev.is_terminal(next[k])) {
          if (next[k] != word.at(static_cast<size_t>(off))) {
            ok = false;
            break;
          }
          ++k;
          ++off;
        }
        if (!ok) continue;                 // emitted prefix mismatch
        if (k == next.size()) continue;    // derivation terminated: finite
        Word rest(next.begin() + k, next.end());
        Sym elem = dev.repetition == RepetitionKind::production ? p.label
                                                                : p.lhs[0];
        out.push_back({{std::move(rest), off}, static_cast<int>(off - c.offset),
                       elem, p.label + "@" + std::to_string(pos)});
      }
    }
    return out;
  }

  std::string key(const Config& c) const {
    return join(c.form, " ") + "|" + std::to_string(phase_of(word, c.offset));
  }
  SymSet initial_elems() const { return {}; }
  bool search_pruned() const { return false; }

  struct Stats {};
  Stats stats_init() const { return {}; }
  void stats_absorb(Stats&, const Config&) const {}
  bool pump_class(const Config& a, const Config& b) const {
    return phase_of(word, a.offset) == phase_of(word, b.offset);
  }
  // Loop maps form phi to phi eta; replaying the recorded positions from
  // phi eta repeats the segment verbatim.
  std::optional<std::string> pumpable(const Config& a, const Config& b,
                                      const Stats&) const {
    if (b.form.size() < a.form.size()) return std::nullopt;
    for (size_t i = 0; i < a.form.size(); ++i)
      if (a.form[i] != b.form[i]) return std::nullopt;
    return "form loop extends by " +
           std::to_string(b.form.size() - a.form.size()) + " symbols";
  }
};

struct TmDriver {
  using Config = TmConfig;
  const OmegaTM& dev;
  const LassoWord& word;
  int oscillation_threshold;
  mutable bool pruned_ = false;

  Config initial() const { return initial_config(dev); }
  std::vector<EStep<Config>> successors(const Config& c) const {
    std::vector<EStep<Config>> out;
    for (auto& s : step(dev, c, word, oscillation_threshold, &pruned_))
      out.push_back({std::move(s.config), s.consumed, s.state_entered, s.label});
    return out;
  }
  std::string key(const Config& c) const {
    std::string k = c.state + "|" + std::to_string(c.scanned_frontier);
    for (size_t j = 0; j < c.tapes.size(); ++j) {
      k += "|h" + std::to_string(c.heads[j]) + ":";
      for (const auto& [pos, sym] : c.tapes[j].cells)
        k += std::to_string(pos) + "=" + sym + ",";
    }
    return k;
  }
  SymSet initial_elems() const { return {dev.start}; }
  bool search_pruned() const { return pruned_; }

  struct Stats {
    std::vector<long> min_heads;
  };
  Stats stats_init() const {
    return {std::vector<long>(static_cast<size_t>(dev.tapes), LONG_MAX)};
  }
  void stats_absorb(Stats& st, const Config& c) const {
    for (size_t j = 0; j < c.heads.size(); ++j)
      st.min_heads[j] = std::min(st.min_heads[j], c.heads[j]);
  }
  bool pump_class(const Config& a, const Config& b) const {
    return a.state == b.state &&
           phase_of(word, a.scanned_frontier) == phase_of(word, b.scanned_frontier);
  }

  Sym cell_value(const Config& c, size_t j, long pos) const {
    auto it = c.tapes[j].cells.find(pos);
    if (it != c.tapes[j].cells.end()) return it->second;
    if (j == 0) return word.at(static_cast<size_t>(pos - 1));
    return dev.blank ? *dev.blank : Sym("_");
  }

  // Loop end equals loop start translated tape-wise; the first tape must
  // strictly advance, making the pumped run complete and non-oscillating.
  std::optional<std::string> pumpable(const Config& a, const Config& b,
                                      const Stats& st) const {
    long d0 = b.scanned_frontier - a.scanned_frontier;
    if (d0 < 1) return std::nullopt;
    if (b.heads[0] - a.heads[0] != d0) return std::nullopt;
    size_t mt = a.heads.size();
    std::vector<long> shift(mt);
    shift[0] = d0;
    for (size_t j = 1; j < mt; ++j) {
      shift[j] = b.heads[j] - a.heads[j];
      if (shift[j] < 0) return std::nullopt;
    }
    long vlen = static_cast<long>(word.loop.size());
    if (d0 % vlen != 0) return std::nullopt;
    for (size_t j = 0; j < mt; ++j) {
      long lo = st.min_heads[j] == LONG_MAX ? a.heads[j] : st.min_heads[j];
      long hi = lo;
      if (!a.tapes[j].cells.empty())
        hi = std::max(hi, a.tapes[j].cells.rbegin()->first);
      if (!b.tapes[j].cells.empty())
        hi = std::max(hi, b.tapes[j].cells.rbegin()->first - shift[j]);
      if (j == 0)
        hi = std::max(hi, static_cast<long>(word.stem.size()) + vlen +
                              b.scanned_frontier);
      for (long p = lo; p <= hi; ++p)
        if (cell_value(a, j, p) != cell_value(b, j, p + shift[j]))
          return std::nullopt;
    }
    std::string w = "tape shifts";
    for (size_t j = 0; j < mt; ++j) w += " " + std::to_string(shift[j]);
    return w;
  }
};

}  // namespace drivers

// ---------------------------------------------------------------------------
// bounded_member and certificate construction
// ---------------------------------------------------------------------------

namespace detail {

template <typename Driver>
Certificate make_certificate(const Driver& drv,
                             const engine::Graph<typename Driver::Config>& g,
                             const engine::CertPath& cp,
                             const std::string& device_name,
                             const LassoWord& word, const AcceptanceMode& mode,
                             const std::string& witness) {
  Certificate cert;
  cert.device = device_name;
  cert.word = word;
  cert.mode = mode;
  cert.growth_witness = witness;
  std::vector<Sym> prefix_elems, cycle_elems;
  for (const auto& x : drv.initial_elems()) prefix_elems.push_back(x);
  for (int ei : cp.stem_edges) {
    const auto& e = g.edges[ei];
    cert.stem.push_back({e.tag, e.elem, e.consumed});
    prefix_elems.push_back(e.elem);
  }
  for (int ei : cp.loop_edges) {
    const auto& e = g.edges[ei];
    cert.loop.push_back({e.tag, e.elem, e.consumed});
    cycle_elems.push_back(e.elem);
    cert.loop_consumption += e.consumed;
  }
  cert.profile = profile_of(prefix_elems, cycle_elems);
  return cert;
}

// Scan BFS-tree ancestor pairs for pumpable growing loops.
template <typename Driver>
std::optional<Certificate> pump_scan(
    const Driver& drv, const engine::Graph<typename Driver::Config>& g,
    const std::string& device_name, const LassoWord& word,
    const AcceptanceMode& mode, const Family& family) {
  std::vector<Sym> init_elems;
  for (const auto& x : drv.initial_elems()) init_elems.push_back(x);
  for (size_t b = 1; b < g.configs.size(); ++b) {
    // path root -> b as node and edge lists
    std::vector<int> nodes, edges;
    for (int cur = static_cast<int>(b); cur != -1; cur = g.parent[cur]) {
      nodes.push_back(cur);
      if (g.via[cur] != -1) edges.push_back(g.via[cur]);
    }
    std::reverse(nodes.begin(), nodes.end());
    std::reverse(edges.begin(), edges.end());
    size_t d = edges.size();
    if (d == 0) continue;
    std::map<Sym, int> stem_counts;
    for (size_t i = 0; i + 1 < d; ++i) stem_counts[g.edges[edges[i]].elem]++;
    // i descends: loop = edges[i..d), stem = edges[0..i)
    typename Driver::Stats stats = drv.stats_init();
    SymSet loop_elems;
    long loop_consumed = 0;
    for (size_t i = d; i-- > 0;) {
      const auto& e = g.edges[edges[i]];
      if (i + 1 < d) {
        auto it = stem_counts.find(e.elem);
        if (it != stem_counts.end() && --it->second == 0)
          stem_counts.erase(it);
      }
      drv.stats_absorb(stats, g.configs[nodes[i]]);
      loop_elems.insert(e.elem);
      loop_consumed += e.consumed;
      if (loop_consumed < 1) continue;
      const auto& ca = g.configs[nodes[i]];
      const auto& cb = g.configs[b];
      if (!drv.pump_class(ca, cb)) continue;
      auto witness = drv.pumpable(ca, cb, stats);
      if (!witness) continue;
      std::vector<Sym> prefix = init_elems;
      for (const auto& [x, n2] : stem_counts) prefix.push_back(x);
      std::vector<Sym> cycle(loop_elems.begin(), loop_elems.end());
      if (!satisfies(mode, profile_of(prefix, cycle), family)) continue;
      engine::CertPath cp;
      cp.stem_edges.assign(edges.begin(), edges.begin() + i);
      cp.loop_edges.assign(edges.begin() + i, edges.end());
      return make_certificate(drv, g, cp, device_name, word, mode, *witness);
    }
  }
  return std::nullopt;
}

template <typename Driver>
Verdict run_bounded(Driver& drv, const std::string& device_name,
                    const LassoWord& word, const AcceptanceMode& mode,
                    const Family& family, long bound) {
  if (bound <= 0) throw ValidationError("nonpositive bound");
  auto g = engine::build_graph(drv, bound);
  engine::GraphDecider<typename Driver::Config> decider(g, mode, family,
                                                        drv.initial_elems());
  if (auto cp = decider.find()) {
    auto cert = make_certificate(drv, g, *cp, device_name, word, mode,
                                 "configuration repeat");
    return Verdict::accepted(std::move(cert));
  }
  if (g.closed)
    return Verdict::rejected("search space closed: " +
                             std::to_string(g.configs.size()) +
                             " configurations, no accepting lasso");
  if (auto cert = pump_scan(drv, g, device_name, word, mode, family))
    return Verdict::accepted(std::move(*cert));
  std::string why = drv.search_pruned()
                        ? "bound hit with oscillation-pruned branches"
                        : "bound of " + std::to_string(bound) +
                              " expansions exhausted";
  return Verdict::unknown(why);
}

inline void check_word_alphabet(const Alphabet& a, const LassoWord& w) {
  for (const auto& s : w.stem)
    if (!a.contains(s))
      throw ValidationError("lasso symbol not in device alphabet: " + s);
  for (const auto& s : w.loop)
    if (!a.contains(s))
      throw ValidationError("lasso symbol not in device alphabet: " + s);
}

}  // namespace detail

inline Verdict bounded_member(const Device& dev, const LassoWord& word,
                              const AcceptanceMode& mode,
                              const SearchOptions& opts = {}) {
  if (opts.bound <= 0) throw ValidationError("nonpositive bound");
  if (auto* a = std::get_if<OmegaFSA>(&dev)) {
    if (mode.pi != Pi::none)
      throw ValidationError("automata take no derivation policy");
    detail::check_word_alphabet(a->alphabet, word);
    drivers::FsaDriver drv{*a, word};
    return detail::run_bounded(drv, a->name, word, mode, a->family, opts.bound);
  }
  if (auto* d = std::get_if<OmegaPDA>(&dev)) {
    if (mode.pi != Pi::none)
      throw ValidationError("automata take no derivation policy");
    detail::check_word_alphabet(d->alphabet, word);
    drivers::PdaDriver drv{*d, word};
    return detail::run_bounded(drv, d->name, word, mode, d->family, opts.bound);
  }
  if (auto* m = std::get_if<OmegaTM>(&dev)) {
    if (mode.pi != Pi::none)
      throw ValidationError("automata take no derivation policy");
    detail::check_word_alphabet(m->alphabet, word);
    drivers::TmDriver drv{*m, word, opts.oscillation_threshold};
    return detail::run_bounded(drv, m->name, word, mode, m->family, opts.bound);
  }
  const auto& gr = std::get<OmegaGrammar>(dev);
  if (mode.pi == Pi::none)
    throw ValidationError("grammar membership requires a derivation policy");
  Alphabet ta;
  ta.symbols = gr.terminals;
  detail::check_word_alphabet(ta, word);
  drivers::GrammarDriver drv{gr, word, mode.pi};
  return detail::run_bounded(drv, gr.name, word, mode, gr.family, opts.bound);
}

// ---------------------------------------------------------------------------
// certificate_check: independent replay with the device step functions.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Driver>
bool check_certificate_with(const Driver& drv, const Certificate& cert,
                            const Family& family, std::string* log) {
  auto fail = [&](const std::string& why) {
    if (log) *log += why + "\n";
    return false;
  };
  typename Driver::Config c = drv.initial();
  std::vector<Sym> prefix_elems, cycle_elems;
  for (const auto& x : drv.initial_elems()) prefix_elems.push_back(x);
  auto apply = [&](const StepRecord& r, typename Driver::Config& cur,
                   bool absorb, typename Driver::Stats* st) -> bool {
    if (absorb && st) drv.stats_absorb(*st, cur);
    for (auto& s : drv.successors(cur)) {
      if (s.tag != r.tag) continue;
      if (s.elem != r.elem) return fail("element mismatch at " + r.tag);
      if (s.consumed != r.consumed) return fail("consumption mismatch at " + r.tag);
      cur = std::move(s.config);
      return true;
    }
    return fail("no successor matches step " + r.tag);
  };
  for (const auto& r : cert.stem) {
    if (!apply(r, c, false, nullptr)) return false;
    prefix_elems.push_back(r.elem);
  }
  typename Driver::Config loop_start = c;
  typename Driver::Stats stats = drv.stats_init();
  long consumed = 0;
  for (const auto& r : cert.loop) {
    if (!apply(r, c, true, &stats)) return false;
    cycle_elems.push_back(r.elem);
    consumed += r.consumed;
  }
  if (consumed != cert.loop_consumption)
    return fail("loop consumption disagrees with certificate");
  if (consumed < 1) return fail("loop consumes no input");
  if (!drv.pump_class(loop_start, c))
    return fail("loop does not return to the same state/phase class");
  auto witness = drv.pumpable(loop_start, c, stats);
  if (!witness) return fail("growth witness check failed");
  OccurrenceProfile p = profile_of(prefix_elems, cycle_elems);
  if (p.ranSet != cert.profile.ranSet || p.infSet != cert.profile.infSet)
    return fail("stored profile does not match replayed profile");
  if (!satisfies(cert.mode, p, family)) return fail("profile fails the mode");
  return true;
}

}  // namespace detail

inline bool certificate_check(const Device& dev, const Certificate& cert,
                              std::string* log = nullptr) {
  try {
    if (auto* a = std::get_if<OmegaFSA>(&dev)) {
      drivers::FsaDriver drv{*a, cert.word};
      return detail::check_certificate_with(drv, cert, a->family, log);
    }
    if (auto* d = std::get_if<OmegaPDA>(&dev)) {
      drivers::PdaDriver drv{*d, cert.word};
      return detail::check_certificate_with(drv, cert, d->family, log);
    }
    if (auto* m = std::get_if<OmegaTM>(&dev)) {
      drivers::TmDriver drv{*m, cert.word, 1 << 20};
      return detail::check_certificate_with(drv, cert, m->family, log);
    }
    const auto& gr = std::get<OmegaGrammar>(dev);
    drivers::GrammarDriver drv{gr, cert.word, cert.mode.pi};
    return detail::check_certificate_with(drv, cert, gr.family, log);
  } catch (const std::exception& e) {
    if (log) *log += std::string("replay error: ") + e.what() + "\n";
    return false;
  }
}

}  // namespace omega
