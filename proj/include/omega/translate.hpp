#pragma once

#include "omega/analysis.hpp"
#include "omega/automata.hpp"
#include "omega/forms.hpp"
#include "omega/grammar.hpp"

namespace omega {

namespace detail {

// Insert fixed extra elements into every member of a family. Exact for all
// three representations; mapped-eq blocks gain one forced tag per element.
inline Family family_require(const Family& f, const SymSet& extra) {
  if (extra.empty()) return f;
  Family out;
  out.universe = set_union(f.universe, extra);
  for (const auto& b : f.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      Family::Explicit e2;
      for (const auto& m : e->members) e2.members.push_back(set_union(m, extra));
      out.blocks.push_back(std::move(e2));
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      SymSet pad = iv->pad;
      for (const auto& x : extra) pad.erase(x);
      out.blocks.push_back(
          Family::Interval{set_union(iv->base, extra), pad, iv->nonempty_pad});
    } else {
      auto m = std::get<Family::MappedEq>(b);
      for (const auto& x : extra) m.img[x] = SymSet{"#req:" + x};
      for (auto& t : m.targets)
        for (const auto& x : extra) t.insert("#req:" + x);
      out.blocks.push_back(std::move(m));
    }
  }
  return out;
}

inline void set_universe(Family& f, SymSet u) { f.universe = std::move(u); }

}  // namespace detail

// ---------------------------------------------------------------------------
// RLG -> FSA. One state per short production; reading a from q_k is the
// simulation of p_k emitting a.
// ---------------------------------------------------------------------------

inline OmegaFSA rlg_to_fsa(const OmegaGrammar& g_in, const AcceptanceMode& mode) {
  if (classify(g_in).tag != GrammarClass::RLG)
    throw ValidationError("rlg_to_fsa requires a right linear grammar");
  OmegaGrammar g = is_short_rlg(g_in) ? g_in : rlg_short_form(g_in);
  OmegaFSA a;
  a.name = g.name + "_fsa";
  a.alphabet.symbols = g.terminals;
  a.start = "q0";
  a.states.push_back("q0");
  std::map<Sym, Sym> state_of;  // production label -> state
  for (const auto& p : g.productions) {
    Sym q = "q." + p.label;
    state_of[p.label] = q;
    a.states.push_back(q);
  }
  auto heads = [&](const Sym& nt) {
    std::vector<Sym> out;
    for (const auto& p : g.productions)
      if (p.lhs[0] == nt) out.push_back(state_of[p.label]);
    return out;
  };
  for (const auto& q : heads(g.start))
    a.transitions.push_back({"q0", std::nullopt, q});
  for (const auto& p : g.productions) {
    std::optional<Sym> emit;
    std::optional<Sym> next_nt;
    for (const auto& s : p.rhs) {
      if (g.is_terminal(s))
        emit = s;
      else
        next_nt = s;
    }
    if (!next_nt) continue;  // terminal-only production ends the derivation
    for (const auto& q : heads(*next_nt))
      a.transitions.push_back({state_of[p.label], emit, q});
  }
  Family fam = g.family.relabel(state_of);
  if (mode.sigma == Sigma::ran &&
      (mode.rho == Rho::subseteq || mode.rho == Rho::eq))
    fam = detail::family_require(fam, {"q0"});
  detail::set_universe(fam, SymSet(a.states.begin(), a.states.end()));
  a.family = std::move(fam);
  return a;
}

// ---------------------------------------------------------------------------
// FSA -> RLG. One nonterminal per state, one production per transition.
// ---------------------------------------------------------------------------

inline OmegaGrammar fsa_to_rlg(const OmegaFSA& a, const AcceptanceMode& mode) {
  OmegaGrammar g;
  g.name = a.name + "_rlg";
  g.terminals = a.alphabet.symbols;
  bool clash = false;
  for (const auto& q : a.states)
    if (a.alphabet.contains(q)) clash = true;
  auto nt = [&](const Sym& q) { return clash ? "N_" + q : q; };
  for (const auto& q : a.states) g.nonterminals.push_back(nt(q));
  g.start = nt(a.start);
  g.repetition = RepetitionKind::production;
  g.class_tag = GrammarClass::RLG;
  std::map<Sym, std::vector<Sym>> per_state;  // q_i -> labels of P_i
  for (const auto& q : a.states) per_state[q] = {};
  for (const auto& t : a.transitions) {
    Sym label = t.from + "-" + (t.symbol ? *t.symbol : "eps") + "-" + t.to;
    if (g.find_production(label)) continue;  // duplicate transition
    Word rhs;
    if (t.symbol) rhs.push_back(*t.symbol);
    rhs.push_back(nt(t.to));
    g.productions.push_back({label, {nt(t.from)}, rhs});
    per_state[t.from].push_back(label);
  }
  SymSet universe;
  for (const auto& p : g.productions) universe.insert(p.label);
  if (mode.rho == Rho::eq) {
    // { H | sources(H) = F_k for some k }
    std::map<Sym, SymSet> img;
    for (const auto& [q, labels] : per_state)
      for (const auto& l : labels) img[l] = {q};
    g.family = Family::empty(universe);
    g.family.add_mapped_eq(std::move(img),
                           expand_family(a.family));
  } else {
    g.family = detail::map_through_groups(a.family, per_state);
    detail::set_universe(g.family, universe);
  }
  return g;
}

// ---------------------------------------------------------------------------
// CFG -> PDA (leftmost). Match-pop / guess / expand construction.
// ---------------------------------------------------------------------------

inline OmegaPDA cfg_to_pda(const OmegaGrammar& g, const AcceptanceMode& mode) {
  auto c = classify(g);
  if (c.tag != GrammarClass::CFG && c.tag != GrammarClass::RLG)
    throw ValidationError("cfg_to_pda requires a context-free grammar");
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("cfg_to_pda requires production repetition sets");
  if (mode.pi == Pi::normal)
    throw UsageError(
        "cfg_to_pda simulates leftmost derivations; use the normal-derivation "
        "construction (thm7.2) instead");
  OmegaPDA d;
  d.name = g.name + "_pda";
  d.alphabet.symbols = g.terminals;
  d.stack_alphabet = g.nonterminals;
  for (const auto& t : g.terminals) d.stack_alphabet.push_back(t);
  d.start_stack = g.start;
  d.start = "q0";
  d.states.push_back("q0");
  std::map<Sym, Sym> state_of;
  for (const auto& p : g.productions) {
    Sym q = "q." + p.label;
    state_of[p.label] = q;
    d.states.push_back(q);
  }
  for (const auto& a : g.terminals)
    d.transitions.push_back({"q0", a, a, "q0", {}});
  for (const auto& p : g.productions) {
    d.transitions.push_back({"q0", std::nullopt, p.lhs[0], state_of[p.label],
                             {p.lhs[0]}});
    d.transitions.push_back(
        {state_of[p.label], std::nullopt, p.lhs[0], "q0", p.rhs});
  }
  Family fam = g.family.relabel(state_of);
  if (mode.rho != Rho::cap) fam = detail::family_require(fam, {"q0"});
  detail::set_universe(fam, SymSet(d.states.begin(), d.states.end()));
  d.family = std::move(fam);
  return d;
}

// ---------------------------------------------------------------------------
// PDA -> CFG. Triple construction [q, B, r].
// ---------------------------------------------------------------------------

inline OmegaGrammar pda_to_cfg(const OmegaPDA& d, const AcceptanceMode& mode) {
  OmegaGrammar g;
  g.name = d.name + "_cfg";
  g.terminals = d.alphabet.symbols;
  g.start = "S";
  g.repetition = RepetitionKind::production;
  g.class_tag = GrammarClass::CFG;
  auto triple = [&](const Sym& q, const Sym& b, const Sym& r) {
    return "[" + q + "," + b + "," + r + "]";
  };
  g.nonterminals.push_back("S");
  for (const auto& q : d.states)
    for (const auto& b : d.stack_alphabet)
      for (const auto& r : d.states)
        g.nonterminals.push_back(triple(q, b, r));
  std::map<Sym, std::vector<Sym>> per_state;  // q_i -> labels of P_i
  for (const auto& q : d.states) per_state[q] = {};
  SymSet ps_labels;
  for (const auto& q : d.states) {
    Sym label = "s." + q;
    g.productions.push_back({label, {"S"}, {triple(d.start, d.start_stack, q)}});
    ps_labels.insert(label);
  }
  for (size_t k = 0; k < d.transitions.size(); ++k) {
    const auto& t = d.transitions[k];
    size_t m = t.push.size();
    // enumerate intermediate states q_{j2}..q_{jm} and the final q_j
    size_t choices = m == 0 ? 1 : 1;
    for (size_t i = 0; i + 1 < m; ++i) choices *= d.states.size();
    if (m > 0) choices *= d.states.size();
    std::vector<size_t> idx(m, 0);
    for (size_t c = 0; c < choices; ++c) {
      // decode choice c into m state picks (q_{j2},...,q_{jm},q_j)
      std::vector<Sym> picks;
      size_t rest = c;
      for (size_t i = 0; i < m; ++i) {
        picks.push_back(d.states[rest % d.states.size()]);
        rest /= d.states.size();
      }
      Word rhs;
      if (t.symbol) rhs.push_back(*t.symbol);
      Sym target;  // the r of the produced triple
      if (m == 0) {
        target = t.to;
      } else {
        Sym cur = t.to;
        for (size_t i = 0; i < m; ++i) {
          Sym nxt = picks[i];
          rhs.push_back(triple(cur, t.push[i], nxt));
          cur = nxt;
        }
        target = picks[m - 1];
      }
      Sym label = "t" + std::to_string(k);
      for (const auto& p2 : picks) label += "." + p2;
      g.productions.push_back({label, {triple(t.from, t.stack_top, target)}, rhs});
      per_state[t.from].push_back(label);
      if (m == 0) break;  // no free choices
    }
  }
  SymSet universe;
  for (const auto& p : g.productions) universe.insert(p.label);
  switch (mode.rho) {
    case Rho::cap:
      g.family = detail::map_through_groups(d.family, per_state);
      break;
    case Rho::subseteq:
      if (mode.sigma == Sigma::ran) {
        g.family = detail::map_through_groups(d.family, per_state);
        g.family = detail::family_require(g.family, ps_labels);
      } else {
        g.family = detail::map_through_groups(d.family, per_state);
      }
      break;
    case Rho::eq: {
      std::map<Sym, SymSet> img;
      for (const auto& l : ps_labels) img[l] = {d.start};
      for (const auto& [q, labels] : per_state)
        for (const auto& l : labels) img[l] = {q};
      g.family = Family::empty(universe);
      g.family.add_mapped_eq(std::move(img), expand_family(d.family));
      break;
    }
  }
  detail::set_universe(g.family, universe);
  return g;
}

// ---------------------------------------------------------------------------
// PSG -> PDA (leftmost). Prefix-popping of multi-symbol left-hand sides.
// ---------------------------------------------------------------------------

inline OmegaPDA psg_to_pda_leftmost(const OmegaGrammar& g,
                                    const AcceptanceMode& mode) {
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("psg_to_pda_leftmost requires production repetition sets");
  if (mode.pi == Pi::normal)
    throw UsageError("psg_to_pda_leftmost simulates leftmost derivations");
  OmegaPDA d;
  d.name = g.name + "_pda";
  d.alphabet.symbols = g.terminals;
  d.stack_alphabet = g.nonterminals;
  for (const auto& t : g.terminals) d.stack_alphabet.push_back(t);
  Sym z0 = detail::fresh_symbol("Z0", SymSet(d.stack_alphabet.begin(),
                                             d.stack_alphabet.end()));
  d.stack_alphabet.push_back(z0);
  d.start_stack = z0;
  d.start = "qs";
  d.states = {"qs", "q"};
  auto prefix_state = [&](const Production& p, size_t len) {
    return "q." + p.label + "." + std::to_string(len);
  };
  std::map<Sym, std::vector<Sym>> q_of;    // label -> its prefix states Q_i
  std::map<Sym, Sym> full_state;           // label -> full-lhs state
  for (const auto& p : g.productions) {
    for (size_t k = 1; k <= p.lhs.size(); ++k) {
      d.states.push_back(prefix_state(p, k));
      q_of[p.label].push_back(prefix_state(p, k));
    }
    full_state[p.label] = prefix_state(p, p.lhs.size());
  }
  d.transitions.push_back({"qs", std::nullopt, z0, "q", {g.start, z0}});
  for (const auto& a : g.terminals) d.transitions.push_back({"q", a, a, "q", {}});
  for (const auto& p : g.productions) {
    d.transitions.push_back(
        {"q", std::nullopt, p.lhs[0], prefix_state(p, 1), {}});
    for (size_t k = 1; k < p.lhs.size(); ++k)
      d.transitions.push_back({prefix_state(p, k), std::nullopt, p.lhs[k],
                               prefix_state(p, k + 1),
                               {}});
    for (const auto& x : d.stack_alphabet) {
      Word push = p.rhs;
      push.push_back(x);
      d.transitions.push_back(
          {full_state[p.label], std::nullopt, x, "q", push});
    }
  }
  Family fam;
  SymSet universe(d.states.begin(), d.states.end());
  if (mode.rho == Rho::cap) {
    fam = g.family.relabel(full_state);
  } else {
    fam = detail::map_through_groups(g.family, q_of);
    SymSet extra{"q"};
    if (mode.sigma == Sigma::ran) extra.insert("qs");
    fam = detail::family_require(fam, extra);
  }
  detail::set_universe(fam, universe);
  d.family = std::move(fam);
  return d;
}


// ---------------------------------------------------------------------------
// CFG under normal derivations -> PDA, by acceptance mode. The unreached
// parts of sentential forms are discarded nondeterministically, with their
// production contributions accounted through SP / TR / TR1.
// ---------------------------------------------------------------------------

struct NlPdaOptions {
  size_t f_cap = 4;          // |F| bound for the subset-indexed cases
  size_t state_cap = 20000;  // reachable-state budget for case 5
  AnalysisCaps caps;
};

namespace detail {

inline Sym enc_set(const SymSet& s) {
  if (s.empty()) return "-";
  return join(std::vector<std::string>(s.begin(), s.end()), "+");
}
inline Sym enc_family(const std::set<SymSet>& h) {
  if (h.empty()) return "-";
  std::vector<std::string> parts;
  for (const auto& s : h) parts.push_back(enc_set(s));
  return join(parts, "|");
}

struct NlMachine {
  std::vector<Sym> states;
  Sym start;
  std::vector<OmegaPDA::Trans> transitions;
  std::vector<Family::Block> family_blocks;
  SymSet extra_stack;  // marker symbols used by this machine
};

// splits of a P1 production rhs into non-empty gamma1, gamma2
inline std::vector<std::pair<Word, Word>> rhs_splits(const Production& p) {
  std::vector<std::pair<Word, Word>> out;
  for (size_t i = 1; i < p.rhs.size(); ++i)
    out.push_back({Word(p.rhs.begin(), p.rhs.begin() + i),
                   Word(p.rhs.begin() + i, p.rhs.end())});
  return out;
}

inline NlMachine nl_case_subseteq(const OmegaGrammar& sep, const SymSet& f) {
  NlMachine m;
  m.start = "q";
  m.states.push_back("q");
  std::map<Sym, Sym> state_of;
  for (const auto& p : sep.productions) {
    Sym q = "q." + p.label;
    state_of[p.label] = q;
    m.states.push_back(q);
  }
  for (const auto& a : sep.terminals)
    m.transitions.push_back({"q", a, a, "q", {}});
  for (const auto& p : sep.productions) {
    m.transitions.push_back({"q", std::nullopt, p.lhs[0], state_of[p.label],
                             {p.lhs[0]}});
    m.transitions.push_back(
        {state_of[p.label], std::nullopt, p.lhs[0], "q", p.rhs});
  }
  SymSet member{"q"};
  for (const auto& l : f) member.insert(state_of.at(l));
  m.family_blocks.push_back(Family::Explicit{{member}});
  return m;
}

inline NlMachine nl_case_cap(const OmegaGrammar& sep, const SymSet& f,
                             GrammarAnalysis& an, bool inf_mode, const Sym& z) {
  NlMachine m;
  m.extra_stack.insert(z);
  int flags = inf_mode ? 3 : 2;
  auto st = [&](int i) { return "c" + std::to_string(i); };
  for (int i = 0; i < flags; ++i) m.states.push_back(st(i));
  m.start = st(0);
  auto fl = [&](int i, const Sym& label) {
    if (inf_mode) {
      if (i == 2) return 2;
      if (i == 1) return f.count(label) ? 1 : 0;  // value 1 lasts one step
      return f.count(label) ? 1 : 0;
    }
    if (i == 1) return 1;
    return f.count(label) ? 1 : 0;
  };
  for (int i = 0; i < flags; ++i) {
    for (const auto& p : sep.productions) {
      bool p1 = !p.rhs.empty();
      for (const auto& s2 : p.rhs)
        if (!sep.is_nonterminal(s2)) p1 = false;
      if (p1) {
        m.transitions.push_back(
            {st(i), std::nullopt, p.lhs[0], st(fl(i, p.label)), p.rhs});
        for (auto& [g1, g2] : rhs_splits(p)) {
          Word push = g1;
          push.push_back(z);
          if (inf_mode) {
            for (const auto& k : an.SP_string(g2))
              if (intersects(k, f)) {
                m.transitions.push_back({st(i), std::nullopt, p.lhs[0], st(2), push});
                break;
              }
          }
          for (const auto& k : an.TR_string(g2))
            if (intersects(k, f)) {
              m.transitions.push_back({st(i), std::nullopt, p.lhs[0], st(1), push});
              break;
            }
        }
      } else {
        // P2: A -> a with a in T or empty
        std::optional<Sym> a;
        if (!p.rhs.empty()) a = p.rhs[0];
        m.transitions.push_back({st(i), a, p.lhs[0], st(fl(i, p.label)), {}});
      }
    }
  }
  SymSet member{st(1)};
  if (inf_mode) member.insert(st(2));
  m.family_blocks.push_back(Family::Explicit{{member}});
  return m;
}

inline NlMachine nl_case_ran_eq(const OmegaGrammar& sep, const SymSet& f,
                                GrammarAnalysis& an, const Sym& z,
                                const NlPdaOptions& opts) {
  if (f.size() > opts.f_cap)
    throw ResourceError("cfg_nl_to_pda: |F| = " + std::to_string(f.size()) +
                        " exceeds the subset-construction cap of " +
                        std::to_string(opts.f_cap));
  NlMachine m;
  m.extra_stack.insert(z);
  std::vector<SymSet> subsets{{}};
  for (const auto& x : f) {
    std::vector<SymSet> next = subsets;
    for (const auto& s2 : subsets) {
      SymSet t = s2;
      t.insert(x);
      next.push_back(t);
    }
    subsets = std::move(next);
  }
  std::sort(subsets.begin(), subsets.end());
  auto st = [&](const SymSet& h) { return "q0[" + enc_set(h) + "]"; };
  for (const auto& h : subsets) m.states.push_back(st(h));
  m.start = st({});
  for (const auto& h : subsets) {
    for (const auto& p : sep.productions) {
      if (!f.count(p.label)) continue;  // applying outside F blocks
      SymSet h1 = h;
      h1.insert(p.label);
      bool p1 = !p.rhs.empty();
      for (const auto& s2 : p.rhs)
        if (!sep.is_nonterminal(s2)) p1 = false;
      if (p1) {
        m.transitions.push_back({st(h), std::nullopt, p.lhs[0], st(h1), p.rhs});
        for (auto& [g1, g2] : rhs_splits(p)) {
          Word push = g1;
          push.push_back(z);
          for (const auto& k : an.TR1_string(g2, f)) {
            SymSet h2 = h1;
            h2.insert(k.begin(), k.end());
            m.transitions.push_back({st(h), std::nullopt, p.lhs[0], st(h2), push});
          }
        }
      } else {
        std::optional<Sym> a;
        if (!p.rhs.empty()) a = p.rhs[0];
        m.transitions.push_back({st(h), a, p.lhs[0], st(h1), {}});
      }
    }
  }
  SymSet pad;
  for (const auto& h : subsets)
    if (h != f) pad.insert(st(h));
  m.family_blocks.push_back(Family::Interval{{st(f)}, pad, false});
  return m;
}

inline NlMachine nl_case_inf_eq(const OmegaGrammar& sep, const SymSet& f,
                                GrammarAnalysis& an, const Sym& z,
                                const NlPdaOptions& opts) {
  if (f.size() > opts.f_cap)
    throw ResourceError("cfg_nl_to_pda: |F| = " + std::to_string(f.size()) +
                        " exceeds the subset-construction cap of " +
                        std::to_string(opts.f_cap));
  NlMachine m;
  m.extra_stack.insert(z);
  // state encodings
  struct St {
    int kind;                 // 0 = accumulate-possible-unions, 1 = q1, 2 = qbar
    std::set<SymSet> h0;      // kind 0 payload
    SymSet k, h;              // kind 1/2 payload
    bool operator<(const St& o) const {
      return std::tie(kind, h0, k, h) < std::tie(o.kind, o.h0, o.k, o.h);
    }
  };
  auto name = [&](const St& s2) {
    if (s2.kind == 0) return "q0[" + enc_family(s2.h0) + "]";
    if (s2.kind == 1) return "q1[" + enc_set(s2.k) + ";" + enc_set(s2.h) + "]";
    return "qb[" + enc_set(s2.k) + "]";
  };
  std::map<St, Sym> seen;
  std::deque<St> work;
  auto visit = [&](const St& s2) {
    auto it = seen.find(s2);
    if (it != seen.end()) return it->second;
    if (seen.size() >= opts.state_cap)
      throw ResourceError("cfg_nl_to_pda case 5 exceeds the state cap of " +
                          std::to_string(opts.state_cap));
    Sym n = name(s2);
    seen[s2] = n;
    m.states.push_back(n);
    work.push_back(s2);
    return n;
  };
  St init{0, {SymSet{}}, {}, {}};
  m.start = visit(init);
  // classify productions once
  struct PInfo {
    const Production* p;
    bool is_p1;
    std::optional<Sym> a;
  };
  std::vector<PInfo> infos;
  for (const auto& p : sep.productions) {
    bool p1 = !p.rhs.empty();
    for (const auto& s2 : p.rhs)
      if (!sep.is_nonterminal(s2)) p1 = false;
    std::optional<Sym> a;
    if (!p1 && !p.rhs.empty()) a = p.rhs[0];
    infos.push_back({&p, p1, a});
  }
  while (!work.empty()) {
    St s2 = work.front();
    work.pop_front();
    Sym from = seen.at(s2);
    if (s2.kind == 0) {
      for (const auto& pi : infos) {
        const auto& p = *pi.p;
        if (pi.is_p1) {
          m.transitions.push_back({from, std::nullopt, p.lhs[0], from, p.rhs});
          for (auto& [g1, g2] : rhs_splits(p)) {
            Word push = g1;
            push.push_back(z);
            std::set<SymSet> h1;
            for (const auto& k2 : an.SP_string(g2)) {
              if (!is_subset(k2, f)) continue;
              for (const auto& k1 : s2.h0) h1.insert(set_union(k1, k2));
            }
            if (!h1.empty())
              m.transitions.push_back(
                  {from, std::nullopt, p.lhs[0], visit({0, h1, {}, {}}), push});
          }
        } else {
          m.transitions.push_back({from, pi.a, p.lhs[0], from, {}});
        }
      }
      for (const auto& k : s2.h0) {
        SymSet rest;
        std::set_difference(f.begin(), f.end(), k.begin(), k.end(),
                            std::inserter(rest, rest.begin()));
        Sym to = visit({1, {}, rest, {}});
        for (const auto& n2 : sep.nonterminals)
          m.transitions.push_back({from, std::nullopt, n2, to, {n2}});
      }
    } else if (s2.kind == 1) {
      for (const auto& pi : infos) {
        const auto& p = *pi.p;
        if (!f.count(p.label)) continue;
        SymSet h1 = s2.h;
        h1.insert(p.label);
        if (pi.is_p1) {
          m.transitions.push_back(
              {from, std::nullopt, p.lhs[0], visit({1, {}, s2.k, h1}), p.rhs});
          for (auto& [g1, g2] : rhs_splits(p)) {
            Word push = g1;
            push.push_back(z);
            for (const auto& k2 : an.TR1_string(g2, f)) {
              SymSet h2 = h1;
              h2.insert(k2.begin(), k2.end());
              m.transitions.push_back(
                  {from, std::nullopt, p.lhs[0], visit({1, {}, s2.k, h2}), push});
            }
          }
        } else {
          m.transitions.push_back(
              {from, pi.a, p.lhs[0], visit({1, {}, s2.k, h1}), {}});
        }
      }
      if (is_subset(s2.k, s2.h)) {
        Sym to = visit({2, {}, s2.k, {}});
        for (const auto& n2 : sep.nonterminals)
          m.transitions.push_back({from, std::nullopt, n2, to, {n2}});
      }
    } else {
      Sym to = visit({1, {}, s2.k, {}});
      for (const auto& n2 : sep.nonterminals)
        m.transitions.push_back({from, std::nullopt, n2, to, {n2}});
    }
  }
  // (inf,=)-family: inf(run) must contain some qbar state
  SymSet all(m.states.begin(), m.states.end());
  for (const auto& [s2, n2] : seen) {
    if (s2.kind != 2) continue;
    SymSet pad = all;
    pad.erase(n2);
    m.family_blocks.push_back(Family::Interval{{n2}, pad, false});
  }
  return m;
}

}  // namespace detail

inline OmegaPDA cfg_nl_to_pda(const OmegaGrammar& g_in,
                              const AcceptanceMode& mode,
                              NlPdaOptions opts = {}) {
  auto c = classify(g_in);
  if (c.tag != GrammarClass::CFG && c.tag != GrammarClass::RLG)
    throw ValidationError("cfg_nl_to_pda requires a context-free grammar");
  if (g_in.repetition != RepetitionKind::production)
    throw ValidationError("cfg_nl_to_pda requires production repetition sets");
  if (mode.pi == Pi::leftmost)
    throw UsageError(
        "cfg_nl_to_pda covers normal derivations; use the leftmost "
        "construction (thm6.2) instead");
  OmegaGrammar sep =
      is_terminal_separated(g_in) ? g_in : cfg_separate_terminals(g_in);
  GrammarAnalysis an(sep, opts.caps);
  SymSet stack_syms(sep.nonterminals.begin(), sep.nonterminals.end());
  for (const auto& t : sep.terminals) stack_syms.insert(t);
  Sym z = detail::fresh_symbol("Z", stack_syms);

  auto members = expand_family(sep.family, opts.caps.family_cap);
  std::vector<detail::NlMachine> machines;
  for (const auto& f : members) {
    switch (mode.rho) {
      case Rho::subseteq:
        machines.push_back(detail::nl_case_subseteq(sep, f));
        break;
      case Rho::cap:
        machines.push_back(
            detail::nl_case_cap(sep, f, an, mode.sigma == Sigma::inf, z));
        break;
      case Rho::eq:
        if (mode.sigma == Sigma::ran)
          machines.push_back(detail::nl_case_ran_eq(sep, f, an, z, opts));
        else
          machines.push_back(detail::nl_case_inf_eq(sep, f, an, z, opts));
        break;
    }
  }

  OmegaPDA d;
  d.name = g_in.name + "_nlpda";
  d.alphabet.symbols = sep.terminals;
  d.stack_alphabet = sep.nonterminals;
  for (const auto& t : sep.terminals) d.stack_alphabet.push_back(t);
  d.start_stack = sep.start;
  bool uses_z = false;
  for (const auto& m : machines)
    if (!m.extra_stack.empty()) uses_z = true;
  if (uses_z) d.stack_alphabet.push_back(z);

  Family fam;
  if (machines.empty()) {
    d.start = "q0";
    d.states = {"q0"};
    fam = Family::empty({"q0"});
  } else if (machines.size() == 1) {
    auto& m = machines[0];
    d.start = m.start;
    d.states = m.states;
    d.transitions = m.transitions;
    fam.blocks = m.family_blocks;
  } else {
    d.start = "root";
    d.states.push_back("root");
    for (size_t i = 0; i < machines.size(); ++i) {
      std::map<Sym, Sym> ren;
      Sym prefix = "m" + std::to_string(i) + ".";
      for (const auto& q : machines[i].states) {
        ren[q] = prefix + q;
        d.states.push_back(prefix + q);
      }
      d.transitions.push_back(
          {"root", std::nullopt, d.start_stack, ren[machines[i].start],
           {d.start_stack}});
      for (auto t : machines[i].transitions) {
        t.from = ren[t.from];
        t.to = ren[t.to];
        d.transitions.push_back(std::move(t));
      }
      Family part;
      part.blocks = machines[i].family_blocks;
      part = part.relabel(ren);
      for (auto& b : part.blocks) fam.blocks.push_back(std::move(b));
    }
  }
  if (mode.sigma == Sigma::ran &&
      (mode.rho == Rho::subseteq || mode.rho == Rho::eq) &&
      machines.size() > 1)
    fam = detail::family_require(fam, {"root"});
  detail::set_universe(fam, SymSet(d.states.begin(), d.states.end()));
  d.family = std::move(fam);
  return d;
}

// ---------------------------------------------------------------------------
// Single-tape TM -> CSG. Pair symbols record the guessed input alongside the
// simulated tape content; $ emits checked terminals.
// ---------------------------------------------------------------------------

inline OmegaGrammar tm_to_csg(const OmegaTM& m, const AcceptanceMode& mode) {
  if (m.tapes != 1)
    throw ValidationError("tm_to_csg requires a single-tape machine; fold first");
  OmegaGrammar g;
  g.name = m.name + "_csg";
  g.terminals = m.alphabet.symbols;
  g.repetition = RepetitionKind::production;
  g.class_tag = GrammarClass::CSG;
  SymSet taken(m.alphabet.symbols.begin(), m.alphabet.symbols.end());
  auto pair_sym = [&](const Sym& a, const Sym& A) {
    return "[" + a + "," + A + "]";
  };
  std::map<Sym, Sym> nt_of_state;
  for (const auto& q : m.states) {
    Sym n2 = detail::fresh_symbol(q, taken);
    taken.insert(n2);
    nt_of_state[q] = n2;
    g.nonterminals.push_back(n2);
  }
  for (const auto& a : m.alphabet.symbols)
    for (const auto& A : m.tape_alphabet) {
      g.nonterminals.push_back(pair_sym(a, A));
      taken.insert(pair_sym(a, A));
    }
  Sym s0 = detail::fresh_symbol("S", taken);
  taken.insert(s0);
  Sym s1 = detail::fresh_symbol("S1", taken);
  taken.insert(s1);
  Sym dollar = detail::fresh_symbol("$", taken);
  taken.insert(dollar);
  g.nonterminals.push_back(s0);
  g.nonterminals.push_back(s1);
  g.nonterminals.push_back(dollar);
  g.start = s0;

  SymSet p2_labels, p6_labels;
  std::map<Sym, std::vector<Sym>> per_state;  // P_q
  for (const auto& q : m.states) per_state[q] = {};
  g.productions.push_back({"p1", {s0}, {dollar, nt_of_state[m.start], s1}});
  for (const auto& a : m.alphabet.symbols) {
    Sym lbl = "p2." + a;
    g.productions.push_back({lbl, {s1}, {pair_sym(a, a), s1}});
    p2_labels.insert(lbl);
  }
  for (size_t k = 0; k < m.transitions.size(); ++k) {
    const auto& t = m.transitions[k];
    const Sym& A = t.read[0];
    const Sym& C = t.write[0];
    if (t.move[0] == Move::R) {
      for (const auto& a : m.alphabet.symbols) {
        Sym lbl = "p3." + std::to_string(k) + "." + a;
        g.productions.push_back({lbl,
                                 {nt_of_state[t.from], pair_sym(a, A)},
                                 {pair_sym(a, C), nt_of_state[t.to]}});
        per_state[t.from].push_back(lbl);
      }
    } else if (t.move[0] == Move::L) {
      for (const auto& a : m.alphabet.symbols)
        for (const auto& b : m.alphabet.symbols)
          for (const auto& B : m.tape_alphabet) {
            Sym lbl = "p4." + std::to_string(k) + "." + a + "." + b + "." + B;
            g.productions.push_back(
                {lbl,
                 {pair_sym(b, B), nt_of_state[t.from], pair_sym(a, A)},
                 {nt_of_state[t.to], pair_sym(b, B), pair_sym(a, C)}});
            per_state[t.from].push_back(lbl);
          }
    } else {
      for (const auto& a : m.alphabet.symbols) {
        Sym lbl = "p5." + std::to_string(k) + "." + a;
        g.productions.push_back({lbl,
                                 {nt_of_state[t.from], pair_sym(a, A)},
                                 {nt_of_state[t.to], pair_sym(a, C)}});
        per_state[t.from].push_back(lbl);
      }
    }
  }
  for (const auto& a : m.alphabet.symbols)
    for (const auto& A : m.tape_alphabet) {
      Sym lbl = "p6." + a + "." + A;
      g.productions.push_back({lbl, {dollar, pair_sym(a, A)}, {a, dollar}});
      p6_labels.insert(lbl);
    }

  SymSet universe;
  for (const auto& p : g.productions) universe.insert(p.label);
  if (mode.rho == Rho::cap) {
    g.family = detail::map_through_groups(m.family, per_state);
  } else if (mode.rho == Rho::subseteq) {
    g.family = detail::map_through_groups(m.family, per_state);
    SymSet extra = p2_labels;
    extra.insert(p6_labels.begin(), p6_labels.end());
    if (mode.sigma == Sigma::ran) extra.insert("p1");
    g.family = detail::family_require(g.family, extra);
  } else {
    std::map<Sym, SymSet> img;
    img["p1"] = {"#P1"};
    for (const auto& l : p2_labels) img[l] = {"#P2"};
    for (const auto& l : p6_labels) img[l] = {"#P6"};
    for (const auto& [q, labels] : per_state)
      for (const auto& l : labels) img[l] = {q};
    std::vector<SymSet> targets;
    for (const auto& fk : expand_family(m.family)) {
      SymSet t{"#P2", "#P6"};
      if (mode.sigma == Sigma::ran) t.insert("#P1");
      t.insert(fk.begin(), fk.end());
      targets.push_back(std::move(t));
    }
    g.family = Family::empty(universe);
    g.family.add_mapped_eq(std::move(img), std::move(targets));
  }
  detail::set_universe(g.family, universe);
  return g;
}

}  // namespace omega
