#pragma once

#include "omega/analysis.hpp"
#include "omega/grammar.hpp"

namespace omega {

namespace detail {

inline Sym fresh_symbol(Sym base, const SymSet& taken) {
  while (taken.count(base)) base += "_";
  return base;
}

inline std::vector<SymSet> members_of(const Family& f, size_t cap = 4096) {
  return expand_family(f, cap);
}

// Replace each universe element by a non-empty group of new elements; the
// family follows member-wise. Exact for realized profiles, which always use
// groups wholesale.
inline Family map_through_groups(const Family& f,
                                 const std::map<Sym, std::vector<Sym>>& groups) {
  SymSet universe;
  for (const auto& [k, v] : groups) universe.insert(v.begin(), v.end());
  auto image = [&](const SymSet& s) {
    SymSet out;
    for (const auto& x : s) {
      const auto& g = groups.at(x);
      out.insert(g.begin(), g.end());
    }
    return out;
  };
  Family out;
  out.universe = universe;
  for (const auto& b : f.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      Family::Explicit e2;
      for (const auto& m : e->members) e2.members.push_back(image(m));
      out.blocks.push_back(std::move(e2));
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      out.blocks.push_back(
          Family::Interval{image(iv->base), image(iv->pad), iv->nonempty_pad});
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      Family::MappedEq m2;
      m2.targets = m.targets;
      for (const auto& [k, v] : m.img)
        for (const auto& q : groups.at(k)) m2.img[q] = v;
      out.blocks.push_back(std::move(m2));
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RLG short form: every production A -> aB or A -> a with a in T or empty.
// ---------------------------------------------------------------------------

inline bool is_short_rlg(const OmegaGrammar& g) {
  for (const auto& p : g.productions) {
    if (p.lhs.size() != 1) return false;
    size_t terminals = 0;
    for (const auto& s : p.rhs)
      if (g.is_terminal(s)) terminals++;
    if (terminals > 1) return false;
    if (p.rhs.size() > 2) return false;
    if (p.rhs.size() == 2 &&
        !(g.is_terminal(p.rhs[0]) && g.is_nonterminal(p.rhs[1])))
      return false;
  }
  return true;
}

inline OmegaGrammar rlg_short_form(const OmegaGrammar& g) {
  if (classify(g).tag != GrammarClass::RLG)
    throw ValidationError("rlg_short_form requires a right linear grammar");
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("rlg_short_form requires production repetition sets");
  OmegaGrammar out;
  out.name = g.name + "_short";
  out.nonterminals = g.nonterminals;
  out.terminals = g.terminals;
  out.start = g.start;
  out.repetition = g.repetition;
  out.class_tag = GrammarClass::RLG;
  SymSet taken(g.nonterminals.begin(), g.nonterminals.end());
  for (const auto& t : g.terminals) taken.insert(t);
  std::map<Sym, std::vector<Sym>> groups;
  for (const auto& p : g.productions) {
    Word u;
    std::optional<Sym> tail;
    for (const auto& s : p.rhs) {
      if (g.is_terminal(s))
        u.push_back(s);
      else
        tail = s;
    }
    if (u.size() <= 1) {
      out.productions.push_back(p);
      groups[p.label] = {p.label};
      continue;
    }
    // chain through fresh unique intermediates
    std::vector<Sym> fragment_labels;
    Sym prev = p.lhs[0];
    for (size_t m = 1; m <= u.size(); ++m) {
      Sym label = p.label + "." + std::to_string(m);
      Sym next;
      if (m < u.size()) {
        next = detail::fresh_symbol(p.label + "#" + std::to_string(m), taken);
        taken.insert(next);
        out.nonterminals.push_back(next);
      }
      Word rhs{u[m - 1]};
      if (m < u.size())
        rhs.push_back(next);
      else if (tail)
        rhs.push_back(*tail);
      out.productions.push_back({label, {prev}, rhs});
      fragment_labels.push_back(label);
      prev = next;
    }
    groups[p.label] = fragment_labels;
  }
  out.family = detail::map_through_groups(g.family, groups);
  return out;
}

// ---------------------------------------------------------------------------
// Terminal separation: productions only of the forms alpha -> beta over
// nonterminals, A -> a, and A -> epsilon.
// ---------------------------------------------------------------------------

inline bool is_terminal_separated(const OmegaGrammar& g) {
  for (const auto& p : g.productions) {
    bool rhs_all_nts = !p.rhs.empty();
    for (const auto& s : p.rhs)
      if (!g.is_nonterminal(s)) rhs_all_nts = false;
    if (rhs_all_nts) continue;
    if (p.lhs.size() == 1 && p.rhs.empty()) continue;
    if (p.lhs.size() == 1 && p.rhs.size() == 1 && g.is_terminal(p.rhs[0]))
      continue;
    return false;
  }
  return true;
}

inline OmegaGrammar separate_terminals(const OmegaGrammar& g) {
  OmegaGrammar out;
  out.name = g.name + "_sep";
  out.nonterminals = g.nonterminals;
  out.terminals = g.terminals;
  out.start = g.start;
  out.repetition = RepetitionKind::production;
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("terminal separation requires production repetition sets");
  out.class_tag = g.class_tag;
  SymSet taken(g.nonterminals.begin(), g.nonterminals.end());
  for (const auto& t : g.terminals) taken.insert(t);
  std::vector<std::pair<SymSet, SymSet>> member_bounds;  // (F_i, f(F_i))
  std::map<Sym, SymSet> f_of;                            // label -> f(p)
  for (const auto& p : g.productions) {
    bool rhs_all_nts = !p.rhs.empty();
    for (const auto& s : p.rhs)
      if (!g.is_nonterminal(s)) rhs_all_nts = false;
    if (rhs_all_nts || (p.lhs.size() == 1 && p.rhs.empty())) {
      out.productions.push_back(p);
      f_of[p.label] = {p.label};
      continue;
    }
    if (p.rhs.empty()) {
      // multi-symbol lhs erased through a fresh intermediate
      Sym ek = detail::fresh_symbol(p.label + "#E", taken);
      taken.insert(ek);
      out.nonterminals.push_back(ek);
      out.productions.push_back({p.label, p.lhs, {ek}});
      out.productions.push_back({p.label + ".e", {ek}, {}});
      f_of[p.label] = {p.label, p.label + ".e"};
      continue;
    }
    // replace each terminal occurrence by a production-unique nonterminal
    Word rhs;
    SymSet fset{p.label};
    std::vector<Production> emitters;
    for (size_t i = 0; i < p.rhs.size(); ++i) {
      if (g.is_nonterminal(p.rhs[i])) {
        rhs.push_back(p.rhs[i]);
        continue;
      }
      Sym b = detail::fresh_symbol(p.label + "#" + std::to_string(i + 1), taken);
      taken.insert(b);
      out.nonterminals.push_back(b);
      rhs.push_back(b);
      Sym lbl = p.label + "." + std::to_string(i + 1);
      emitters.push_back({lbl, {b}, {p.rhs[i]}});
      fset.insert(lbl);
    }
    out.productions.push_back({p.label, p.lhs, rhs});
    for (auto& e : emitters) out.productions.push_back(std::move(e));
    f_of[p.label] = fset;
  }
  SymSet universe;
  for (const auto& p : out.productions) universe.insert(p.label);
  out.family = Family::empty(universe);
  for (const auto& fi : detail::members_of(g.family)) {
    SymSet fimage;
    for (const auto& x : fi) {
      auto it = f_of.find(x);
      if (it == f_of.end())
        throw ValidationError("family references unknown production: " + x);
      fimage.insert(it->second.begin(), it->second.end());
    }
    SymSet pad;
    std::set_difference(fimage.begin(), fimage.end(), fi.begin(), fi.end(),
                        std::inserter(pad, pad.begin()));
    out.family.add_interval(fi, pad, false);
  }
  return out;
}

inline OmegaGrammar psg_separate_terminals(const OmegaGrammar& g) {
  return separate_terminals(g);
}
inline OmegaGrammar cfg_separate_terminals(const OmegaGrammar& g) {
  auto c = classify(g);
  if (c.tag != GrammarClass::CFG && c.tag != GrammarClass::RLG)
    throw ValidationError("cfg_separate_terminals requires a context-free grammar");
  OmegaGrammar out = separate_terminals(g);
  out.class_tag = GrammarClass::CFG;
  return out;
}
inline OmegaGrammar csg_separate_terminals(const OmegaGrammar& g) {
  auto c = classify(g);
  bool csg_ok = c.tag == GrammarClass::CSG || c.csg_compatible;
  if (!csg_ok)
    throw ValidationError("csg_separate_terminals requires a context-sensitive grammar");
  for (const auto& p : g.productions)
    if (p.rhs.empty())
      throw ValidationError("context-sensitive grammar cannot contain epsilon-productions");
  OmegaGrammar out = separate_terminals(g);
  out.class_tag = GrammarClass::CSG;
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon-production-free CFG, per acceptance mode.
// ---------------------------------------------------------------------------

inline bool is_epsilon_free(const OmegaGrammar& g) {
  for (const auto& p : g.productions)
    if (p.rhs.empty()) return false;
  return true;
}

inline OmegaGrammar cfg_epsilon_free(const OmegaGrammar& g,
                                     const AcceptanceMode& mode,
                                     AnalysisCaps caps = {}) {
  if (mode.pi == Pi::leftmost &&
      (mode.rho == Rho::cap || mode.rho == Rho::eq) && mode.sigma == Sigma::ran)
    throw RefusedError(
        "epsilon-production-free construction for " + to_string(mode) +
        " is an open problem");
  auto c = classify(g);
  if (c.tag != GrammarClass::CFG && c.tag != GrammarClass::RLG)
    throw ValidationError("cfg_epsilon_free requires a context-free grammar");
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("cfg_epsilon_free requires production repetition sets");

  GrammarAnalysis an(g, caps);
  OmegaGrammar out;
  out.name = g.name + "_noeps";
  out.nonterminals = g.nonterminals;
  out.terminals = g.terminals;
  out.start = g.start;
  out.repetition = RepetitionKind::production;
  out.class_tag = GrammarClass::CFG;

  struct Variant {
    Sym label;
    SymSet pro;  // {p} plus the erased productions K
  };
  std::vector<Variant> variants;
  for (const auto& p : g.productions) {
    std::vector<size_t> nullable;
    for (size_t i = 0; i < p.rhs.size(); ++i)
      if (g.is_nonterminal(p.rhs[i]) && !an.NL(p.rhs[i]).empty())
        nullable.push_back(i);
    if (nullable.size() > 16)
      throw ResourceError("too many nullable positions in " + p.label);
    std::set<std::pair<Word, SymSet>> emitted;
    size_t masks = size_t{1} << nullable.size();
    for (size_t mask = 0; mask < masks; ++mask) {
      Word beta;
      std::vector<size_t> erased;
      for (size_t i = 0, ni = 0; i < p.rhs.size(); ++i) {
        bool erase = false;
        if (ni < nullable.size() && nullable[ni] == i) {
          erase = (mask >> ni) & 1;
          ++ni;
        }
        if (erase)
          erased.push_back(i);
        else
          beta.push_back(p.rhs[i]);
      }
      if (beta.empty()) continue;  // no epsilon-productions in the output
      // PE(beta): one NL choice per erased occurrence, unions capped
      SetFamily pe{SymSet{}};
      for (size_t i : erased)
        pe = detail::combine(pe, an.NL(p.rhs[i]), caps.family_cap,
                             "PE(" + p.label + ")");
      for (const auto& k : pe) {
        if (!emitted.insert({beta, k}).second) continue;
        Sym label = p.label + "~" +
                    join(std::vector<std::string>(k.begin(), k.end()), "+") +
                    "~" + join(beta, "");
        while (out.find_production(label)) label += "'";
        out.productions.push_back({label, p.lhs, beta});
        SymSet pro = k;
        pro.insert(p.label);
        variants.push_back({label, pro});
      }
    }
  }

  SymSet universe;
  for (const auto& v : variants) universe.insert(v.label);
  out.family = Family::empty(universe);
  auto members = detail::members_of(g.family, caps.family_cap);
  const bool cap_mode = mode.rho == Rho::cap;
  const bool sub_mode = mode.rho == Rho::subseteq;
  if (cap_mode) {
    SymSet funion;
    for (const auto& m : members) funion.insert(m.begin(), m.end());
    SymSet member;
    for (const auto& v : variants)
      if (intersects(v.pro, funion)) member.insert(v.label);
    out.family.add_member(member);
  } else if (sub_mode) {
    for (const auto& fk : members) {
      SymSet top;
      for (const auto& v : variants)
        if (is_subset(v.pro, fk)) top.insert(v.label);
      out.family.add_interval({}, top, false);
    }
  } else {
    std::map<Sym, SymSet> img;
    for (const auto& v : variants) img[v.label] = v.pro;
    out.family.add_mapped_eq(std::move(img), members);
  }
  return out;
}

// ---------------------------------------------------------------------------
// $-boundary form for PSG/CSG under normal derivations.
// ---------------------------------------------------------------------------

struct DollarBoundary {
  OmegaGrammar grammar;
  Sym dollar;
  Sym fresh_start;
};

inline OmegaGrammar to_dollar_boundary(const OmegaGrammar& g,
                                       const AcceptanceMode& mode,
                                       DollarBoundary* info = nullptr) {
  if (mode.pi == Pi::leftmost)
    throw RefusedError("$-boundary construction covers normal derivations only");
  auto c = classify(g);
  bool csg = c.tag == GrammarClass::CSG ||
             ((c.tag == GrammarClass::CFG || c.tag == GrammarClass::RLG) &&
              c.csg_compatible);
  OmegaGrammar sep = is_terminal_separated(g) ? g : separate_terminals(g);
  if (csg)
    for (const auto& p : sep.productions)
      if (p.rhs.empty())
        throw ValidationError("context-sensitive grammar cannot contain epsilon-productions");

  OmegaGrammar out;
  out.name = g.name + "_dollar";
  out.terminals = sep.terminals;
  out.nonterminals = sep.nonterminals;
  out.repetition = RepetitionKind::production;
  out.class_tag = csg ? GrammarClass::CSG : GrammarClass::PSG;
  SymSet taken(sep.nonterminals.begin(), sep.nonterminals.end());
  for (const auto& t : sep.terminals) taken.insert(t);
  Sym dollar = detail::fresh_symbol("$", taken);
  taken.insert(dollar);
  Sym s1 = detail::fresh_symbol("S1", taken);
  taken.insert(s1);
  out.nonterminals.push_back(dollar);
  out.nonterminals.push_back(s1);
  out.start = s1;
  std::map<Sym, Sym> bar;  // terminal -> barred nonterminal
  for (const auto& t : sep.terminals) {
    Sym b = detail::fresh_symbol("~" + t, taken);
    taken.insert(b);
    out.nonterminals.push_back(b);
    bar[t] = b;
  }
  // P_s, then the simulation of the separated grammar, then P4
  Sym ps_label = "ps";
  out.productions.push_back({ps_label, {s1}, {dollar, sep.start}});
  for (const auto& p : sep.productions) {
    if (p.lhs.size() == 1 && p.rhs.size() == 1 && sep.is_terminal(p.rhs[0])) {
      out.productions.push_back({p.label, p.lhs, {bar.at(p.rhs[0])}});  // P2'
    } else {
      out.productions.push_back(p);  // P1 and P3 unchanged
    }
  }
  SymSet p4;
  for (const auto& t : sep.terminals) {
    Sym lbl = "p$" + t;
    out.productions.push_back({lbl, {dollar, bar.at(t)}, {t, dollar}});
    p4.insert(lbl);
  }

  SymSet universe;
  for (const auto& p : out.productions) universe.insert(p.label);
  out.family = Family::empty(universe);
  auto members = detail::members_of(sep.family);
  switch (mode.rho) {
    case Rho::cap:
      for (const auto& fi : members) out.family.add_member(fi);
      break;
    case Rho::subseteq:
      for (const auto& fi : members) {
        SymSet m = fi;
        m.insert(p4.begin(), p4.end());
        if (mode.sigma == Sigma::ran) m.insert(ps_label);
        out.family.add_member(m);
      }
      break;
    case Rho::eq:
      for (const auto& fi : members) {
        SymSet base = fi;
        if (mode.sigma == Sigma::ran) base.insert(ps_label);
        out.family.add_interval(base, p4, true);
      }
      break;
  }
  if (info) {
    info->grammar = out;
    info->dollar = dollar;
    info->fresh_start = s1;
  }
  return out;
}

// Structural checker: only the four $-boundary production shapes.
inline std::vector<std::string> check_dollar_boundary(const OmegaGrammar& g,
                                                      const Sym& dollar,
                                                      const Sym& start) {
  std::vector<std::string> out;
  for (const auto& p : g.productions) {
    bool lhs_has_dollar = false;
    for (const auto& s : p.lhs)
      if (s == dollar) lhs_has_dollar = true;
    bool rhs_has_dollar = false;
    for (const auto& s : p.rhs)
      if (s == dollar) rhs_has_dollar = true;
    // (2) S -> $ alpha
    if (p.lhs.size() == 1 && p.lhs[0] == start) {
      if (p.rhs.size() >= 2 && p.rhs[0] == dollar) {
        bool ok = true;
        for (size_t i = 1; i < p.rhs.size(); ++i)
          if (!g.is_nonterminal(p.rhs[i]) || p.rhs[i] == dollar) ok = false;
        if (ok) continue;
      }
      out.push_back("start production not of the form S -> $alpha: " + p.label);
      continue;
    }
    // (3) $A -> a$
    if (lhs_has_dollar || rhs_has_dollar) {
      bool ok = p.lhs.size() == 2 && p.lhs[0] == dollar &&
                g.is_nonterminal(p.lhs[1]) && p.lhs[1] != dollar &&
                p.rhs.size() == 2 && g.is_terminal(p.rhs[0]) &&
                p.rhs[1] == dollar;
      if (!ok) out.push_back("production uses $ outside form (3): " + p.label);
      continue;
    }
    // (4) A -> epsilon
    if (p.rhs.empty()) {
      if (p.lhs.size() != 1)
        out.push_back("erasing production with long lhs: " + p.label);
      continue;
    }
    // (1) alpha -> beta over N+
    bool ok = true;
    for (const auto& s : p.lhs)
      if (!g.is_nonterminal(s) || s == dollar || s == start) ok = false;
    for (const auto& s : p.rhs)
      if (!g.is_nonterminal(s) || s == dollar || s == start) ok = false;
    if (!ok) out.push_back("production outside forms (1)-(4): " + p.label);
  }
  return out;
}

}  // namespace omega
