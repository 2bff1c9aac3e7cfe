#pragma once

#include "omega/acceptance.hpp"
#include "omega/base.hpp"

namespace omega {

struct Production {
  std::string label;
  Word lhs;  // non-empty string of nonterminals
  Word rhs;  // string over N and T, possibly empty

  bool operator==(const Production& o) const {
    return label == o.label && lhs == o.lhs && rhs == o.rhs;
  }
};

enum class GrammarClass { RLG, CFG, CSG, PSG };
enum class RepetitionKind { production, variable };

inline std::string to_string(GrammarClass c) {
  switch (c) {
    case GrammarClass::RLG: return "rlg";
    case GrammarClass::CFG: return "cfg";
    case GrammarClass::CSG: return "csg";
    default: return "psg";
  }
}

struct OmegaGrammar {
  std::string name = "g";
  std::vector<Sym> nonterminals;
  std::vector<Sym> terminals;
  std::vector<Production> productions;  // declaration order matters
  Sym start;
  RepetitionKind repetition = RepetitionKind::production;
  Family family;  // over production labels, or nonterminals for variable kind
  GrammarClass class_tag = GrammarClass::PSG;

  bool is_nonterminal(const Sym& s) const {
    return std::find(nonterminals.begin(), nonterminals.end(), s) !=
           nonterminals.end();
  }
  bool is_terminal(const Sym& s) const {
    return std::find(terminals.begin(), terminals.end(), s) != terminals.end();
  }
  const Production* find_production(const std::string& label) const {
    for (const auto& p : productions)
      if (p.label == label) return &p;
    return nullptr;
  }
};

struct Classification {
  GrammarClass tag;
  bool csg_compatible;  // set when a CFG/RLG also satisfies |lhs| <= |rhs|
};

inline Classification classify(const OmegaGrammar& g) {
  bool rlg = true, cfg = true, csg = true;
  for (const auto& p : g.productions) {
    if (p.lhs.empty()) throw ValidationError("production with empty lhs: " + p.label);
    for (const auto& s : p.lhs)
      if (!g.is_nonterminal(s))
        throw ValidationError("invalid grammar: lhs of " + p.label +
                              " contains non-nonterminal symbol " + s);
    if (p.lhs.size() != 1) {
      rlg = cfg = false;
    }
    if (p.rhs.size() < p.lhs.size()) csg = false;
    if (rlg) {
      // A -> uB or A -> u with u terminal-only
      size_t i = 0;
      while (i < p.rhs.size() && g.is_terminal(p.rhs[i])) ++i;
      if (i + 1 < p.rhs.size() ||
          (i < p.rhs.size() && !g.is_nonterminal(p.rhs[i])))
        rlg = false;
    }
  }
  if (rlg) return {GrammarClass::RLG, csg};
  if (cfg) return {GrammarClass::CFG, csg};
  if (csg) return {GrammarClass::CSG, true};
  return {GrammarClass::PSG, false};
}

inline std::vector<std::string> validate(const OmegaGrammar& g) {
  std::vector<std::string> out;
  SymSet ns(g.nonterminals.begin(), g.nonterminals.end());
  SymSet ts(g.terminals.begin(), g.terminals.end());
  if (ns.size() != g.nonterminals.size()) out.push_back("duplicate nonterminal");
  if (ts.size() != g.terminals.size()) out.push_back("duplicate terminal");
  if (intersects(ns, ts)) out.push_back("nonterminals and terminals overlap");
  if (!ns.count(g.start)) out.push_back("start symbol not a nonterminal");
  SymSet labels;
  for (const auto& p : g.productions) {
    if (!labels.insert(p.label).second)
      out.push_back("duplicate production label: " + p.label);
    for (const auto& s : p.lhs)
      if (!ns.count(s))
        out.push_back("lhs of " + p.label + " contains non-nonterminal: " + s);
    if (p.lhs.empty()) out.push_back("empty lhs in " + p.label);
    for (const auto& s : p.rhs)
      if (!ns.count(s) && !ts.count(s))
        out.push_back("rhs of " + p.label + " contains undeclared symbol: " + s);
  }
  if (!out.empty()) return out;
  Classification c = classify(g);
  auto fits = [&](GrammarClass declared) {
    switch (declared) {
      case GrammarClass::RLG: return c.tag == GrammarClass::RLG;
      case GrammarClass::CFG:
        return c.tag == GrammarClass::RLG || c.tag == GrammarClass::CFG;
      case GrammarClass::CSG:
        return c.tag == GrammarClass::CSG ||
               ((c.tag == GrammarClass::RLG || c.tag == GrammarClass::CFG) &&
                c.csg_compatible);
      case GrammarClass::PSG: return true;
    }
    return false;
  };
  if (!fits(g.class_tag))
    out.push_back("declared class " + to_string(g.class_tag) +
                  " inconsistent with classified " + to_string(c.tag));
  if (g.repetition == RepetitionKind::variable &&
      !(c.tag == GrammarClass::RLG || c.tag == GrammarClass::CFG))
    out.push_back("variable repetition sets require an RLG or CFG");
  for (const auto& e : g.family.universe) {
    if (g.repetition == RepetitionKind::production) {
      if (!labels.count(e))
        out.push_back("family universe element is not a production label: " + e);
    } else if (!ns.count(e)) {
      out.push_back("family universe element is not a nonterminal: " + e);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sentential forms and derivation steps
// ---------------------------------------------------------------------------

struct SententialForm {
  Word symbols;
  size_t emitted = 0;  // length of the longest terminal-only prefix

  static SententialForm of(const OmegaGrammar& g, Word w) {
    SententialForm f;
    f.symbols = std::move(w);
    f.emitted = 0;
    while (f.emitted < f.symbols.size() && g.is_terminal(f.symbols[f.emitted]))
      f.emitted++;
    return f;
  }
};

inline std::optional<size_t> leftmost_nonterminal(const OmegaGrammar& g,
                                                  const Word& form) {
  for (size_t i = 0; i < form.size(); ++i)
    if (g.is_nonterminal(form[i])) return i;
  return std::nullopt;
}

inline bool lhs_matches(const Production& p, const Word& form, size_t pos) {
  if (pos + p.lhs.size() > form.size()) return false;
  for (size_t i = 0; i < p.lhs.size(); ++i)
    if (form[pos + i] != p.lhs[i]) return false;
  return true;
}

inline SententialForm derive_step(const OmegaGrammar& g,
                                  const SententialForm& form,
                                  const Production& p, size_t pos, Pi policy) {
  if (!lhs_matches(p, form.symbols, pos))
    throw ValidationError("lhs of " + p.label + " does not occur at position " +
                          std::to_string(pos));
  if (policy == Pi::leftmost) {
    auto lm = leftmost_nonterminal(g, form.symbols);
    if (!lm || *lm != pos)
      throw ValidationError("leftmost policy violated at position " +
                            std::to_string(pos));
  }
  Word next;
  next.reserve(form.symbols.size() - p.lhs.size() + p.rhs.size());
  next.insert(next.end(), form.symbols.begin(), form.symbols.begin() + pos);
  next.insert(next.end(), p.rhs.begin(), p.rhs.end());
  next.insert(next.end(), form.symbols.begin() + pos + p.lhs.size(),
              form.symbols.end());
  return SententialForm::of(g, std::move(next));
}

// ---------------------------------------------------------------------------
// Conversions between variable and production repetition sets
// ---------------------------------------------------------------------------

// All production sets whose lhs-label set is a member of the variable family.
inline OmegaGrammar var_to_prod_family(const OmegaGrammar& g,
                                       size_t cap = 4096) {
  if (g.repetition != RepetitionKind::variable)
    throw ValidationError("var_to_prod_family requires variable repetition sets");
  OmegaGrammar out = g;
  out.repetition = RepetitionKind::production;
  SymSet universe;
  for (const auto& p : g.productions) universe.insert(p.label);
  out.family = Family::empty(universe);
  std::set<SymSet> members;
  for (const auto& fn : expand_family(g.family, cap)) {
    std::vector<Sym> cand;
    for (const auto& p : g.productions)
      if (fn.count(p.lhs[0])) cand.push_back(p.label);
    if (cand.size() > 20)
      throw ResourceError("var_to_prod_family: candidate set too large");
    size_t n = size_t{1} << cand.size();
    for (size_t mask = 0; mask < n; ++mask) {
      SymSet d, lhs_set;
      for (size_t i = 0; i < cand.size(); ++i)
        if (mask & (size_t{1} << i)) {
          d.insert(cand[i]);
          lhs_set.insert(g.find_production(cand[i])->lhs[0]);
        }
      if (lhs_set == fn) {
        members.insert(std::move(d));
        if (members.size() > cap)
          throw ResourceError("var_to_prod_family: family exceeds cap of " +
                              std::to_string(cap));
      }
    }
  }
  for (auto& m : members) out.family.add_member(m);
  return out;
}

// Each p: A -> alpha splits into A -> A_p and A_p -> alpha; the variable
// family mirrors the production family through the fresh A_p names.
inline OmegaGrammar prod_to_var_family(const OmegaGrammar& g) {
  if (g.repetition != RepetitionKind::production)
    throw ValidationError("prod_to_var_family requires production repetition sets");
  Classification c = classify(g);
  if (c.tag != GrammarClass::RLG && c.tag != GrammarClass::CFG)
    throw ValidationError("prod_to_var_family requires an RLG or CFG");
  OmegaGrammar out;
  out.name = g.name + "_v";
  out.nonterminals = g.nonterminals;
  out.terminals = g.terminals;
  out.start = g.start;
  out.repetition = RepetitionKind::variable;
  out.class_tag = GrammarClass::CFG;
  std::map<Sym, Sym> fresh_of;  // production label -> fresh nonterminal
  for (const auto& p : g.productions) {
    Sym fresh = p.lhs[0] + "_" + p.label;
    fresh_of[p.label] = fresh;
    out.nonterminals.push_back(fresh);
    out.productions.push_back({p.label + "#a", {p.lhs[0]}, {fresh}});
    out.productions.push_back({p.label + "#b", {fresh}, p.rhs});
  }
  SymSet universe(out.nonterminals.begin(), out.nonterminals.end());
  out.family = Family::empty(universe);
  for (const auto& f : expand_family(g.family)) {
    SymSet m;
    for (const auto& lbl : f) {
      const Production* p = g.find_production(lbl);
      if (!p) throw ValidationError("family references unknown production: " + lbl);
      m.insert(p->lhs[0]);
      m.insert(fresh_of.at(lbl));
    }
    out.family.add_member(m);
  }
  return out;
}

}  // namespace omega
