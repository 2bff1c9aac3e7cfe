#pragma once

#include "omega/base.hpp"
#include "omega/grammar.hpp"

namespace omega {

using SetFamily = std::set<SymSet>;  // a set of production-label sets

struct AnalysisCaps {
  size_t family_cap = 4096;  // max label-sets per key, hard error beyond
  bool tr_zero_step = true;  // zero-step derivation contributes {} to TR
};

namespace detail {

inline void capped_insert(SetFamily& fam, SymSet s, size_t cap,
                          const std::string& key) {
  fam.insert(std::move(s));
  if (fam.size() > cap)
    throw ResourceError("label-set family for " + key + " exceeds cap of " +
                        std::to_string(cap));
}

// Cross-combine a family with per-occurrence choice families.
inline SetFamily combine(const SetFamily& acc, const SetFamily& next,
                         size_t cap, const std::string& key) {
  SetFamily out;
  for (const auto& a : acc)
    for (const auto& b : next)
      capped_insert(out, set_union(a, b), cap, key);
  return out;
}

}  // namespace detail

// Derivation-analysis sets for a CFG. All results are cached; analyses are
// pure functions of the grammar.
class GrammarAnalysis {
 public:
  explicit GrammarAnalysis(const OmegaGrammar& g, AnalysisCaps caps = {})
      : g_(g), caps_(caps) {
    Classification c = classify(g);
    if (c.tag != GrammarClass::RLG && c.tag != GrammarClass::CFG)
      throw ValidationError("derivation analysis requires a CFG");
  }

  // NL(A): label sets of finite derivations A =>* epsilon.
  const SetFamily& NL(const Sym& a) {
    ensure_nl();
    return nl_[a];
  }

  // TR(A): ran-sets of finite nl-derivations from A (zero-step included
  // unless toggled off).
  SetFamily TR(const Sym& a) {
    ensure_tr();
    SetFamily out = tr_.at(a);
    if (!caps_.tr_zero_step) out.erase(SymSet{});
    return out;
  }

  // SP(A): inf-sets of infinite nl-derivations from A.
  const SetFamily& SP(const Sym& a) {
    ensure_sp();
    return sp_[a];
  }

  // String extensions via the pairwise-union composition rule.
  SetFamily TR_string(const Word& gamma) {
    SetFamily acc{SymSet{}};
    for (const auto& s : gamma)
      if (g_.is_nonterminal(s))
        acc = detail::combine(acc, TR(s), caps_.family_cap, "TR(string)");
    if (!caps_.tr_zero_step) acc.erase(SymSet{});
    return acc;
  }

  SetFamily SP_string(const Word& gamma) {
    // SP(ab) = SP(a) u SP(b) u pairwise unions; terminals contribute nothing
    SetFamily acc;  // empty: no infinite derivation from epsilon
    for (const auto& s : gamma) {
      if (!g_.is_nonterminal(s)) continue;
      const SetFamily& sps = SP(s);
      SetFamily out = acc;
      for (const auto& b : sps) detail::capped_insert(out, b, caps_.family_cap, "SP(string)");
      for (const auto& a : acc)
        for (const auto& b : sps)
          detail::capped_insert(out, set_union(a, b), caps_.family_cap,
                                "SP(string)");
      acc = std::move(out);
    }
    return acc;
  }

  // TR1: members of TR whose elements all lie in F.
  SetFamily TR1_string(const Word& gamma, const SymSet& f) {
    SetFamily out;
    for (const auto& d : TR_string(gamma))
      if (is_subset(d, f)) out.insert(d);
    return out;
  }

  SetFamily TR1(const Sym& a, const SymSet& f) {
    SetFamily out;
    for (const auto& d : TR(a))
      if (is_subset(d, f)) out.insert(d);
    return out;
  }

 private:
  const OmegaGrammar& g_;
  AnalysisCaps caps_;
  bool nl_done_ = false, tr_done_ = false, sp_done_ = false;
  std::map<Sym, SetFamily> nl_, tr_, sp_;
  std::map<Sym, SetFamily> cyc_;           // ran-sets of cycles B =>+ ...B...
  std::map<Sym, std::set<SymSet>> cover_;  // co-present nonterminal sets

  void ensure_nl() {
    if (nl_done_) return;
    for (const auto& n : g_.nonterminals) nl_[n] = {};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g_.productions) {
        bool all_nts = true;
        for (const auto& s : p.rhs)
          if (!g_.is_nonterminal(s)) all_nts = false;
        if (!all_nts) continue;
        SetFamily acc{SymSet{p.label}};
        bool feasible = true;
        for (const auto& s : p.rhs) {
          if (nl_[s].empty()) {
            feasible = false;
            break;
          }
          acc = detail::combine(acc, nl_[s], caps_.family_cap,
                                "NL(" + p.lhs[0] + ")");
        }
        if (!feasible) continue;
        for (const auto& d : acc)
          if (nl_[p.lhs[0]].insert(d).second) {
            changed = true;
            if (nl_[p.lhs[0]].size() > caps_.family_cap)
              throw ResourceError("label-set family for NL(" + p.lhs[0] +
                                  ") exceeds cap of " +
                                  std::to_string(caps_.family_cap));
          }
      }
    }
    nl_done_ = true;
  }

  void ensure_tr() {
    if (tr_done_) return;
    for (const auto& n : g_.nonterminals) tr_[n] = {SymSet{}};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g_.productions) {
        SetFamily acc{SymSet{p.label}};
        for (const auto& s : p.rhs)
          if (g_.is_nonterminal(s))
            acc = detail::combine(acc, tr_[s], caps_.family_cap,
                                  "TR(" + p.lhs[0] + ")");
        for (const auto& d : acc)
          if (tr_[p.lhs[0]].insert(d).second) {
            changed = true;
            if (tr_[p.lhs[0]].size() > caps_.family_cap)
              throw ResourceError("label-set family for TR(" + p.lhs[0] +
                                  ") exceeds cap of " +
                                  std::to_string(caps_.family_cap));
          }
      }
    }
    tr_done_ = true;
  }

  // reach_b[X]: ran-sets of finite derivations X =>* form containing B.
  std::map<Sym, SetFamily> reach_with_occurrence(const Sym& b) {
    ensure_tr();
    std::map<Sym, SetFamily> r;
    for (const auto& n : g_.nonterminals) r[n] = {};
    r[b].insert(SymSet{});
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g_.productions) {
        // pick one rhs occurrence to carry the B-occurrence
        for (size_t pick = 0; pick < p.rhs.size(); ++pick) {
          if (!g_.is_nonterminal(p.rhs[pick])) continue;
          if (r[p.rhs[pick]].empty()) continue;
          SetFamily acc{SymSet{p.label}};
          acc = detail::combine(acc, r[p.rhs[pick]], caps_.family_cap,
                                "CYC(" + b + ")");
          for (size_t i = 0; i < p.rhs.size(); ++i) {
            if (i == pick || !g_.is_nonterminal(p.rhs[i])) continue;
            acc = detail::combine(acc, tr_[p.rhs[i]], caps_.family_cap,
                                  "CYC(" + b + ")");
          }
          for (const auto& d : acc)
            if (r[p.lhs[0]].insert(d).second) {
              changed = true;
              if (r[p.lhs[0]].size() > caps_.family_cap)
                throw ResourceError("label-set family for CYC(" + b +
                                    ") exceeds cap of " +
                                    std::to_string(caps_.family_cap));
            }
        }
      }
    }
    return r;
  }

  void ensure_cover() {
    if (!cover_.empty()) return;
    for (const auto& n : g_.nonterminals) cover_[n] = {SymSet{}, SymSet{n}};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& p : g_.productions) {
        std::set<SymSet> acc{SymSet{}};
        for (const auto& s : p.rhs) {
          if (!g_.is_nonterminal(s)) continue;
          std::set<SymSet> out;
          for (const auto& a : acc)
            for (const auto& b : cover_[s]) out.insert(set_union(a, b));
          acc = std::move(out);
        }
        for (const auto& d : acc)
          if (cover_[p.lhs[0]].insert(d).second) changed = true;
      }
    }
  }

  void ensure_sp() {
    if (sp_done_) return;
    ensure_cover();
    // cycles: CYC(B) = ran-sets of derivations B =>+ form containing B
    std::map<Sym, SetFamily> uc;  // nonempty union closure of CYC(B)
    for (const auto& b : g_.nonterminals) {
      SetFamily cyc = reach_with_occurrence(b).at(b);
      cyc.erase(SymSet{});  // drop the zero-step derivation
      cyc_[b] = cyc;
      SetFamily closure = cyc;
      bool changed = true;
      while (changed) {
        changed = false;
        std::vector<SymSet> cur(closure.begin(), closure.end());
        for (const auto& x : cur)
          for (const auto& y : cyc)
            if (closure.insert(set_union(x, y)).second) {
              changed = true;
              if (closure.size() > caps_.family_cap)
                throw ResourceError("label-set family for SP closure at " + b +
                                    " exceeds cap of " +
                                    std::to_string(caps_.family_cap));
            }
      }
      uc[b] = std::move(closure);
    }
    for (const auto& a : g_.nonterminals) {
      SetFamily out;
      for (const auto& present : cover_[a]) {
        if (present.empty()) continue;
        // choose a union member from each cycling nonterminal in `present`
        SetFamily acc{SymSet{}};
        bool any = false;
        std::vector<Sym> used;
        for (const auto& b : present)
          if (!uc[b].empty()) used.push_back(b);
        if (used.empty()) continue;
        // every subset of `used` is co-present too (cover_ is downward
        // closed), so combining all of them plus the emptable choice per
        // element covers all selections
        for (const auto& b : used) {
          SetFamily choices = uc[b];
          choices.insert(SymSet{});  // this element may decline to cycle
          acc = detail::combine(acc, choices, caps_.family_cap, "SP(" + a + ")");
          any = true;
        }
        (void)any;
        for (const auto& d : acc) {
          if (d.empty()) continue;  // at least one element must cycle
          out.insert(d);
          if (out.size() > caps_.family_cap)
            throw ResourceError("label-set family for SP(" + a +
                                ") exceeds cap of " +
                                std::to_string(caps_.family_cap));
        }
      }
      sp_[a] = std::move(out);
    }
    sp_done_ = true;
  }
};

// Convenience wrappers matching the per-operation surface.
inline std::map<Sym, std::vector<SymSet>> compute_NL(const OmegaGrammar& g,
                                                     AnalysisCaps caps = {}) {
  GrammarAnalysis an(g, caps);
  std::map<Sym, std::vector<SymSet>> out;
  for (const auto& n : g.nonterminals) {
    const auto& fam = an.NL(n);
    out[n] = std::vector<SymSet>(fam.begin(), fam.end());
  }
  return out;
}

inline std::map<Sym, std::vector<SymSet>> compute_TR(const OmegaGrammar& g,
                                                     AnalysisCaps caps = {}) {
  GrammarAnalysis an(g, caps);
  std::map<Sym, std::vector<SymSet>> out;
  for (const auto& n : g.nonterminals) {
    auto fam = an.TR(n);
    out[n] = std::vector<SymSet>(fam.begin(), fam.end());
  }
  return out;
}

inline std::map<Sym, std::vector<SymSet>> compute_SP(const OmegaGrammar& g,
                                                     AnalysisCaps caps = {}) {
  GrammarAnalysis an(g, caps);
  std::map<Sym, std::vector<SymSet>> out;
  for (const auto& n : g.nonterminals) {
    const auto& fam = an.SP(n);
    out[n] = std::vector<SymSet>(fam.begin(), fam.end());
  }
  return out;
}

inline std::map<Sym, std::vector<SymSet>> compute_TR1(const OmegaGrammar& g,
                                                      const SymSet& f,
                                                      AnalysisCaps caps = {}) {
  GrammarAnalysis an(g, caps);
  std::map<Sym, std::vector<SymSet>> out;
  for (const auto& n : g.nonterminals) {
    auto fam = an.TR1(n, f);
    out[n] = std::vector<SymSet>(fam.begin(), fam.end());
  }
  return out;
}

}  // namespace omega
