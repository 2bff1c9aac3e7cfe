#pragma once

#include "omega/acceptance.hpp"
#include "omega/base.hpp"
#include "omega/lasso.hpp"

namespace omega {

// ---------------------------------------------------------------------------
// Device models. All immutable after construction; operations are pure.
// ---------------------------------------------------------------------------

struct OmegaFSA {
  struct Trans {
    Sym from;
    std::optional<Sym> symbol;  // nullopt = epsilon
    Sym to;
  };
  std::string name = "fsa";
  Alphabet alphabet;
  std::vector<Sym> states;
  Sym start;
  std::vector<Trans> transitions;
  Family family;
  bool deterministic = false;
};

struct OmegaPDA {
  struct Trans {
    Sym from;
    std::optional<Sym> symbol;  // nullopt = epsilon
    Sym stack_top;
    Sym to;
    Word push;  // leftmost symbol ends on top
  };
  std::string name = "pda";
  Alphabet alphabet;
  std::vector<Sym> states;
  Sym start;
  std::vector<Sym> stack_alphabet;
  Sym start_stack;
  std::vector<Trans> transitions;
  Family family;
  bool deterministic = false;
};

enum class Move { L, R, S };

inline std::string to_string(Move m) {
  switch (m) {
    case Move::L: return "L";
    case Move::R: return "R";
    default: return "S";
  }
}

struct OmegaTM {
  struct Trans {
    Sym from;
    Word read;  // one symbol per tape
    Sym to;
    Word write;
    std::vector<Move> move;
  };
  std::string name = "tm";
  Alphabet alphabet;                // input alphabet Sigma
  std::vector<Sym> tape_alphabet;   // Gamma, contains Sigma
  std::optional<Sym> blank;         // required for m >= 2
  int tapes = 1;
  std::vector<Sym> states;
  Sym start;
  std::vector<Trans> transitions;
  Family family;
  bool deterministic = false;
};

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

struct FsaConfig {
  Sym state;
  long offset = 0;  // input symbols consumed so far

  bool operator==(const FsaConfig& o) const {
    return state == o.state && offset == o.offset;
  }
};

struct PdaConfig {
  Sym state;
  Word stack;  // front = top of stack
  long offset = 0;

  bool operator==(const PdaConfig& o) const {
    return state == o.state && stack == o.stack && offset == o.offset;
  }
};

// Finite-support tape over an implicit background (blank, or the lazily
// materialized omega-input on tape 1).
struct TmTape {
  std::map<long, Sym> cells;  // 1-indexed

  bool operator==(const TmTape& o) const { return cells == o.cells; }
  bool operator<(const TmTape& o) const { return cells < o.cells; }
};

struct TmConfig {
  Sym state;
  std::vector<TmTape> tapes;
  std::vector<long> heads;        // 1-indexed
  long scanned_frontier = 0;      // rightmost tape-1 cell read so far
  std::map<long, int> scan_counts;  // tape-1 oscillation bookkeeping

  bool operator==(const TmConfig& o) const {
    return state == o.state && tapes == o.tapes && heads == o.heads &&
           scanned_frontier == o.scanned_frontier;
  }
};

// Tape-1 background comes from the input word; other tapes from blank.
inline const Sym& tm_read_cell(const OmegaTM& tm, const TmConfig& c, int tape,
                               long pos, const LassoWord& word) {
  const auto& t = c.tapes[tape];
  auto it = t.cells.find(pos);
  if (it != t.cells.end()) return it->second;
  if (tape == 0) return word.at(static_cast<size_t>(pos - 1));
  if (!tm.blank) throw ValidationError("multi-tape machine requires a blank");
  return *tm.blank;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

inline std::vector<std::string> validate(const OmegaFSA& a) {
  std::vector<std::string> out;
  SymSet qs(a.states.begin(), a.states.end());
  if (a.states.empty()) out.push_back("state set is empty");
  if (qs.size() != a.states.size()) out.push_back("duplicate state");
  if (!qs.count(a.start)) out.push_back("start state not in Q");
  if (a.alphabet.empty()) out.push_back("alphabet is empty");
  for (const auto& t : a.transitions) {
    if (!qs.count(t.from)) out.push_back("transition source not in Q");
    if (!qs.count(t.to)) out.push_back("transition target not in Q");
    if (t.symbol && !a.alphabet.contains(*t.symbol))
      out.push_back("transition symbol not in alphabet: " + *t.symbol);
  }
  for (const auto& e : a.family.universe)
    if (!qs.count(e)) out.push_back("family universe element not in Q: " + e);
  if (a.deterministic) {
    std::set<std::pair<Sym, Sym>> seen;
    for (const auto& t : a.transitions) {
      if (!t.symbol) {
        out.push_back("deterministic flag set but epsilon-transition present");
        continue;
      }
      if (!seen.insert({t.from, *t.symbol}).second)
        out.push_back("deterministic flag set but (state,symbol) has two successors");
    }
  }
  return out;
}

inline std::vector<std::string> validate(const OmegaPDA& d) {
  std::vector<std::string> out;
  SymSet qs(d.states.begin(), d.states.end());
  SymSet gs(d.stack_alphabet.begin(), d.stack_alphabet.end());
  if (qs.size() != d.states.size()) out.push_back("duplicate state");
  if (!qs.count(d.start)) out.push_back("start state not in Q");
  if (!gs.count(d.start_stack)) out.push_back("start stack symbol not in Gamma");
  for (const auto& t : d.transitions) {
    if (!qs.count(t.from)) out.push_back("transition source not in Q");
    if (!qs.count(t.to)) out.push_back("transition target not in Q");
    if (t.symbol && !d.alphabet.contains(*t.symbol))
      out.push_back("transition symbol not in alphabet: " + *t.symbol);
    if (!gs.count(t.stack_top))
      out.push_back("transition stack top not in Gamma: " + t.stack_top);
    for (const auto& g : t.push)
      if (!gs.count(g)) out.push_back("pushed symbol not in Gamma: " + g);
  }
  for (const auto& e : d.family.universe)
    if (!qs.count(e)) out.push_back("family universe element not in Q: " + e);
  if (d.deterministic) {
    std::set<std::tuple<Sym, std::optional<Sym>, Sym>> seen;
    std::set<std::pair<Sym, Sym>> has_eps;
    for (const auto& t : d.transitions) {
      if (!seen.insert({t.from, t.symbol, t.stack_top}).second)
        out.push_back("deterministic flag set but transition relation branches");
      if (!t.symbol) has_eps.insert({t.from, t.stack_top});
    }
    for (const auto& t : d.transitions)
      if (t.symbol && has_eps.count({t.from, t.stack_top}))
        out.push_back(
            "deterministic flag set but state mixes epsilon and input moves");
  }
  return out;
}

inline std::vector<std::string> validate(const OmegaTM& m) {
  std::vector<std::string> out;
  SymSet qs(m.states.begin(), m.states.end());
  SymSet gs(m.tape_alphabet.begin(), m.tape_alphabet.end());
  if (qs.size() != m.states.size()) out.push_back("duplicate state");
  if (!qs.count(m.start)) out.push_back("start state not in Q");
  if (m.tapes < 1) out.push_back("tape count must be at least 1");
  for (const auto& a : m.alphabet.symbols)
    if (!gs.count(a)) out.push_back("input symbol not in tape alphabet: " + a);
  if (m.blank) {
    if (!gs.count(*m.blank)) out.push_back("blank not in tape alphabet");
    if (m.alphabet.contains(*m.blank))
      out.push_back("blank must not be an input symbol");
  } else if (m.tapes >= 2) {
    out.push_back("multi-tape machine must declare a blank");
  }
  size_t mt = static_cast<size_t>(m.tapes);
  for (const auto& t : m.transitions) {
    if (!qs.count(t.from)) out.push_back("transition source not in Q");
    if (!qs.count(t.to)) out.push_back("transition target not in Q");
    if (t.read.size() != mt || t.write.size() != mt || t.move.size() != mt)
      out.push_back("transition arity does not match tape count");
    for (const auto& g : t.read)
      if (!gs.count(g)) out.push_back("read symbol not in tape alphabet: " + g);
    for (const auto& g : t.write)
      if (!gs.count(g)) out.push_back("write symbol not in tape alphabet: " + g);
  }
  for (const auto& e : m.family.universe)
    if (!qs.count(e)) out.push_back("family universe element not in Q: " + e);
  if (m.deterministic) {
    std::set<std::pair<Sym, Word>> seen;
    for (const auto& t : m.transitions)
      if (!seen.insert({t.from, t.read}).second)
        out.push_back("deterministic flag set but (state,read) has two successors");
  }
  return out;
}

// ---------------------------------------------------------------------------
// step: all one-step successors of a configuration on a lasso word.
// `consumed` is 0 or 1 input symbols; for TMs it counts first-tape head
// advancement past previously unscanned cells.
// ---------------------------------------------------------------------------

template <typename Config>
struct Successor {
  Config config;
  int consumed = 0;
  Sym state_entered;
  Sym label;  // transition identity, for certificates and run logs
};

inline std::string fsa_trans_label(const OmegaFSA::Trans& t) {
  return t.from + " " + (t.symbol ? *t.symbol : "eps") + " -> " + t.to;
}

inline std::vector<Successor<FsaConfig>> step(const OmegaFSA& a,
                                              const FsaConfig& c,
                                              const LassoWord& word) {
  if (c.offset < 0) throw ValidationError("malformed config: negative offset");
  std::vector<Successor<FsaConfig>> out;
  const Sym& next = word.at(static_cast<size_t>(c.offset));
  for (const auto& t : a.transitions) {
    if (t.from != c.state) continue;
    if (!t.symbol) {
      out.push_back({{t.to, c.offset}, 0, t.to, fsa_trans_label(t)});
    } else if (*t.symbol == next) {
      out.push_back({{t.to, c.offset + 1}, 1, t.to, fsa_trans_label(t)});
    }
  }
  return out;
}

inline std::string pda_trans_label(const OmegaPDA::Trans& t) {
  return t.from + " " + (t.symbol ? *t.symbol : "eps") + " " + t.stack_top +
         " -> " + t.to + " " + (t.push.empty() ? "eps" : join(t.push, ""));
}

inline std::vector<Successor<PdaConfig>> step(const OmegaPDA& d,
                                              const PdaConfig& c,
                                              const LassoWord& word) {
  if (c.offset < 0) throw ValidationError("malformed config: negative offset");
  std::vector<Successor<PdaConfig>> out;
  if (c.stack.empty()) return out;  // no move from an empty stack
  const Sym& top = c.stack.front();
  const Sym& next = word.at(static_cast<size_t>(c.offset));
  for (const auto& t : d.transitions) {
    if (t.from != c.state || t.stack_top != top) continue;
    int consumed;
    if (!t.symbol)
      consumed = 0;
    else if (*t.symbol == next)
      consumed = 1;
    else
      continue;
    PdaConfig nc;
    nc.state = t.to;
    nc.stack = t.push;
    nc.stack.insert(nc.stack.end(), c.stack.begin() + 1, c.stack.end());
    nc.offset = c.offset + consumed;
    out.push_back({std::move(nc), consumed, t.to, pda_trans_label(t)});
  }
  return out;
}

inline std::string tm_trans_label(const OmegaTM::Trans& t) {
  std::string mv;
  for (auto m : t.move) mv += to_string(m);
  return t.from + " [" + join(t.read, ",") + "] -> " + t.to + " [" +
         join(t.write, ",") + "] " + mv;
}

inline std::vector<Successor<TmConfig>> step(const OmegaTM& m,
                                             const TmConfig& c,
                                             const LassoWord& word,
                                             int oscillation_threshold = 64,
                                             bool* pruned_flag = nullptr) {
  size_t mt = static_cast<size_t>(m.tapes);
  if (c.tapes.size() != mt || c.heads.size() != mt)
    throw ValidationError("malformed config: tape arity mismatch");
  for (long h : c.heads)
    if (h < 1) throw ValidationError("malformed config: head before cell 1");
  std::vector<Successor<TmConfig>> out;
  Word reads(mt);
  for (size_t i = 0; i < mt; ++i)
    reads[i] = tm_read_cell(m, c, static_cast<int>(i), c.heads[i], word);
  for (const auto& t : m.transitions) {
    if (t.from != c.state || t.read != reads) continue;
    bool legal = true;
    for (size_t i = 0; i < mt; ++i)
      if (t.move[i] == Move::L && c.heads[i] == 1) legal = false;
    if (!legal) continue;  // L at cell 1 is never taken
    TmConfig nc = c;
    nc.state = t.to;
    for (size_t i = 0; i < mt; ++i) {
      nc.tapes[i].cells[c.heads[i]] = t.write[i];
      if (t.move[i] == Move::L) nc.heads[i]--;
      if (t.move[i] == Move::R) nc.heads[i]++;
    }
    // this step scanned tape-1 cell c.heads[0]
    int& cnt = nc.scan_counts[c.heads[0]];
    cnt++;
    if (cnt > oscillation_threshold) {  // oscillating prefix, pruned
      if (pruned_flag) *pruned_flag = true;
      continue;
    }
    int consumed = 0;
    if (c.heads[0] > nc.scanned_frontier) {
      consumed = static_cast<int>(c.heads[0] - nc.scanned_frontier);
      nc.scanned_frontier = c.heads[0];
    }
    out.push_back({std::move(nc), consumed, t.to, tm_trans_label(t)});
  }
  return out;
}

inline FsaConfig initial_config(const OmegaFSA& a) { return {a.start, 0}; }
inline PdaConfig initial_config(const OmegaPDA& d) {
  return {d.start, {d.start_stack}, 0};
}
inline TmConfig initial_config(const OmegaTM& m) {
  TmConfig c;
  c.state = m.start;
  c.tapes.resize(m.tapes);
  c.heads.assign(m.tapes, 1);
  return c;
}

// ---------------------------------------------------------------------------
// to_unique_designated: single designated set, for rho in {cap, subseteq}.
// ---------------------------------------------------------------------------

inline OmegaFSA to_unique_designated(const OmegaFSA& a,
                                     const AcceptanceMode& mode) {
  if (mode.rho == Rho::eq)
    throw RefusedError("unique designated set: lemma does not cover rho = =");
  auto members = expand_family(a.family);
  if (members.size() <= 1) return a;
  OmegaFSA out = a;
  out.family = Family::empty(SymSet(a.states.begin(), a.states.end()));
  if (mode.rho == Rho::cap) {
    SymSet u;
    for (const auto& m : members) u.insert(m.begin(), m.end());
    out.family.add_member(u);
    return out;
  }
  // rho = subseteq: one copy of the device per member, epsilon-dispatch from
  // a fresh start; the fresh start joins the unique designated set.
  out = OmegaFSA{};
  out.name = a.name + "_u";
  out.alphabet = a.alphabet;
  Sym fresh = "u0";
  out.states.push_back(fresh);
  out.start = fresh;
  SymSet member_union{fresh};
  for (size_t k = 0; k < members.size(); ++k) {
    auto tag = [&](const Sym& q) { return q + "@" + std::to_string(k); };
    for (const auto& q : a.states) out.states.push_back(tag(q));
    out.transitions.push_back({fresh, std::nullopt, tag(a.start)});
    for (const auto& t : a.transitions)
      out.transitions.push_back({tag(t.from), t.symbol, tag(t.to)});
    for (const auto& q : members[k]) member_union.insert(tag(q));
  }
  out.family = Family::empty(SymSet(out.states.begin(), out.states.end()));
  out.family.add_member(member_union);
  return out;
}

// ---------------------------------------------------------------------------
// ensure_property_c: a fresh non-designated sink catches every (state,symbol)
// pair that cannot make progress, so every omega-word has a legal run.
// ---------------------------------------------------------------------------

inline bool can_consume(const OmegaFSA& a, const Sym& q, const Sym& sym) {
  // true if from q some epsilon-path reaches a state with a `sym` edge
  SymSet seen{q};
  std::vector<Sym> work{q};
  while (!work.empty()) {
    Sym cur = work.back();
    work.pop_back();
    for (const auto& t : a.transitions) {
      if (t.from != cur) continue;
      if (t.symbol && *t.symbol == sym) return true;
      if (!t.symbol && seen.insert(t.to).second) work.push_back(t.to);
    }
  }
  return false;
}

inline bool has_property_c(const OmegaFSA& a) {
  for (const auto& q : a.states)
    for (const auto& s : a.alphabet.symbols)
      if (!can_consume(a, q, s)) return false;
  return true;
}

inline OmegaFSA ensure_property_c(const OmegaFSA& a) {
  if (has_property_c(a)) return a;
  OmegaFSA out = a;
  Sym sink = "sink";
  while (std::find(out.states.begin(), out.states.end(), sink) !=
         out.states.end())
    sink += "_";
  out.states.push_back(sink);
  for (const auto& s : out.alphabet.symbols)
    out.transitions.push_back({sink, s, sink});
  for (const auto& q : a.states)
    for (const auto& s : a.alphabet.symbols)
      if (!can_consume(a, q, s)) out.transitions.push_back({q, s, sink});
  out.family.universe.insert(sink);  // never a member of any designated set
  out.deterministic = a.deterministic;
  return out;
}

}  // namespace omega
