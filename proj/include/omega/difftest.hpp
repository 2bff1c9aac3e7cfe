#pragma once

#include "omega/bounded.hpp"

namespace omega {

// All canonical lasso words with |u| <= max_stem and |v| <= max_loop,
// ordered by skeleton length then lexicographically.
inline std::vector<LassoWord> enumerate_lassos(const Alphabet& alphabet,
                                               size_t max_stem,
                                               size_t max_loop) {
  if (max_loop < 1) throw ValidationError("maxLoop must be at least 1");
  alphabet.check();
  std::set<LassoWord> seen;
  std::vector<Word> stems{{}};
  for (size_t n = 1; n <= max_stem; ++n) {
    std::vector<Word> next;
    for (const auto& w : stems)
      if (w.size() == n - 1)
        for (const auto& s : alphabet.symbols) {
          Word w2 = w;
          w2.push_back(s);
          next.push_back(w2);
        }
    stems.insert(stems.end(), next.begin(), next.end());
  }
  std::vector<Word> loops;
  std::vector<Word> frontier{{}};
  for (size_t n = 1; n <= max_loop; ++n) {
    std::vector<Word> next;
    for (const auto& w : frontier)
      for (const auto& s : alphabet.symbols) {
        Word w2 = w;
        w2.push_back(s);
        next.push_back(w2);
      }
    loops.insert(loops.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  for (const auto& u : stems)
    for (const auto& v : loops) seen.insert(lasso_normalize(LassoWord(u, v)));
  std::vector<LassoWord> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(), [](const LassoWord& a, const LassoWord& b) {
    if (a.skeleton() != b.skeleton()) return a.skeleton() < b.skeleton();
    if (a.stem != b.stem) return a.stem < b.stem;
    return a.loop < b.loop;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Differential testing
// ---------------------------------------------------------------------------

struct DiffOutcome {
  LassoWord word;
  Verdict a;
  Verdict b;
  bool contradiction() const {
    return (a.kind == VerdictKind::Accepted && b.kind == VerdictKind::Rejected) ||
           (a.kind == VerdictKind::Rejected && b.kind == VerdictKind::Accepted);
  }
};

struct DiffReport {
  std::vector<DiffOutcome> outcomes;
  size_t words_total = 0;
  size_t both_accepted = 0;
  size_t both_rejected = 0;
  size_t unknown = 0;  // at least one Unknown, no contradiction
  size_t contradictions = 0;
  std::vector<size_t> contradiction_indices;

  std::string summary() const {
    std::string s;
    s += "words_total=" + std::to_string(words_total) + "\n";
    s += "accepted=" + std::to_string(both_accepted) + "\n";
    s += "rejected=" + std::to_string(both_rejected) + "\n";
    s += "unknown=" + std::to_string(unknown) + "\n";
    s += "contradictions=" + std::to_string(contradictions) + "\n";
    return s;
  }
};

// Membership through the strongest decider available for the device: exact
// for FSAs, bounded certificate search otherwise.
inline Verdict decide_member(const Device& dev, const LassoWord& word,
                             const AcceptanceMode& mode,
                             const SearchOptions& opts = {}) {
  if (auto* a = std::get_if<OmegaFSA>(&dev)) {
    AcceptanceMode m = mode;
    m.pi = Pi::none;
    if (fsa_lasso_member(*a, word, m)) {
      // surface a concrete certificate alongside the exact decision
      Verdict v = bounded_member(dev, word, m,
                                 {static_cast<long>(a->states.size() *
                                                    (word.skeleton() + 1) * 4 + 64),
                                  opts.oscillation_threshold});
      if (v.kind == VerdictKind::Accepted) return v;
      Verdict av;
      av.kind = VerdictKind::Accepted;
      av.reason = "exact product-graph decision";
      return av;
    }
    return Verdict::rejected("exact product-graph decision");
  }
  return bounded_member(dev, word, mode, opts);
}

inline DiffReport difftest(const Device& dev_a, const Device& dev_b,
                           const AcceptanceMode& mode_a,
                           const AcceptanceMode& mode_b,
                           const std::vector<LassoWord>& corpus,
                           const SearchOptions& opts = {}) {
  {
    auto a = device_alphabet(dev_a).symbols;
    auto b = device_alphabet(dev_b).symbols;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ValidationError("difftest requires a shared alphabet");
  }
  DiffReport report;
  for (const auto& w : corpus) {
    DiffOutcome o;
    o.word = w;
    o.a = decide_member(dev_a, w, mode_a, opts);
    o.b = decide_member(dev_b, w, mode_b, opts);
    report.outcomes.push_back(std::move(o));
  }
  report.words_total = report.outcomes.size();
  for (size_t i = 0; i < report.outcomes.size(); ++i) {
    const auto& o = report.outcomes[i];
    if (o.contradiction()) {
      report.contradictions++;
      report.contradiction_indices.push_back(i);
    } else if (o.a.kind == VerdictKind::Unknown ||
               o.b.kind == VerdictKind::Unknown) {
      report.unknown++;
    } else if (o.a.kind == VerdictKind::Accepted) {
      report.both_accepted++;
    } else {
      report.both_rejected++;
    }
  }
  return report;
}

}  // namespace omega
