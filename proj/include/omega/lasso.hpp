#pragma once

#include <cstddef>

#include "omega/base.hpp"

namespace omega {

// An ultimately periodic omega-word u v^w, stored as stem u and loop v.
struct LassoWord {
  Word stem;
  Word loop;  // non-empty

  LassoWord() = default;
  LassoWord(Word stem, Word loop) : stem(std::move(stem)), loop(std::move(loop)) {
    if (this->loop.empty())
      throw ValidationError("lasso loop must be non-empty");
  }

  // Symbol at 0-based position i of the denoted omega-word.
  const Sym& at(size_t i) const {
    if (i < stem.size()) return stem[i];
    return loop[(i - stem.size()) % loop.size()];
  }

  size_t skeleton() const { return stem.size() + loop.size(); }

  Word expand(size_t n) const {
    Word out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(at(i));
    return out;
  }

  bool operator==(const LassoWord& o) const {
    return stem == o.stem && loop == o.loop;
  }
  bool operator<(const LassoWord& o) const {
    if (stem != o.stem) return stem < o.stem;
    return loop < o.loop;
  }
};

// Canonical representative of the same omega-word: loop reduced to its
// primitive root, then trailing stem symbols equal to the trailing loop
// symbol rotated into the loop until the stem is shortest.
inline LassoWord lasso_normalize(const LassoWord& w) {
  if (w.loop.empty()) throw ValidationError("lasso loop must be non-empty");
  Word loop = w.loop;
  for (size_t p = 1; p <= loop.size() / 2; ++p) {
    if (loop.size() % p != 0) continue;
    bool periodic = true;
    for (size_t i = p; i < loop.size() && periodic; ++i)
      periodic = loop[i] == loop[i - p];
    if (periodic) {
      loop.resize(p);
      break;
    }
  }
  Word stem = w.stem;
  while (!stem.empty() && stem.back() == loop.back()) {
    loop.pop_back();
    loop.insert(loop.begin(), stem.back());
    stem.pop_back();
  }
  return LassoWord(std::move(stem), std::move(loop));
}

// Lasso literal syntax: u(v)^w. Symbols are single characters unless
// multi_symbol is set, in which case they are whitespace-separated.
inline LassoWord parse_lasso(const std::string& text, bool multi_symbol = false) {
  auto bad = [&](const std::string& msg) {
    return SyntaxError("lasso literal: " + msg, 1, 1);
  };
  size_t open = text.find('(');
  if (open == std::string::npos) throw bad("missing '('");
  size_t close = text.rfind(')');
  if (close == std::string::npos || close < open) throw bad("missing ')'");
  std::string tail = text.substr(close + 1);
  // allow surrounding whitespace around ^w
  size_t t0 = tail.find_first_not_of(" \t");
  if (t0 == std::string::npos || tail.substr(t0) != "^w")
    throw bad("expected '^w' after loop");
  std::string stem_text = text.substr(0, open);
  std::string loop_text = text.substr(open + 1, close - open - 1);
  auto scan = [&](const std::string& s) {
    Word out;
    if (multi_symbol) {
      std::string cur;
      for (char c : s + " ") {
        if (c == ' ' || c == '\t') {
          if (!cur.empty()) out.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
    } else {
      for (char c : s) {
        if (c == ' ' || c == '\t') continue;
        out.push_back(std::string(1, c));
      }
    }
    return out;
  };
  Word stem = scan(stem_text);
  Word loop = scan(loop_text);
  if (loop.empty()) throw bad("loop must be non-empty");
  return LassoWord(std::move(stem), std::move(loop));
}

inline std::string print_lasso(const LassoWord& w, bool multi_symbol = false) {
  const char* sep = multi_symbol ? " " : "";
  std::string out = join(w.stem, sep);
  if (multi_symbol && !w.stem.empty()) out += " ";
  out += "(" + join(w.loop, sep) + ")^w";
  return out;
}

}  // namespace omega
