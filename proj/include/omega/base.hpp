#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace omega {

// Symbols are interned as plain strings; devices declare their own alphabets.
using Sym = std::string;
using Word = std::vector<Sym>;
using SymSet = std::set<Sym>;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A construction the source material leaves open; never silently worked around.
struct RefusedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configured cap was exceeded; results are never silently truncated.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Alphabet {
  std::vector<Sym> symbols;  // declaration order is significant

  bool contains(const Sym& s) const {
    return std::find(symbols.begin(), symbols.end(), s) != symbols.end();
  }
  bool empty() const { return symbols.empty(); }
  size_t size() const { return symbols.size(); }

  void check() const {
    if (symbols.empty()) throw ValidationError("alphabet must be non-empty");
    SymSet seen;
    for (const auto& s : symbols) {
      if (s.empty()) throw ValidationError("empty symbol in alphabet");
      if (!seen.insert(s).second)
        throw ValidationError("duplicate symbol in alphabet: " + s);
    }
  }

  bool operator==(const Alphabet& o) const { return symbols == o.symbols; }
};

inline std::string join(const std::vector<std::string>& xs,
                        const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

template <typename T>
std::set<T> set_union(const std::set<T>& a, const std::set<T>& b) {
  std::set<T> r = a;
  r.insert(b.begin(), b.end());
  return r;
}

template <typename T>
bool intersects(const std::set<T>& a, const std::set<T>& b) {
  auto it = a.begin();
  auto jt = b.begin();
  while (it != a.end() && jt != b.end()) {
    if (*it < *jt)
      ++it;
    else if (*jt < *it)
      ++jt;
    else
      return true;
  }
  return false;
}

template <typename T>
bool is_subset(const std::set<T>& a, const std::set<T>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace omega
