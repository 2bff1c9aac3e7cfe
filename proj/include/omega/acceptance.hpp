#pragma once

#include <variant>

#include "omega/base.hpp"

namespace omega {

enum class Sigma { ran, inf };
enum class Rho { cap, subseteq, eq };
enum class Pi { leftmost, normal, none };

struct AcceptanceMode {
  Sigma sigma = Sigma::inf;
  Rho rho = Rho::eq;
  Pi pi = Pi::none;

  bool operator==(const AcceptanceMode& o) const {
    return sigma == o.sigma && rho == o.rho && pi == o.pi;
  }
};

inline std::string to_string(Sigma s) { return s == Sigma::ran ? "ran" : "inf"; }
inline std::string to_string(Rho r) {
  switch (r) {
    case Rho::cap: return "cap";
    case Rho::subseteq: return "subseteq";
    default: return "eq";
  }
}
inline std::string to_string(Pi p) {
  switch (p) {
    case Pi::leftmost: return "l";
    case Pi::normal: return "nl";
    default: return "none";
  }
}
inline std::string to_string(const AcceptanceMode& m) {
  std::string out = "(" + to_string(m.sigma) + "," + to_string(m.rho);
  if (m.pi != Pi::none) out += "," + to_string(m.pi);
  return out + ")";
}

inline const std::vector<std::pair<Sigma, Rho>>& all_sigma_rho() {
  static const std::vector<std::pair<Sigma, Rho>> v = {
      {Sigma::ran, Rho::cap},      {Sigma::ran, Rho::subseteq},
      {Sigma::ran, Rho::eq},       {Sigma::inf, Rho::cap},
      {Sigma::inf, Rho::subseteq}, {Sigma::inf, Rho::eq}};
  return v;
}

// ran/inf sets of an eventually periodic sequence prefix.cycle^w.
struct OccurrenceProfile {
  SymSet ranSet;
  SymSet infSet;  // always a subset of ranSet
};

template <typename Seq>
OccurrenceProfile profile_of(const Seq& prefix, const Seq& cycle) {
  if (cycle.empty())
    throw ValidationError("non-eventually-infinite sequence: empty cycle");
  OccurrenceProfile p;
  p.infSet.insert(cycle.begin(), cycle.end());
  p.ranSet = p.infSet;
  p.ranSet.insert(prefix.begin(), prefix.end());
  return p;
}

// A set of designated subsets of a finite universe. Three exact
// representations are supported, because several constructions produce
// families far too large to enumerate member by member:
//   explicit  - listed members
//   interval  - { base + H | H <= pad }, optionally requiring H non-empty
//   mapped-eq - { H <= dom(img) | union of img over H is a member of target }
// A family is the union of its blocks.
struct Family {
  struct Explicit {
    std::vector<SymSet> members;
  };
  struct Interval {
    SymSet base;
    SymSet pad;  // disjoint padding elements, any subset may join base
    bool nonempty_pad = false;
  };
  struct MappedEq {
    std::map<Sym, SymSet> img;
    std::vector<SymSet> targets;
  };
  using Block = std::variant<Explicit, Interval, MappedEq>;

  SymSet universe;
  std::vector<Block> blocks;

  static Family of(std::vector<SymSet> members, SymSet universe = {}) {
    Family f;
    f.universe = std::move(universe);
    f.blocks.push_back(Explicit{std::move(members)});
    return f;
  }
  static Family empty(SymSet universe = {}) {
    Family f;
    f.universe = std::move(universe);
    return f;
  }

  void add_member(SymSet m) {
    if (blocks.empty() || !std::holds_alternative<Explicit>(blocks.back()))
      blocks.push_back(Explicit{});
    std::get<Explicit>(blocks.back()).members.push_back(std::move(m));
  }
  void add_interval(SymSet base, SymSet pad, bool nonempty_pad = false) {
    for (const auto& e : base) pad.erase(e);
    blocks.push_back(Interval{std::move(base), std::move(pad), nonempty_pad});
  }
  void add_mapped_eq(std::map<Sym, SymSet> img, std::vector<SymSet> targets) {
    blocks.push_back(MappedEq{std::move(img), std::move(targets)});
  }

  bool trivially_empty() const { return blocks.empty(); }

  // Rename every universe element; exact for all representations.
  Family relabel(const std::map<Sym, Sym>& ren) const {
    auto rn = [&](const Sym& s) {
      auto it = ren.find(s);
      return it == ren.end() ? s : it->second;
    };
    auto rnset = [&](const SymSet& xs) {
      SymSet out;
      for (const auto& x : xs) out.insert(rn(x));
      return out;
    };
    Family f;
    f.universe = rnset(universe);
    for (const auto& b : blocks) {
      if (auto* e = std::get_if<Explicit>(&b)) {
        Explicit e2;
        for (const auto& m : e->members) e2.members.push_back(rnset(m));
        f.blocks.push_back(std::move(e2));
      } else if (auto* iv = std::get_if<Interval>(&b)) {
        f.blocks.push_back(
            Interval{rnset(iv->base), rnset(iv->pad), iv->nonempty_pad});
      } else {
        const auto& m = std::get<MappedEq>(b);
        MappedEq m2;
        m2.targets = m.targets;
        for (const auto& [k, v] : m.img) m2.img[rn(k)] = v;
        f.blocks.push_back(std::move(m2));
      }
    }
    return f;
  }
};

namespace detail {

inline bool sat_explicit(Rho rho, const SymSet& s, const Family::Explicit& e) {
  for (const auto& m : e.members) {
    switch (rho) {
      case Rho::cap:
        if (intersects(s, m)) return true;
        break;
      case Rho::subseteq:
        if (is_subset(s, m)) return true;
        break;
      case Rho::eq:
        if (s == m) return true;
        break;
    }
  }
  return false;
}

inline bool sat_interval(Rho rho, const SymSet& s, const Family::Interval& iv) {
  const bool block_empty = iv.nonempty_pad && iv.pad.empty();
  if (block_empty) return false;
  switch (rho) {
    case Rho::cap:
      if (intersects(s, iv.base)) return true;
      return intersects(s, iv.pad);  // pick that pad element into the member
    case Rho::subseteq: {
      SymSet top = set_union(iv.base, iv.pad);
      return is_subset(s, top);
    }
    case Rho::eq: {
      if (!is_subset(iv.base, s)) return false;
      SymSet extra;
      std::set_difference(s.begin(), s.end(), iv.base.begin(), iv.base.end(),
                          std::inserter(extra, extra.begin()));
      if (!is_subset(extra, iv.pad)) return false;
      if (!iv.nonempty_pad) return true;
      return !extra.empty() || intersects(s, iv.pad);
    }
  }
  return false;
}

inline SymSet mapped_image(const Family::MappedEq& m, const SymSet& h) {
  SymSet out;
  for (const auto& e : h) {
    auto it = m.img.find(e);
    if (it == m.img.end()) return {};  // caller checks domain first
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

inline bool in_mapped_domain(const Family::MappedEq& m, const SymSet& h) {
  for (const auto& e : h)
    if (!m.img.count(e)) return false;
  return true;
}

inline bool sat_mapped(Rho rho, const SymSet& s, const Family::MappedEq& m) {
  // candidates(F) = elements whose image fits inside F
  auto candidates = [&](const SymSet& f) {
    SymSet out;
    for (const auto& [e, im] : m.img)
      if (is_subset(im, f)) out.insert(e);
    return out;
  };
  switch (rho) {
    case Rho::eq:
      if (!in_mapped_domain(m, s)) return false;
      for (const auto& f : m.targets)
        if (mapped_image(m, s) == f) return true;
      return false;
    case Rho::subseteq: {
      if (!in_mapped_domain(m, s)) return false;
      for (const auto& f : m.targets) {
        SymSet cand = candidates(f);
        if (!is_subset(s, cand)) continue;
        // need some H with s <= H <= cand and img(H) exactly f
        SymSet reach = mapped_image(m, cand);
        if (is_subset(f, reach)) return true;
      }
      return false;
    }
    case Rho::cap: {
      for (const auto& f : m.targets) {
        SymSet cand = candidates(f);
        SymSet reach = mapped_image(m, cand);
        if (!is_subset(f, reach)) continue;  // f not realizable at all
        if (intersects(s, cand)) return true;
      }
      return false;
    }
  }
  return false;
}

}  // namespace detail

// Truth of (exists F in family) sigma(profile) rho F. Table-driven on rho;
// pi plays no role here.
inline bool satisfies(const AcceptanceMode& mode, const OccurrenceProfile& p,
                      const Family& fam) {
  const SymSet& s = mode.sigma == Sigma::ran ? p.ranSet : p.infSet;
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      if (detail::sat_explicit(mode.rho, s, *e)) return true;
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      if (detail::sat_interval(mode.rho, s, *iv)) return true;
    } else {
      if (detail::sat_mapped(mode.rho, s, std::get<Family::MappedEq>(b)))
        return true;
    }
  }
  return false;
}

// Materialize every member. Used by tests, printing and the constructions
// that must iterate members; caps guard the exponential representations.
inline std::vector<SymSet> expand_family(const Family& fam, size_t cap = 4096) {
  std::set<SymSet> out;
  auto push = [&](SymSet m) {
    out.insert(std::move(m));
    if (out.size() > cap)
      throw ResourceError("designated family exceeds cap of " +
                          std::to_string(cap) + " members");
  };
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      for (const auto& m : e->members) push(m);
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      std::vector<Sym> pad(iv->pad.begin(), iv->pad.end());
      if (pad.size() > 20)
        throw ResourceError("interval family pad too large to expand");
      size_t n = size_t{1} << pad.size();
      for (size_t mask = 0; mask < n; ++mask) {
        if (iv->nonempty_pad && mask == 0) continue;
        SymSet m = iv->base;
        for (size_t i = 0; i < pad.size(); ++i)
          if (mask & (size_t{1} << i)) m.insert(pad[i]);
        push(std::move(m));
      }
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      std::vector<Sym> dom;
      for (const auto& [k, v] : m.img) dom.push_back(k);
      if (dom.size() > 20)
        throw ResourceError("mapped-eq family domain too large to expand");
      size_t n = size_t{1} << dom.size();
      for (size_t mask = 0; mask < n; ++mask) {
        SymSet h;
        for (size_t i = 0; i < dom.size(); ++i)
          if (mask & (size_t{1} << i)) h.insert(dom[i]);
        SymSet im = detail::mapped_image(m, h);
        for (const auto& t : m.targets)
          if (im == t) {
            push(h);
            break;
          }
      }
    }
  }
  return std::vector<SymSet>(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// Derived views used by the membership deciders. Each mirrors the member-set
// semantics of the three representations exactly.
// ---------------------------------------------------------------------------

// Elements x with satisfies((sigma,cap), {x}) — i.e. x lies in some member.
inline SymSet cap_useful_elems(const Family& fam) {
  SymSet out;
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      for (const auto& m : e->members) out.insert(m.begin(), m.end());
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      if (iv->nonempty_pad && iv->pad.empty()) continue;
      out.insert(iv->base.begin(), iv->base.end());
      out.insert(iv->pad.begin(), iv->pad.end());
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      for (const auto& f : m.targets) {
        SymSet cand, reach;
        for (const auto& [e2, im] : m.img)
          if (is_subset(im, f)) {
            cand.insert(e2);
            reach.insert(im.begin(), im.end());
          }
        if (is_subset(f, reach)) out.insert(cand.begin(), cand.end());
      }
    }
  }
  return out;
}

// Maximal sets T such that sigma(f) <= T implies membership in some member.
inline std::vector<SymSet> subseteq_tops(const Family& fam) {
  std::vector<SymSet> out;
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      for (const auto& m : e->members) out.push_back(m);
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      if (iv->nonempty_pad && iv->pad.empty()) continue;
      out.push_back(set_union(iv->base, iv->pad));
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      for (const auto& f : m.targets) {
        SymSet cand, reach;
        for (const auto& [e2, im] : m.img)
          if (is_subset(im, f)) {
            cand.insert(e2);
            reach.insert(im.begin(), im.end());
          }
        if (is_subset(f, reach)) out.push_back(cand);
      }
    }
  }
  return out;
}

// sigma(f) is a member iff for some block: sigma(f) <= restrict and
// sigma(f) meets every hit set.
struct EqBlock {
  SymSet restrict_to;
  std::vector<SymSet> hits;
};

inline std::vector<EqBlock> eq_blocks(const Family& fam) {
  std::vector<EqBlock> out;
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      for (const auto& m : e->members) {
        EqBlock blk{m, {}};
        for (const auto& x : m) blk.hits.push_back(SymSet{x});
        out.push_back(std::move(blk));
      }
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      if (iv->nonempty_pad && iv->pad.empty()) continue;
      EqBlock blk{set_union(iv->base, iv->pad), {}};
      for (const auto& x : iv->base) blk.hits.push_back(SymSet{x});
      if (iv->nonempty_pad) blk.hits.push_back(iv->pad);
      out.push_back(std::move(blk));
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      for (const auto& f : m.targets) {
        SymSet cand, reach;
        for (const auto& [e2, im] : m.img)
          if (is_subset(im, f)) {
            cand.insert(e2);
            reach.insert(im.begin(), im.end());
          }
        if (!is_subset(f, reach)) continue;
        EqBlock blk{cand, {}};
        for (const auto& y : f) {
          SymSet hit;
          for (const auto& e2 : cand)
            if (m.img.at(e2).count(y)) hit.insert(e2);
          blk.hits.push_back(std::move(hit));
        }
        out.push_back(std::move(blk));
      }
    }
  }
  return out;
}

inline void check_family(const Family& fam) {
  auto in_universe = [&](const SymSet& m, const char* what) {
    for (const auto& e : m)
      if (!fam.universe.count(e))
        throw ValidationError(std::string(what) + " element not in universe: " + e);
  };
  for (const auto& b : fam.blocks) {
    if (auto* e = std::get_if<Family::Explicit>(&b)) {
      for (const auto& m : e->members) in_universe(m, "family member");
    } else if (auto* iv = std::get_if<Family::Interval>(&b)) {
      in_universe(iv->base, "interval base");
      in_universe(iv->pad, "interval pad");
    } else {
      const auto& m = std::get<Family::MappedEq>(b);
      SymSet dom;
      for (const auto& [k, v] : m.img) dom.insert(k);
      in_universe(dom, "mapped-eq domain");
    }
  }
}

}  // namespace omega
