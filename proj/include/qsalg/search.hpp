#pragma once

#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "qsalg/gadgets.hpp"
#include "qsalg/words.hpp"

namespace qsalg {

// Post correspondence instance: k tiles of nonempty words over {1..m}.
struct PcpInstance {
  unsigned alphabet_size = 0;
  std::vector<std::pair<Word, Word>> tiles;
  bool claus = false;  // restrict to solutions of the form 1 w k, w over {2..k-1}

  void validate() const {
    if (tiles.empty()) fail(ErrorCode::UsageError, "PCP instance needs at least one tile");
    for (const auto& [top, bottom] : tiles) {
      if (top.empty() || bottom.empty())
        fail(ErrorCode::UsageError, "tile words must be nonempty");
      for (unsigned l : top)
        if (l < 1 || l > alphabet_size) fail(ErrorCode::LetterOutOfRange, "tile letter");
      for (unsigned l : bottom)
        if (l < 1 || l > alphabet_size) fail(ErrorCode::LetterOutOfRange, "tile letter");
    }
    if (claus && tiles.size() < 2)
      fail(ErrorCode::UsageError, "Claus form needs at least two tiles");
  }
};

struct SearchStats {
  size_t nodes = 0;
  size_t deduped = 0;
};

struct SearchOutcome {
  enum class Verdict { witness, exhausted, budget_exceeded };
  Verdict verdict = Verdict::exhausted;
  Word witness;          // nonempty iff verdict == witness
  size_t depth = 0;      // depth reached / witness length
  SearchStats stats;
};

// ---------------------------------------------------------------------------
// PCP: breadth-first search over overhang configurations with a visited set.

namespace detail {

// side: +1 when the top run is ahead by `overhang`, -1 when the bottom is
struct PcpState {
  int side;
  Word overhang;
  bool operator==(const PcpState& o) const { return side == o.side && overhang == o.overhang; }
};

struct PcpStateHash {
  size_t operator()(const PcpState& s) const {
    size_t h = std::hash<int>()(s.side);
    for (unsigned l : s.overhang) h = h * 1000003 + l;
    return h;
  }
};

// appends a tile to a configuration; returns false when the words clash
inline bool pcp_step(const PcpState& cur, const Word& top, const Word& bottom, PcpState& next) {
  // ahead word = overhang + (ahead side's tile); behind word = other tile
  const Word& ahead_tile = cur.side > 0 ? top : bottom;
  const Word& behind_tile = cur.side > 0 ? bottom : top;
  Word ahead = concat(cur.overhang, ahead_tile);
  const Word& behind = behind_tile;
  size_t common = std::min(ahead.size(), behind.size());
  for (size_t i = 0; i < common; ++i)
    if (ahead[i] != behind[i]) return false;
  if (ahead.size() >= behind.size()) {
    next.side = cur.side;
    next.overhang = Word(ahead.begin() + common, ahead.end());
  } else {
    next.side = -cur.side;
    next.overhang = Word(behind.begin() + common, behind.end());
  }
  return true;
}

}  // namespace detail

inline std::pair<Word, Word> pcp_apply(const PcpInstance& inst, const Word& index_word) {
  Word top, bottom;
  for (unsigned i : index_word) {
    top = concat(top, inst.tiles.at(i - 1).first);
    bottom = concat(bottom, inst.tiles.at(i - 1).second);
  }
  return {top, bottom};
}

inline SearchOutcome pcp_search(const PcpInstance& inst, size_t max_overhang, size_t max_depth,
                                bool claus) {
  inst.validate();
  size_t k = inst.tiles.size();
  if (claus && k < 2) fail(ErrorCode::UsageError, "Claus form needs k >= 2");

  struct Node {
    detail::PcpState state;
    size_t parent;
    unsigned tile;
    size_t depth;
  };
  std::vector<Node> nodes;
  std::deque<size_t> frontier;
  std::unordered_set<detail::PcpState, detail::PcpStateHash> visited;
  SearchOutcome out;
  bool pruned = false;

  auto reconstruct = [&](size_t idx, unsigned last_tile) {
    Word w = {last_tile};
    while (idx != size_t(-1)) {
      w.push_back(nodes[idx].tile);
      idx = nodes[idx].parent;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };

  auto start_tiles = [&]() {
    std::vector<unsigned> ts;
    if (claus)
      ts.push_back(1);
    else
      for (unsigned i = 1; i <= k; ++i) ts.push_back(i);
    return ts;
  };

  // seed configurations
  for (unsigned i : start_tiles()) {
    const auto& [top, bottom] = inst.tiles[i - 1];
    detail::PcpState zero{+1, {}};
    detail::PcpState next;
    if (!detail::pcp_step(zero, top, bottom, next)) continue;
    ++out.stats.nodes;
    if (next.overhang.empty()) {
      // single-tile solution; under Claus form the word must still end in k
      if (!claus || (k >= 1 && i == k)) {
        out.verdict = SearchOutcome::Verdict::witness;
        out.witness = {i};
        out.depth = 1;
        auto [t, b] = pcp_apply(inst, out.witness);
        if (t != b) fail(ErrorCode::UsageError, "witness failed exact re-validation");
        return out;
      }
      continue;
    }
    if (next.overhang.size() > max_overhang) {
      pruned = true;
      continue;
    }
    if (!visited.insert(next).second) {
      ++out.stats.deduped;
      continue;
    }
    nodes.push_back({next, size_t(-1), i, 1});
    frontier.push_back(nodes.size() - 1);
  }

  size_t depth_reached = frontier.empty() ? 0 : 1;
  while (!frontier.empty()) {
    size_t idx = frontier.front();
    frontier.pop_front();
    size_t depth = nodes[idx].depth;
    depth_reached = std::max(depth_reached, depth);
    if (depth >= max_depth) continue;

    // continuation tiles; under Claus form middles come from {2..k-1} and
    // the closing tile k is only probed for acceptance
    for (unsigned i = 1; i <= k; ++i) {
      if (claus && (i == 1 || i == k)) continue;
      detail::PcpState next;
      if (!detail::pcp_step(nodes[idx].state, inst.tiles[i - 1].first, inst.tiles[i - 1].second,
                            next))
        continue;
      ++out.stats.nodes;
      if (next.overhang.empty() && !claus) {
        out.verdict = SearchOutcome::Verdict::witness;
        out.witness = reconstruct(idx, i);
        out.depth = out.witness.size();
        auto [t, b] = pcp_apply(inst, out.witness);
        if (t != b) fail(ErrorCode::UsageError, "witness failed exact re-validation");
        return out;
      }
      if (next.overhang.empty() && claus) continue;  // cannot close without tile k
      if (next.overhang.size() > max_overhang) {
        pruned = true;
        continue;
      }
      if (!visited.insert(next).second) {
        ++out.stats.deduped;
        continue;
      }
      nodes.push_back({next, idx, i, depth + 1});
      frontier.push_back(nodes.size() - 1);
    }
    if (claus) {
      detail::PcpState next;
      unsigned i = unsigned(k);
      if (detail::pcp_step(nodes[idx].state, inst.tiles[k - 1].first, inst.tiles[k - 1].second,
                           next)) {
        ++out.stats.nodes;
        if (next.overhang.empty()) {
          out.verdict = SearchOutcome::Verdict::witness;
          out.witness = reconstruct(idx, i);
          out.depth = out.witness.size();
          auto [t, b] = pcp_apply(inst, out.witness);
          if (t != b) fail(ErrorCode::UsageError, "witness failed exact re-validation");
          return out;
        }
      }
    }
  }

  out.verdict = pruned ? SearchOutcome::Verdict::budget_exceeded : SearchOutcome::Verdict::exhausted;
  out.depth = pruned ? depth_reached : max_depth;
  return out;
}

// ---------------------------------------------------------------------------
// Matrix mortality: BFS over exact products with canonical-form dedup.

inline SearchOutcome mortality_search(const std::vector<IMatrix>& maps, size_t max_depth,
                                      size_t node_cap = 2000000) {
  if (maps.empty()) fail(ErrorCode::UsageError, "mortality search needs matrices");
  size_t d = maps[0].rows();
  for (const auto& m : maps)
    if (m.rows() != d || m.cols() != d)
      fail(ErrorCode::DimensionMismatch, "matrices must be square and equal size");

  struct Node {
    IMatrix value;
    size_t parent;
    unsigned letter;
    size_t depth;
  };
  std::vector<Node> nodes;
  std::deque<size_t> frontier;
  std::unordered_set<std::string> visited;
  SearchOutcome out;
  bool pruned = false;

  auto reconstruct = [&](size_t idx) {
    Word w;
    while (idx != size_t(-1)) {
      w.push_back(nodes[idx].letter);
      idx = nodes[idx].parent;
    }
    std::reverse(w.begin(), w.end());
    return w;
  };
  auto check_zero_witness = [&](const Word& w) {
    IMatrix prod = IMatrix::identity(d);
    for (unsigned l : w) prod = prod * maps[l - 1];
    return prod.is_zero();
  };

  auto expand = [&](size_t parent, size_t depth, const IMatrix& base) -> std::optional<Word> {
    for (unsigned i = 1; i <= maps.size(); ++i) {
      IMatrix prod = base * maps[i - 1];
      ++out.stats.nodes;
      if (prod.is_zero()) {
        Word w = parent == size_t(-1) ? Word{i} : concat(reconstruct(parent), {i});
        if (!check_zero_witness(w))
          fail(ErrorCode::UsageError, "mortality witness failed exact re-validation");
        return w;
      }
      if (!visited.insert(prod.key()).second) {
        ++out.stats.deduped;
        continue;
      }
      if (nodes.size() >= node_cap) {
        pruned = true;
        continue;
      }
      nodes.push_back({std::move(prod), parent, i, depth + 1});
      frontier.push_back(nodes.size() - 1);
    }
    return std::nullopt;
  };

  if (max_depth >= 1) {
    if (auto w = expand(size_t(-1), 0, IMatrix::identity(d))) {
      out.verdict = SearchOutcome::Verdict::witness;
      out.witness = *w;
      out.depth = w->size();
      return out;
    }
  }
  size_t depth_reached = 1;
  while (!frontier.empty()) {
    size_t idx = frontier.front();
    frontier.pop_front();
    size_t depth = nodes[idx].depth;
    depth_reached = std::max(depth_reached, depth);
    if (depth >= max_depth) continue;
    IMatrix base = nodes[idx].value;  // copy: expand() may reallocate nodes
    if (auto w = expand(idx, depth, base)) {
      out.verdict = SearchOutcome::Verdict::witness;
      out.witness = *w;
      out.depth = w->size();
      return out;
    }
  }
  out.verdict = pruned ? SearchOutcome::Verdict::budget_exceeded : SearchOutcome::Verdict::exhausted;
  out.depth = pruned ? depth_reached : max_depth;
  return out;
}

// ---------------------------------------------------------------------------
// Fidelity-threshold reachability.

struct ThresholdProblem {
  std::vector<Channel> channels;  // CP+TP certified by the caller/CLI layer
  CMatrix rho;
  CMatrix phi;      // rank-1 projector
  Rational lambda;  // threshold in (0,1)
  std::optional<GadgetBundle> bundle;  // enables the exact block shortcut
};

inline ThresholdProblem threshold_problem(const GadgetBundle& b) {
  ThresholdProblem p;
  p.channels = b.channels;
  p.rho = b.rho;
  p.phi = b.phi;
  p.lambda = b.lambda;
  p.bundle = b;
  return p;
}

namespace detail {

// certified comparison of the full-matrix-path overlap against lambda at
// increasing precision; nullopt when the interval keeps straddling
inline std::optional<bool> revalidate_overlap(const ThresholdProblem& p, const Word& word,
                                              bool strict) {
  for (mpfr_prec_t prec = ambient_precision(); prec <= 4096; prec *= 2) {
    ScopedPrecision sp(prec);
    CMatrix state = p.rho;
    for (size_t k = word.size(); k-- > 0;) state = apply(p.channels[word[k] - 1], state);
    Scalar overlap = fidelity_overlap(p.phi, state);
    Scalar gap = overlap - Scalar(p.lambda);
    if (gap.is_exact()) {
      int s = gap.exact().sign();
      return strict ? s > 0 : s >= 0;
    }
    Interval g = gap.to_interval();
    if (g.is_positive()) return true;
    if (g.is_negative()) return false;
    if (!strict && g.is_point() && mpfr_sgn(g.lo()) == 0) return true;
  }
  return std::nullopt;
}

}  // namespace detail

// Iterative-deepening (level-order) search for a word with
// <phi| T_{w_1} ... T_{w_n}(rho) |phi> > lambda (>= lambda when strict is
// false). Bundle inputs use the exact block shortcut with forward-vector
// dedup; every candidate witness is re-validated on the full matrix path.
inline SearchOutcome threshold_search(const ThresholdProblem& p, bool strict, size_t max_depth,
                                      size_t node_cap = 2000000) {
  if (p.channels.empty()) fail(ErrorCode::UsageError, "threshold search needs channels");
  size_t k = p.channels.size();
  SearchOutcome out;
  bool pruned = false;
  bool undecided = false;

  bool block_shortcut = p.bundle.has_value();
  if (block_shortcut) {
    // the forward-vector arithmetic below is exact rational only
    for (const auto& m : p.bundle->m)
      for (size_t i = 0; i < m.rows() && block_shortcut; ++i)
        for (size_t j = 0; j < m.cols() && block_shortcut; ++j)
          block_shortcut = m.at(i, j).re.is_rational() && m.at(i, j).im.is_exact_zero();
  }
  if (block_shortcut) {
    // forward vectors x^T M_{w_1} ... M_{w_j} over exact rationals
    const GadgetBundle& b = *p.bundle;
    size_t n = b.m[0].rows();
    bool exact_ok = true;
    struct Node {
      std::vector<Rational> fwd;
      size_t parent;
      unsigned letter;
      size_t depth;
    };
    auto serialize = [](const std::vector<Rational>& v) {
      std::string s;
      for (const auto& q : v) {
        s += q.get_str();
        s += ',';
      }
      return s;
    };
    std::vector<Rational> x0 = b.x;
    std::vector<Node> nodes;
    std::deque<size_t> frontier;
    std::unordered_set<std::string> visited;
    auto reconstruct = [&](size_t idx) {
      Word w;
      while (idx != size_t(-1)) {
        w.push_back(nodes[idx].letter);
        idx = nodes[idx].parent;
      }
      std::reverse(w.begin(), w.end());
      return w;
    };
    auto step = [&](const std::vector<Rational>& fwd, unsigned letter) {
      std::vector<Rational> next(n, Rational(0));
      const CMatrix& m = b.m[letter - 1];
      for (size_t j = 0; j < n; ++j) {
        Rational acc(0);
        for (size_t i = 0; i < n; ++i)
          if (fwd[i] != 0) acc += fwd[i] * m.at(i, j).re.rational_value();
        next[j] = acc;
      }
      return next;
    };
    auto hits = [&](const std::vector<Rational>& fwd) {
      Rational q(0);
      for (size_t i = 0; i < n; ++i) q += fwd[i] * b.y[i];
      return strict ? q > 0 : q >= 0;
    };

    auto try_witness = [&](const Word& w) -> std::optional<SearchOutcome> {
      auto verdict = detail::revalidate_overlap(p, w, strict);
      if (!verdict) {
        undecided = true;
        return std::nullopt;
      }
      if (!*verdict)
        fail(ErrorCode::UsageError, "block shortcut and matrix path disagree on a witness");
      SearchOutcome ok;
      ok.verdict = SearchOutcome::Verdict::witness;
      ok.witness = w;
      ok.depth = w.size();
      ok.stats = out.stats;
      return ok;
    };

    // depth-1 seeds
    for (unsigned i = 1; i <= k; ++i) {
      if (max_depth < 1) break;
      std::vector<Rational> fwd = step(x0, i);
      ++out.stats.nodes;
      if (hits(fwd)) {
        if (auto w = try_witness({i})) return *w;
      }
      if (exact_ok && !visited.insert(serialize(fwd)).second) {
        ++out.stats.deduped;
        continue;
      }
      if (nodes.size() >= node_cap) {
        pruned = true;
        continue;
      }
      nodes.push_back({std::move(fwd), size_t(-1), i, 1});
      frontier.push_back(nodes.size() - 1);
    }
    while (!frontier.empty()) {
      size_t idx = frontier.front();
      frontier.pop_front();
      size_t depth = nodes[idx].depth;
      if (depth >= max_depth) continue;
      for (unsigned i = 1; i <= k; ++i) {
        std::vector<Rational> fwd = step(nodes[idx].fwd, i);
        ++out.stats.nodes;
        if (hits(fwd)) {
          Word w = concat(reconstruct(idx), {i});
          if (auto res = try_witness(w)) return *res;
        }
        if (exact_ok && !visited.insert(serialize(fwd)).second) {
          ++out.stats.deduped;
          continue;
        }
        if (nodes.size() >= node_cap) {
          pruned = true;
          continue;
        }
        nodes.push_back({std::move(fwd), idx, i, depth + 1});
        frontier.push_back(nodes.size() - 1);
      }
    }
  } else {
    // generic path: forward transfer coordinates
    const HermitianBasis& basis = p.channels[0].basis();
    std::vector<Scalar> phi_coords = basis.flatten(p.phi);
    struct Node {
      std::vector<Scalar> coords;
      size_t parent;
      unsigned letter;
      size_t depth;
    };
    std::vector<Node> nodes;
    std::deque<size_t> frontier;
    std::unordered_set<std::string> visited;
    auto serialize = [](const std::vector<Scalar>& v) -> std::optional<std::string> {
      std::string s;
      for (const auto& q : v) {
        if (!q.is_exact()) return std::nullopt;  // dedup disabled on intervals
        s += q.exact().str();
        s += ',';
      }
      return s;
    };
    auto reconstruct = [&](size_t idx) {
      Word w;
      while (idx != size_t(-1)) {
        w.push_back(nodes[idx].letter);
        idx = nodes[idx].parent;
      }
      std::reverse(w.begin(), w.end());
      return w;
    };
    auto step = [&](const std::vector<Scalar>& coords, unsigned letter) {
      const CMatrix& t = p.channels[letter - 1].transfer();
      std::vector<Scalar> next(coords.size(), Scalar(Rational(0)));
      for (size_t i = 0; i < t.rows(); ++i) {
        Scalar acc{Rational(0)};
        for (size_t j = 0; j < t.cols(); ++j) acc += t.at(i, j).re * coords[j];
        next[i] = acc;
      }
      return next;
    };
    auto overlap_of = [&](const std::vector<Scalar>& coords) {
      Scalar acc{Rational(0)};
      for (size_t i = 0; i < coords.size(); ++i) acc += phi_coords[i] * coords[i];
      return acc;
    };
    auto hits = [&](const std::vector<Scalar>& coords) -> std::optional<bool> {
      Scalar gap = overlap_of(coords) - Scalar(p.lambda);
      if (gap.is_exact()) {
        int s = gap.exact().sign();
        return strict ? s > 0 : s >= 0;
      }
      Interval g = gap.to_interval();
      if (g.is_positive()) return true;
      if (g.is_negative()) return false;
      return std::nullopt;
    };

    std::vector<Scalar> start = basis.flatten(p.rho);
    auto process = [&](size_t parent, size_t depth,
                       const std::vector<Scalar>& coords) -> std::optional<SearchOutcome> {
      for (unsigned i = 1; i <= k; ++i) {
        std::vector<Scalar> next = step(coords, i);
        ++out.stats.nodes;
        auto h = hits(next);
        if (!h)
          undecided = true;
        else if (*h) {
          Word w = parent == size_t(-1) ? Word{i} : concat(reconstruct(parent), {i});
          auto verdict = detail::revalidate_overlap(p, w, strict);
          if (verdict && *verdict) {
            SearchOutcome ok;
            ok.verdict = SearchOutcome::Verdict::witness;
            ok.witness = w;
            ok.depth = w.size();
            ok.stats = out.stats;
            return ok;
          }
          undecided = true;
        }
        auto key = serialize(next);
        if (key && !visited.insert(*key).second) {
          ++out.stats.deduped;
          continue;
        }
        if (nodes.size() >= node_cap) {
          pruned = true;
          continue;
        }
        nodes.push_back({std::move(next), parent, i, depth + 1});
        frontier.push_back(nodes.size() - 1);
      }
      return std::nullopt;
    };

    if (max_depth >= 1) {
      if (auto res = process(size_t(-1), 0, start)) return *res;
    }
    while (!frontier.empty()) {
      size_t idx = frontier.front();
      frontier.pop_front();
      if (nodes[idx].depth >= max_depth) continue;
      std::vector<Scalar> coords = nodes[idx].coords;
      if (auto res = process(idx, nodes[idx].depth, coords)) return *res;
    }
  }

  out.verdict = (pruned || undecided) ? SearchOutcome::Verdict::budget_exceeded
                                      : SearchOutcome::Verdict::exhausted;
  out.depth = max_depth;
  return out;
}

// Exhaustive enumeration with no dedup and no shortcut, for cross-validation.
// Returns every word of length 1..depth with a certified overlap interval.
inline std::vector<std::pair<Word, Interval>> bruteforce_oracle(const ThresholdProblem& p,
                                                                size_t depth,
                                                                size_t cap = 200000) {
  size_t k = p.channels.size();
  size_t total = 0, power = 1;
  for (size_t n = 1; n <= depth; ++n) {
    power *= k;
    total += power;
    if (total > cap) fail(ErrorCode::CapExceeded, "k^n exceeds the oracle cap");
  }
  std::vector<std::pair<Word, Interval>> out;
  out.reserve(total);
  Word w;
  std::function<void()> rec = [&]() {
    if (!w.empty()) {
      CMatrix state = p.rho;
      for (size_t j = w.size(); j-- > 0;) state = apply(p.channels[w[j] - 1], state);
      out.emplace_back(w, fidelity_overlap(p.phi, state).to_interval());
    }
    if (w.size() == depth) return;
    for (unsigned i = 1; i <= k; ++i) {
      w.push_back(i);
      rec();
      w.pop_back();
    }
  };
  rec();
  return out;
}

}  // namespace qsalg
