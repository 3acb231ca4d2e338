#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "qsalg/witness.hpp"

namespace qsalg {

struct SearchBudget {
  size_t restarts = 24;
  size_t max_sweeps = 400;
  uint64_t seed = 0;
  size_t jobs = 1;
  double target_residual = 1e-10;  // stop a restart once below this
  double strict_slack = 1e-6;      // required slack on strict atoms before rationalization
};

struct NumericSearchResult {
  bool found = false;              // exact witness validated by check_witness
  Assignment witness;
  std::vector<double> best_point;
  double best_residual = std::numeric_limits<double>::infinity();  // max atom violation
  size_t winning_seed = 0;
};

namespace detail {

// best rational approximation with bounded denominator (continued fractions)
inline Rational rationalize(double x, unsigned long max_den) {
  if (!std::isfinite(x)) return Rational(0);
  if (std::abs(x) < 1e-13) return Rational(0);
  bool neg = x < 0;
  double v = std::abs(x);
  unsigned long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = v;
  for (int iter = 0; iter < 64; ++iter) {
    double fl = std::floor(frac);
    if (fl > 1e18) break;
    unsigned long a = (unsigned long)fl;
    if (q1 * a + q0 > max_den) break;
    unsigned long p2 = p1 * a + p0, q2 = q1 * a + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    double rem = frac - fl;
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (q1 == 0) return Rational(0);
  Rational r{long(p1), long(q1)};
  r.canonicalize();
  if (neg) r = -r;
  return r;
}

struct CompiledObjective {
  const Formula* f;
  std::vector<const PolyAtom*> atoms;  // atoms referenced by the body (conjunction-view)

  double violation(const PolyAtom& a, const std::vector<double>& x, double slack) const {
    double v = a.poly.eval_double(x);
    switch (a.rel) {
      case Rel::eq: return std::abs(v);
      case Rel::ge: return v < 0 ? -v : 0.0;
      case Rel::gt: return v < slack ? (slack - v) : 0.0;
    }
    return 0;
  }

  // smooth objective: sum of squared violations over the whole body tree
  double objective(const Body& b, const std::vector<double>& x, double slack) const {
    switch (b.kind) {
      case Body::Kind::true_:
        return 0;
      case Body::Kind::atom: {
        double v = violation(f->atoms[b.atom], x, slack);
        return v * v;
      }
      case Body::Kind::and_: {
        double acc = 0;
        for (const auto& k : b.kids) acc += objective(k, x, slack);
        return acc;
      }
      case Body::Kind::or_: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : b.kids) best = std::min(best, objective(k, x, slack));
        return best;
      }
      case Body::Kind::not_: {
        // negation only wraps atoms in our encoders: flip the relation
        const Body& kid = b.kids[0];
        if (kid.kind == Body::Kind::atom) {
          const PolyAtom& a = f->atoms[kid.atom];
          double v = a.poly.eval_double(x);
          // not (p >= 0)  ->  p < 0; not (p > 0) -> p <= 0; not (p = 0) -> |p| > 0
          switch (a.rel) {
            case Rel::ge: return v < -1e-9 ? 0 : (v + 1e-9) * (v + 1e-9);
            case Rel::gt: return v <= 0 ? 0 : v * v;
            case Rel::eq: return std::abs(v) > 1e-9 ? 0 : (1e-9 - std::abs(v));
          }
        }
        return objective(kid, x, slack) > 0 ? 0.0 : 1.0;
      }
    }
    return 0;
  }

  // max atom violation over the satisfied-branch view of the body; `slack`
  // additionally demands interior margin on strict atoms
  double max_violation(const Body& b, const std::vector<double>& x, double slack) const {
    switch (b.kind) {
      case Body::Kind::true_:
        return 0;
      case Body::Kind::atom:
        return violation(f->atoms[b.atom], x, slack);
      case Body::Kind::and_: {
        double worst = 0;
        for (const auto& k : b.kids) worst = std::max(worst, max_violation(k, x, slack));
        return worst;
      }
      case Body::Kind::or_: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& k : b.kids) best = std::min(best, max_violation(k, x, slack));
        return best;
      }
      case Body::Kind::not_:
        return objective(b, x, slack) > 0 ? 1.0 : 0.0;
    }
    return 0;
  }
};

// collects atoms reachable purely conjunctively; false when the body mixes in
// disjunctions or negations (then least-squares polish is skipped)
inline bool conjunctive_atoms(const Body& b, std::vector<size_t>& out) {
  switch (b.kind) {
    case Body::Kind::true_:
      return true;
    case Body::Kind::atom:
      out.push_back(b.atom);
      return true;
    case Body::Kind::and_:
      for (const auto& k : b.kids)
        if (!conjunctive_atoms(k, out)) return false;
      return true;
    default:
      return false;
  }
}

// Levenberg-Marquardt on the violation residual vector with a numeric
// Jacobian; quadratic tail convergence where coordinate descent stalls.
inline void lm_polish(const Formula& f, const std::vector<size_t>& atoms,
                      std::vector<double>& x, double slack, int max_iter = 60) {
  size_t n = x.size(), m = atoms.size();
  if (n == 0 || m == 0) return;
  auto residual = [&](const std::vector<double>& pt, std::vector<double>& r) {
    double norm = 0;
    for (size_t i = 0; i < m; ++i) {
      const PolyAtom& a = f.atoms[atoms[i]];
      double v = a.poly.eval_double(pt);
      switch (a.rel) {
        case Rel::eq: r[i] = v; break;
        case Rel::ge: r[i] = v < 0 ? v : 0.0; break;
        case Rel::gt: r[i] = v < slack ? (v - slack) : 0.0; break;
      }
      norm += r[i] * r[i];
    }
    return norm;
  };
  std::vector<double> r(m), r_try(m), xt(n);
  double norm = residual(x, r);
  double mu = 1e-6;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (norm < 1e-28) break;
    // forward-difference Jacobian
    std::vector<double> jac(m * n);
    const double h = 1e-7;
    for (size_t jx = 0; jx < n; ++jx) {
      xt = x;
      xt[jx] += h;
      residual(xt, r_try);
      for (size_t i = 0; i < m; ++i) jac[i * n + jx] = (r_try[i] - r[i]) / h;
    }
    // normal equations (J^T J + mu I) delta = -J^T r
    std::vector<double> a(n * n, 0.0), g(n, 0.0);
    for (size_t i = 0; i < m; ++i)
      for (size_t jx = 0; jx < n; ++jx) {
        double jij = jac[i * n + jx];
        if (jij == 0) continue;
        g[jx] += jij * r[i];
        for (size_t kx = jx; kx < n; ++kx) a[jx * n + kx] += jij * jac[i * n + kx];
      }
    for (size_t jx = 0; jx < n; ++jx)
      for (size_t kx = 0; kx < jx; ++kx) a[jx * n + kx] = a[kx * n + jx];
    bool improved = false;
    for (int attempt = 0; attempt < 8 && !improved; ++attempt) {
      std::vector<double> lhs = a;
      for (size_t jx = 0; jx < n; ++jx) lhs[jx * n + jx] += mu;
      // Gaussian elimination with partial pivoting
      std::vector<double> rhs(n);
      for (size_t jx = 0; jx < n; ++jx) rhs[jx] = -g[jx];
      bool singular = false;
      std::vector<size_t> piv(n);
      for (size_t jx = 0; jx < n; ++jx) piv[jx] = jx;
      for (size_t col = 0; col < n && !singular; ++col) {
        size_t best = col;
        for (size_t rr = col + 1; rr < n; ++rr)
          if (std::abs(lhs[rr * n + col]) > std::abs(lhs[best * n + col])) best = rr;
        if (std::abs(lhs[best * n + col]) < 1e-300) {
          singular = true;
          break;
        }
        if (best != col) {
          for (size_t cc = 0; cc < n; ++cc) std::swap(lhs[best * n + cc], lhs[col * n + cc]);
          std::swap(rhs[best], rhs[col]);
        }
        for (size_t rr = col + 1; rr < n; ++rr) {
          double fct = lhs[rr * n + col] / lhs[col * n + col];
          if (fct == 0) continue;
          for (size_t cc = col; cc < n; ++cc) lhs[rr * n + cc] -= fct * lhs[col * n + cc];
          rhs[rr] -= fct * rhs[col];
        }
      }
      if (singular) {
        mu *= 10;
        continue;
      }
      std::vector<double> delta(n);
      for (size_t rr = n; rr-- > 0;) {
        double acc = rhs[rr];
        for (size_t cc = rr + 1; cc < n; ++cc) acc -= lhs[rr * n + cc] * delta[cc];
        delta[rr] = acc / lhs[rr * n + rr];
      }
      for (size_t jx = 0; jx < n; ++jx) xt[jx] = x[jx] + delta[jx];
      double norm_try = residual(xt, r_try);
      if (norm_try < norm) {
        x = xt;
        r = r_try;
        norm = norm_try;
        mu = std::max(mu / 3, 1e-12);
        improved = true;
      } else {
        mu *= 4;
      }
    }
    if (!improved) break;
  }
}

}  // namespace detail

// Random multistart plus adaptive coordinate descent on the sum of squared
// atom violations. A candidate below the slack threshold is rationalized and
// re-validated exactly; absence of a witness yields an "unknown" result
// (found = false), never an unsatisfiability claim.
inline NumericSearchResult numeric_search(const Formula& f_in, SearchBudget budget = {}) {
  Formula f = f_in.prenexed ? f_in : prenex(f_in);
  for (Quant q : f.quants)
    if (q != Quant::exists)
      fail(ErrorCode::UsageError, "numeric_search requires a purely existential formula");
  size_t n = f.real_names.size();
  detail::CompiledObjective obj{&f, {}};
  std::vector<size_t> conj_atoms;
  bool conjunctive = detail::conjunctive_atoms(f.body, conj_atoms);

  struct RestartOutcome {
    bool found = false;
    Assignment witness;
    std::vector<double> point;
    double residual = std::numeric_limits<double>::infinity();
  };

  auto run_restart = [&](size_t restart_index) {
    RestartOutcome out;
    std::mt19937_64 rng(budget.seed * 7919 + restart_index * 104729 + 17);
    std::uniform_real_distribution<double> init(-1.0, 1.0);
    std::vector<double> x(n);
    double scale = 0.25 * double(1 + restart_index % 4);
    for (auto& xi : x) xi = scale * init(rng);

    double slack = 2 * budget.strict_slack;
    std::vector<double> step(n, 0.25);
    double cur = obj.objective(f.body, x, slack);
    for (size_t sweep = 0; sweep < budget.max_sweeps; ++sweep) {
      double before = cur;
      for (size_t i = 0; i < n; ++i) {
        double x0 = x[i], h = step[i];
        auto eval_at = [&](double t) {
          x[i] = x0 + t;
          return obj.objective(f.body, x, slack);
        };
        double fp = eval_at(h), fm = eval_at(-h);
        double denom = fp - 2 * cur + fm;
        double best_t = 0, best_f = cur;
        if (fp < best_f) {
          best_f = fp;
          best_t = h;
        }
        if (fm < best_f) {
          best_f = fm;
          best_t = -h;
        }
        if (denom > 1e-300) {
          double t_star = 0.5 * h * (fm - fp) / denom;
          double fs = eval_at(t_star);
          if (fs < best_f) {
            best_f = fs;
            best_t = t_star;
          }
        }
        x[i] = x0 + best_t;
        cur = best_f;
        step[i] = (best_t != 0) ? std::min(std::abs(best_t) * 2 + 1e-12, 4.0)
                                : std::max(step[i] * 0.45, 1e-14);
      }
      // occasional random-direction line minimization to escape axis stalls
      if (sweep % 12 == 11) {
        std::normal_distribution<double> g(0, 1);
        std::vector<double> dir(n);
        double nrm = 0;
        for (auto& di : dir) {
          di = g(rng);
          nrm += di * di;
        }
        nrm = std::sqrt(std::max(nrm, 1e-30));
        double h = 0.1;
        std::vector<double> xs = x;
        for (int k = 0; k < 12; ++k) {
          for (size_t i = 0; i < n; ++i) x[i] = xs[i] + h * dir[i] / nrm;
          double ft = obj.objective(f.body, x, slack);
          if (ft < cur) {
            cur = ft;
            xs = x;
            h *= 1.7;
          } else {
            h *= -0.5;
          }
        }
        x = xs;
        cur = obj.objective(f.body, x, slack);
      }
      double res = obj.max_violation(f.body, x, 0.0);
      if (res < out.residual) {
        out.residual = res;
        out.point = x;
      }
      if (res <= budget.target_residual) break;
      if (before - cur <= 1e-30 && sweep > 20) break;
    }
    double res = obj.max_violation(f.body, x, 0.0);
    if (res < out.residual) {
      out.residual = res;
      out.point = x;
    }

    // least-squares tail: Levenberg-Marquardt on conjunctive bodies
    if (conjunctive && out.residual < 1e-2) {
      std::vector<double> xp = out.point;
      detail::lm_polish(f, conj_atoms, xp, slack);
      double resp = obj.max_violation(f.body, xp, 0.0);
      if (resp < out.residual) {
        out.residual = resp;
        out.point = xp;
      }
    }

    // snap-and-polish: project onto coarse rational grids and re-descend, so
    // solution manifolds with rational corners yield exactly checkable points
    std::vector<std::vector<double>> candidates;
    if (out.residual < 5e-3) {
      std::vector<double> base = out.point;
      for (unsigned long snap_den : {1ul, 2ul, 3ul, 4ul, 6ul, 8ul, 16ul}) {
        std::vector<double> xs(n);
        for (size_t i = 0; i < n; ++i) xs[i] = detail::rationalize(base[i], snap_den).get_d();
        double cur2 = obj.objective(f.body, xs, slack);
        std::vector<double> step2(n, 1.0 / double(4 * snap_den));
        for (size_t sweep = 0; sweep < 40; ++sweep) {
          double before2 = cur2;
          for (size_t i = 0; i < n; ++i) {
            double x0 = xs[i], h = step2[i];
            auto eval_at = [&](double t) {
              xs[i] = x0 + t;
              return obj.objective(f.body, xs, slack);
            };
            double fp = eval_at(h), fm = eval_at(-h);
            double denom = fp - 2 * cur2 + fm;
            double best_t = 0, best_f = cur2;
            if (fp < best_f) { best_f = fp; best_t = h; }
            if (fm < best_f) { best_f = fm; best_t = -h; }
            if (denom > 1e-300) {
              double t_star = 0.5 * h * (fm - fp) / denom;
              double fs = eval_at(t_star);
              if (fs < best_f) { best_f = fs; best_t = t_star; }
            }
            xs[i] = x0 + best_t;
            cur2 = best_f;
            step2[i] = (best_t != 0) ? std::abs(best_t) * 2 + 1e-12
                                     : std::max(step2[i] * 0.45, 1e-14);
          }
          if (before2 - cur2 <= 1e-28 && sweep > 4) break;
        }
        if (conjunctive) detail::lm_polish(f, conj_atoms, xs, slack, 25);
        double res2 = obj.max_violation(f.body, xs, 0.0);
        if (res2 < out.residual) {
          out.residual = res2;
          out.point = xs;
        }
        if (res2 < 1e-6) candidates.push_back(xs);
      }
    }
    candidates.push_back(out.point);

    // rationalize and validate exactly; strict atoms must show interior slack
    // (violation against 2*slack staying under slack means margin > slack)
    for (const auto& point : candidates) {
      if (out.found) break;
      if (obj.max_violation(f.body, point, 0.0) > 1e-6) continue;
      bool slack_ok =
          obj.max_violation(f.body, point, 2 * budget.strict_slack) < budget.strict_slack;
      if (!slack_ok) continue;
      const unsigned long dens[] = {1,      4,       16,      64,      1024,
                                    65536,  1048576, 1u << 30};
      for (unsigned long den : dens) {
        Assignment cand;
        for (size_t i = 0; i < n; ++i)
          cand[f.real_names[i]] = Ext(detail::rationalize(point[i], den));
        try {
          if (check_witness(f, cand)) {
            out.found = true;
            out.witness = std::move(cand);
            break;
          }
        } catch (const Error&) {
          break;
        }
      }
    }
    return out;
  };

  std::vector<RestartOutcome> outcomes(budget.restarts);
  size_t jobs = std::max<size_t>(1, budget.jobs);
  if (jobs == 1) {
    for (size_t r = 0; r < budget.restarts; ++r) {
      outcomes[r] = run_restart(r);
      if (outcomes[r].found) break;  // first success in seed order
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (size_t w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (size_t r = next.fetch_add(1); r < budget.restarts; r = next.fetch_add(1))
          outcomes[r] = run_restart(r);
      });
    for (auto& w : workers) w.join();
  }

  NumericSearchResult result;
  for (size_t r = 0; r < budget.restarts; ++r) {
    if (outcomes[r].point.empty()) continue;
    if (outcomes[r].found) {
      result.found = true;
      result.witness = outcomes[r].witness;
      result.best_point = outcomes[r].point;
      result.best_residual = outcomes[r].residual;
      result.winning_seed = r;
      return result;  // deterministic: smallest seed index wins
    }
    if (outcomes[r].residual < result.best_residual) {
      result.best_residual = outcomes[r].residual;
      result.best_point = outcomes[r].point;
      result.winning_seed = r;
    }
  }
  return result;
}

}  // namespace qsalg
