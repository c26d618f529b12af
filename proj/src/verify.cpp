#include "recbf/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include "json.hpp"
#include "recbf/calculus.hpp"
#include "recbf/error.hpp"
#include "recbf/sim.hpp"

namespace recbf {

namespace {

using Json = nlohmann::ordered_json;

enum class Verdict { Ok, Violated, Indeterminate };

struct Outcome {
  Verdict verdict = Verdict::Ok;
  bool in_zero_set = false;
  Diagnostics values;
};

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_grid(const GridSpec& grid, std::size_t n) {
  if (grid.box.size() != n || grid.resolution.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "verify: grid dimension does not match the state");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.resolution[i] == 0) throw Error(ErrorCode::InvalidArgument, "verify: empty grid axis");
    if (!(grid.box[i].hi >= grid.box[i].lo)) {
      throw Error(ErrorCode::InvalidArgument, "verify: grid interval is empty");
    }
  }
}

std::vector<Outcome> map_grid(const GridSpec& grid, int jobs,
                              const std::function<Outcome(const std::vector<double>&)>& fn) {
  const std::size_t total = grid.size();
  std::vector<Outcome> out(total);
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  constexpr std::size_t kChunk = 256;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t start = next.fetch_add(kChunk); start < total; start = next.fetch_add(kChunk)) {
        const std::size_t stop = std::min(total, start + kChunk);
        for (std::size_t i = start; i < stop; ++i) out[i] = fn(grid.point(i));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

VerifyReport assemble(std::string condition, const GridSpec& grid, const VerifyTolerances& tol,
                      const std::vector<Outcome>& outcomes) {
  VerifyReport r;
  r.condition = std::move(condition);
  r.grid = grid;
  r.tolerances = tol;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (o.in_zero_set) {
      ++zeros;
      r.zero_set.push_back(grid.point(i));
    }
    if (o.verdict == Verdict::Violated) r.violations.push_back({i, grid.point(i), o.values});
    if (o.verdict == Verdict::Indeterminate) r.indeterminate.push_back({i, grid.point(i), o.values});
  }
  r.passed = r.violations.empty();
  r.summary = {{"grid_points", static_cast<double>(outcomes.size())},
               {"zero_set_points", static_cast<double>(zeros)},
               {"violations", static_cast<double>(r.violations.size())},
               {"indeterminate", static_cast<double>(r.indeterminate.size())}};
  return r;
}

void add_global_violation(VerifyReport& r, Diagnostics values) {
  r.violations.push_back({r.grid.size(), {}, std::move(values)});
  r.passed = false;
}

// Classifies a zero-set implication "|b| small => a >= 0".
Outcome implication(double b_norm, double a, const VerifyTolerances& tol, Diagnostics values) {
  Outcome o;
  if (b_norm <= tol.zero) {
    o.in_zero_set = true;
    if (a < -tol.violation) {
      o.verdict = Verdict::Violated;
      o.values = std::move(values);
    }
  } else if (b_norm <= tol.band && a < -tol.violation) {
    o.verdict = Verdict::Indeterminate;
    o.values = std::move(values);
  }
  return o;
}

std::string neighborhood_note(const GridSpec& grid) {
  if (grid.origin == "explicit") return "grid supplied by the caller";
  return "grid covers the sampled safe set bounding box widened by 10% per side";
}

}  // namespace

std::size_t GridSpec::size() const {
  if (resolution.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t r : resolution) n *= r;
  return n;
}

std::vector<double> GridSpec::point(std::size_t index) const {
  std::vector<double> x(box.size());
  // Last coordinate varies fastest.
  for (std::size_t d = box.size(); d-- > 0;) {
    const std::size_t r = resolution[d];
    const std::size_t k = index % r;
    index /= r;
    x[d] = lerp_grid(box[d].lo, box[d].hi, k, r);
  }
  return x;
}

GridSpec make_grid(const Box& box, std::size_t resolution) {
  return GridSpec{box, std::vector<std::size_t>(box.size(), resolution), "explicit"};
}

GridSpec default_grid(const Barrier& barrier, std::size_t resolution) {
  const auto& domain = barrier.system().domain();
  if (!domain) throw Error(ErrorCode::InvalidArgument, "verify: system has no domain to sample");
  const std::size_t n = domain->size();
  const std::size_t samples = n <= 2 ? std::max<std::size_t>(resolution, 2) : 41;
  const GridSpec probe = make_grid(*domain, samples);
  std::vector<double> lo(n, INFINITY), hi(n, -INFINITY);
  bool any = false;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const std::vector<double> x = probe.point(i);
    double v;
    try {
      v = barrier.set_value(x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteEvaluation) throw;
      continue;
    }
    if (v < 0.0) continue;
    any = true;
    for (std::size_t d = 0; d < n; ++d) {
      lo[d] = std::min(lo[d], x[d]);
      hi[d] = std::max(hi[d], x[d]);
    }
  }
  if (!any) {
    GridSpec g = make_grid(*domain, resolution);
    g.origin = "domain";
    return g;
  }
  Box box(n);
  for (std::size_t d = 0; d < n; ++d) {
    double pad = 0.1 * (hi[d] - lo[d]);
    if (pad == 0.0) pad = 0.1 * ((*domain)[d].hi - (*domain)[d].lo);
    box[d] = {lo[d] - pad, hi[d] + pad};
  }
  GridSpec g = make_grid(box, resolution);
  g.origin = "inflated_safe_set_bounds";
  return g;
}

std::string VerifyReport::to_json() const {
  Json j;
  j["condition"] = condition;
  j["passed"] = passed;
  Json box = Json::array();
  for (const auto& iv : grid.box) box.push_back({iv.lo, iv.hi});
  j["grid"] = {{"box", box}, {"resolution", grid.resolution}, {"origin", grid.origin}};
  j["neighborhood"] = neighborhood_note(grid);
  j["tolerances"] = {{"zero", tolerances.zero},
                     {"band", tolerances.band},
                     {"violation", tolerances.violation},
                     {"rank", tolerances.rank}};
  Json s = Json::object();
  for (const auto& [k, v] : summary) s[k] = v;
  j["summary"] = s;
  auto list = [](const std::vector<Violation>& vs) {
    Json arr = Json::array();
    for (const auto& v : vs) {
      Json e;
      e["index"] = v.index;
      e["x"] = v.x;
      Json vals = Json::object();
      for (const auto& [k, val] : v.values) vals[k] = std::isfinite(val) ? Json(val) : Json(nullptr);
      e["values"] = vals;
      arr.push_back(e);
    }
    return arr;
  };
  j["violations"] = list(violations);
  j["indeterminate"] = list(indeterminate);
  j["zero_set"] = zero_set;
  if (!note.empty()) j["note"] = note;
  return j.dump(2) + "\n";
}

VerifyReport check_relative_degree(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                                   int r, const GridSpec& grid, const VerifyTolerances& tol,
                                   int jobs) {
  if (r < 1 || r > 3) throw Error(ErrorCode::NestingDepthExceeded, "relative degree check needs 1 <= r <= 3");
  check_grid(grid, sys.state_dim());
  std::atomic<bool> attained{false};
  const auto outcomes = map_grid(grid, jobs, [&](const std::vector<double>& x) {
    Outcome o;
    for (int i = 0; i < r - 1; ++i) {
      const double v = norm(lie_g_lie_f(sys, constraint.psi, i, x));
      if (v > tol.zero) {
        o.verdict = Verdict::Violated;
        o.values.push_back({"|LgLf^" + std::to_string(i) + " psi|", v});
      }
    }
    const double top = norm(lie_g_lie_f(sys, constraint.psi, r - 1, x));
    if (top <= tol.zero) {
      o.in_zero_set = true;
    } else {
      attained = true;
    }
    return o;
  });
  VerifyReport rep = assemble("relative_degree", grid, tol, outcomes);
  rep.summary.push_back({"r", static_cast<double>(r)});
  if (!attained) {
    add_global_violation(rep, {{"max |LgLf^(r-1) psi|", 0.0}});
    rep.note = "L_g L_f^(r-1) psi vanishes at every grid point";
  } else {
    rep.note = "zero_set lists the points where L_g L_f^(r-1) psi vanishes";
  }
  rep.passed = rep.violations.empty();
  return rep;
}

VerifyReport check_theorem1(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                            const ClassKFn& alpha, const GridSpec& grid, double epsilon,
                            const VerifyTolerances& tol, int jobs) {
  check_grid(grid, sys.state_dim());
  const auto outcomes = map_grid(grid, jobs, [&](const std::vector<double>& x) {
    const double b = norm(lie_g_lie_f(sys, constraint.psi, 1, x));
    const double psi = evaluate(constraint.psi, x);
    const double lf = lie_f(sys, constraint.psi, 1, x);
    const double a = lf + alpha(psi) - epsilon;
    return implication(b, a, tol, {{"|LgLf psi|", b}, {"Lf psi", lf}, {"psi", psi}, {"margin", a}});
  });
  VerifyReport rep = assemble(epsilon > 0.0 ? "theorem1_strict" : "theorem1", grid, tol, outcomes);
  rep.summary.push_back({"epsilon", epsilon});
  return rep;
}

VerifyReport check_theorem2(const ControlAffineSystem& sys, const ConstraintFn& constraint,
                            const ClassKFn& alpha, const GridSpec& grid, const VerifyTolerances& tol,
                            int jobs) {
  check_grid(grid, sys.state_dim());
  const auto outcomes = map_grid(grid, jobs, [&](const std::vector<double>& x) {
    const std::vector<double> r1 = lie_g_lie_f(sys, constraint.psi, 0, x);
    const std::vector<double> r2 = lie_g_lie_f(sys, constraint.psi, 1, x);
    const double n1 = norm(r1), n2 = norm(r2);
    Outcome o;
    if (n1 > tol.zero && n2 > tol.zero) {
      // Smallest eigenvalue of the 2x2 Gram matrix is the squared smallest singular value.
      const double g11 = dot(r1, r1), g22 = dot(r2, r2), g12 = dot(r1, r2);
      const double mean = 0.5 * (g11 + g22);
      const double disc = std::sqrt(std::max(0.0, 0.25 * (g11 - g22) * (g11 - g22) + g12 * g12));
      const double sigma = std::sqrt(std::max(0.0, mean - disc));
      if (sigma <= tol.rank) {
        o.verdict = Verdict::Violated;
        o.values = {{"|Lg psi|", n1}, {"|LgLf psi|", n2}, {"sigma_min", sigma}};
      }
      return o;
    }
    const double both = std::max(n1, n2);
    const double psi = evaluate(constraint.psi, x);
    const double lf = lie_f(sys, constraint.psi, 1, x);
    const double a = lf + alpha(psi);
    return implication(both, a, tol,
                       {{"|Lg psi|", n1}, {"|LgLf psi|", n2}, {"Lf psi", lf}, {"psi", psi}, {"margin", a}});
  });
  return assemble("theorem2", grid, tol, outcomes);
}

VerifyReport check_theorem3(const std::shared_ptr<const ControlAffineSystem>& sys,
                            const BarrierSpec& spec, const GridSpec& grid,
                            const VerifyTolerances& tol, int jobs) {
  if (spec.kind != BarrierKind::ReCBFRecursive && spec.kind != BarrierKind::ReCBF2) {
    throw Error(ErrorCode::InvalidArgument, "theorem3 check needs a rectified barrier spec");
  }
  const Barrier barrier(spec, sys);
  check_grid(grid, sys->state_dim());
  const int r = spec.order;
  const auto outcomes = map_grid(grid, jobs, [&](const std::vector<double>& x) {
    const double b = norm(lie_g_lie_f(*sys, spec.constraint.psi, r - 1, x));
    const std::vector<double> stages = barrier.stage_values(x);
    const double best = *std::max_element(stages.begin(), stages.end());
    Diagnostics values{{"|LgLf^(r-1) psi|", b}};
    for (std::size_t i = 0; i < stages.size(); ++i) {
      values.push_back({"psi_" + std::to_string(i + 1), stages[i]});
    }
    return implication(b, best, tol, std::move(values));
  });
  VerifyReport rep = assemble("theorem3", grid, tol, outcomes);
  rep.summary.push_back({"r", static_cast<double>(r)});
  return rep;
}

VerifyReport check_lemma1(const Barrier& barrier, const ClassKFn& alpha, const GridSpec& grid,
                          const VerifyTolerances& tol, bool restrict_to_safe_set, int jobs) {
  check_grid(grid, barrier.system().state_dim());
  const bool hocbf = barrier.kind() == BarrierKind::HOCBF;
  std::atomic<std::size_t> considered{0};
  const auto outcomes = map_grid(grid, jobs, [&](const std::vector<double>& x) {
    double h, lf;
    std::vector<double> lg;
    if (hocbf) {
      const HocbfChainValues c = barrier.hocbf_chain(x);
      h = c.psi.back();
      lf = c.lf_last;
      lg = c.lg_last;
    } else {
      h = barrier.value(x);
      const LieDerivatives l = barrier.lie(x);
      lf = l.lf;
      lg = l.lg;
    }
    if (restrict_to_safe_set && barrier.set_value(x) < 0.0) return Outcome{};
    ++considered;
    const double b = norm(lg);
    const double a = lf + alpha(h);
    return implication(b, a, tol, {{"|Lg h|", b}, {"Lf h", lf}, {"h", h}, {"margin", a}});
  });
  VerifyReport rep = assemble(hocbf ? "lemma1_hocbf_last_member" : "lemma1", grid, tol, outcomes);
  rep.summary.push_back({"points_checked", static_cast<double>(considered.load())});
  rep.note = std::string("barrier kind ") + std::string(to_string(barrier.kind())) +
             (restrict_to_safe_set ? "; only points with h >= 0 checked" : "");
  return rep;
}

}  // namespace recbf
