#include <algorithm>
#include <cmath>

#include "eipw/solver.hpp"

namespace eipw {

namespace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval scale(Interval a, double k) {
  return k >= 0.0 ? Interval{a.lo * k, a.hi * k} : Interval{a.hi * k, a.lo * k};
}

Interval product(Interval a, Interval b) {
  const double c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(std::begin(c), std::end(c)), *std::max_element(std::begin(c), std::end(c))};
}

// Slack added to every derived bound so round-off never cuts off a point.
double pad(double v) { return 1e-9 * (1.0 + std::abs(v)); }

class Box {
 public:
  explicit Box(Node& node, const Program& program) : node_(node), program_(program) {}

  Interval get(int v) const {
    const auto i = static_cast<std::size_t>(v);
    return {node_.lower[i], node_.upper[i]};
  }

  // Returns false when the interval of v becomes empty.
  bool restrict(int v, double lo, double hi) {
    const auto i = static_cast<std::size_t>(v);
    double& l = node_.lower[i];
    double& u = node_.upper[i];
    if (std::isfinite(lo) && lo - pad(lo) > l) l = lo - pad(lo);
    if (std::isfinite(hi) && hi + pad(hi) < u) u = hi + pad(hi);
    if (program_.variables[i].integral) {
      l = std::ceil(l - 1e-6);
      u = std::floor(u + 1e-6);
    }
    if (l > u) {
      if (l - u > 1e-7 * (1.0 + std::abs(u))) return false;
      l = u;
    }
    return true;
  }

 private:
  Node& node_;
  const Program& program_;
};

struct Term {
  int a = -1;
  int b = -1;  // second factor; -1 for linear terms
  double coef = 0.0;
  Interval range;
};

}  // namespace

std::optional<Node> tighten_bounds(const Program& program, const Node& node) {
  Node out = node;
  Box box(out, program);
  for (std::size_t v = 0; v < out.lower.size(); ++v)
    if (out.lower[v] > out.upper[v]) return std::nullopt;

  std::vector<Term> terms;
  for (const auto& row : program.constraints) {
    terms.clear();
    bool usable = true;
    for (const auto& [id, coef] : row.linear.terms()) terms.push_back({id, -1, coef, scale(box.get(id), coef)});
    for (const auto& bt : row.bilinear) {
      double coef = bt.coef;
      if (bt.gate >= 0) {
        const Interval g = box.get(bt.gate);
        if (g.hi == 0.0) continue;
        if (g.lo != g.hi) usable = false;
        coef *= g.hi;
      }
      terms.push_back({bt.flow, bt.conc, coef, scale(product(box.get(bt.flow), box.get(bt.conc)), coef)});
    }
    if (!usable) continue;

    double sum_lo = 0.0, sum_hi = 0.0;
    for (const auto& t : terms) {
      sum_lo += t.range.lo;
      sum_hi += t.range.hi;
    }
    if (!std::isfinite(sum_lo) || !std::isfinite(sum_hi)) continue;
    const double rhs = row.rhs - row.linear.constant();
    const double row_lo = row.sense == Sense::le ? -lp::kInf : rhs;
    const double row_hi = row.sense == Sense::ge ? lp::kInf : rhs;
    if (sum_lo > row_hi + pad(row_hi) * 1e2 || sum_hi < row_lo - pad(row_lo) * 1e2) return std::nullopt;

    for (const auto& t : terms) {
      // Range the term may take given every other term's interval.
      const double lo = row_lo - (sum_hi - t.range.hi);
      const double hi = row_hi - (sum_lo - t.range.lo);
      if (t.b < 0) {
        double vlo = t.coef > 0 ? lo / t.coef : hi / t.coef;
        double vhi = t.coef > 0 ? hi / t.coef : lo / t.coef;
        if (!box.restrict(t.a, vlo, vhi)) return std::nullopt;
        continue;
      }
      // Products of nonnegative factors only.
      const Interval x = box.get(t.a), y = box.get(t.b);
      if (x.lo < 0.0 || y.lo < 0.0) continue;
      const double plo = t.coef > 0 ? lo / t.coef : hi / t.coef;
      const double phi = t.coef > 0 ? hi / t.coef : lo / t.coef;
      if (std::isfinite(phi)) {
        if (phi < -pad(phi)) return std::nullopt;
        if (y.lo > 0.0 && !box.restrict(t.a, -lp::kInf, phi / y.lo)) return std::nullopt;
        if (x.lo > 0.0 && !box.restrict(t.b, -lp::kInf, phi / x.lo)) return std::nullopt;
      }
      if (std::isfinite(plo) && plo > 0.0) {
        if (y.hi > 0.0 && !box.restrict(t.a, plo / y.hi, lp::kInf)) return std::nullopt;
        if (x.hi > 0.0 && !box.restrict(t.b, plo / x.hi, lp::kInf)) return std::nullopt;
      }
    }
  }
  return out;
}

}  // namespace eipw
