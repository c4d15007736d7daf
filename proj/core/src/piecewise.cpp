#include "lanecarto/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lanecarto/errors.hpp"

namespace lanecarto {
namespace {

// Points sorted by s with suffix sums, so the normal equations of the hinge
// basis assemble in O(k^2) per breakpoint placement instead of O(n k^2):
// every basis product reduces to suffix sums of 1, s, s^2, d, s*d over the
// points right of a breakpoint.
struct SortedData {
  std::vector<double> s, d;
  std::vector<double> suf_cnt, suf_s, suf_s2, suf_d, suf_sd;
  double sum_d2 = 0.0;
  int n = 0;

  explicit SortedData(const std::vector<Vec2>& points) {
    n = static_cast<int>(points.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return points[a].x < points[b].x; });
    s.resize(n);
    d.resize(n);
    for (int i = 0; i < n; ++i) {
      s[i] = points[order[i]].x;
      d[i] = points[order[i]].y;
    }
    suf_cnt.assign(n + 1, 0.0);
    suf_s.assign(n + 1, 0.0);
    suf_s2.assign(n + 1, 0.0);
    suf_d.assign(n + 1, 0.0);
    suf_sd.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
      suf_cnt[i] = suf_cnt[i + 1] + 1.0;
      suf_s[i] = suf_s[i + 1] + s[i];
      suf_s2[i] = suf_s2[i + 1] + s[i] * s[i];
      suf_d[i] = suf_d[i + 1] + d[i];
      suf_sd[i] = suf_sd[i + 1] + s[i] * d[i];
      sum_d2 += d[i] * d[i];
    }
  }

  int first_above(double b) const {
    return static_cast<int>(std::upper_bound(s.begin(), s.end(), b) - s.begin());
  }
};

// Gaussian elimination with partial pivoting; false when singular.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const int m = static_cast<int>(b.size());
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < m; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < m; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = m - 1; col >= 0; --col) {
    double acc = b[col];
    for (int c = col + 1; c < m; ++c) acc -= a[col][c] * b[c];
    b[col] = acc / a[col][col];
  }
  return true;
}

struct FitEval {
  double loss = std::numeric_limits<double>::infinity();
  std::vector<double> coeffs;  // beta0, beta1, gamma...
};

FitEval fit_at(const SortedData& data, const std::vector<double>& breaks) {
  const int k = static_cast<int>(breaks.size());
  const int m = k + 2;
  std::vector<std::vector<double>> xtx(m, std::vector<double>(m, 0.0));
  std::vector<double> xty(m, 0.0);

  xtx[0][0] = data.suf_cnt[0];
  xtx[0][1] = xtx[1][0] = data.suf_s[0];
  xtx[1][1] = data.suf_s2[0];
  xty[0] = data.suf_d[0];
  xty[1] = data.suf_sd[0];
  std::vector<int> cut(k);
  for (int j = 0; j < k; ++j) cut[j] = data.first_above(breaks[j]);
  for (int j = 0; j < k; ++j) {
    const int i = cut[j];
    const double b = breaks[j];
    xtx[0][2 + j] = xtx[2 + j][0] = data.suf_s[i] - b * data.suf_cnt[i];
    xtx[1][2 + j] = xtx[2 + j][1] = data.suf_s2[i] - b * data.suf_s[i];
    xty[2 + j] = data.suf_sd[i] - b * data.suf_d[i];
    for (int l = 0; l <= j; ++l) {
      // breaks are increasing, so the hinge product vanishes left of cut[j]
      const double bl = breaks[l];
      const double v = data.suf_s2[i] - (b + bl) * data.suf_s[i] +
                       b * bl * data.suf_cnt[i];
      xtx[2 + l][2 + j] = xtx[2 + j][2 + l] = v;
    }
  }

  FitEval out;
  std::vector<double> beta = xty;
  if (!solve_dense(xtx, beta)) return out;
  double fitted = 0.0;
  // RSS = y'y - beta'X'y at the least-squares optimum.
  fitted += beta[0] * (data.suf_d[0]);
  fitted += beta[1] * (data.suf_sd[0]);
  for (int j = 0; j < k; ++j) {
    fitted += beta[2 + j] * (data.suf_sd[cut[j]] - breaks[j] * data.suf_d[cut[j]]);
  }
  out.loss = std::max(0.0, data.sum_d2 - fitted);
  out.coeffs = std::move(beta);
  return out;
}

}  // namespace

double PiecewiseLinear::evaluate(double s) const {
  double v = beta0 + beta1 * s;
  for (std::size_t j = 0; j < breaks.size(); ++j) {
    if (s > breaks[j]) v += gamma[j] * (s - breaks[j]);
  }
  return v;
}

std::vector<double> PiecewiseLinear::knots() const {
  std::vector<double> out;
  out.reserve(breaks.size() + 2);
  out.push_back(s_min);
  for (double b : breaks) out.push_back(b);
  out.push_back(s_max);
  return out;
}

std::vector<double> PiecewiseLinear::knot_values() const {
  std::vector<double> out;
  for (double k : knots()) out.push_back(evaluate(k));
  return out;
}

PiecewiseLinear fit_piecewise(const std::vector<Vec2>& points, int n_breaks) {
  const int k = std::max(0, n_breaks);
  const int n = static_cast<int>(points.size());
  if (n < 2 * (k + 1)) {
    throw DegenerateInputError("piecewise fit with " + std::to_string(k) +
                               " breaks is under-determined with " +
                               std::to_string(n) + " points");
  }
  SortedData data(points);
  const double s_lo = data.s.front(), s_hi = data.s.back();
  const double span = s_hi - s_lo;
  if (!(span > 0.0)) {
    throw DegenerateInputError("piecewise fit needs a positive s-span");
  }

  PiecewiseLinear result;
  result.s_min = s_lo;
  result.s_max = s_hi;

  auto finish = [&](const std::vector<double>& breaks, const FitEval& eval) {
    result.breaks = breaks;
    result.beta0 = eval.coeffs[0];
    result.beta1 = eval.coeffs[1];
    result.gamma.assign(eval.coeffs.begin() + 2, eval.coeffs.end());
    result.loss = eval.loss;
    return result;
  };

  if (k == 0) {
    FitEval eval = fit_at(data, {});
    if (!std::isfinite(eval.loss)) {
      throw DegenerateInputError("piecewise fit is singular");
    }
    return finish({}, eval);
  }

  const double min_sep = std::max(span * 1e-3, 1e-9);

  // Candidate positions on s-quantiles (interior only, deduplicated).
  std::vector<double> quantiles;
  const int q_count = 64;
  for (int q = 1; q < q_count; ++q) {
    double v = data.s[static_cast<std::size_t>(
        std::llround(static_cast<double>(q) * (n - 1) / q_count))];
    v = std::clamp(v, s_lo + min_sep, s_hi - min_sep);
    if (quantiles.empty() || v > quantiles.back() + min_sep * 0.5) {
      quantiles.push_back(v);
    }
  }
  if (quantiles.empty()) quantiles.push_back(s_lo + span / 2.0);

  std::vector<double> breaks(k);
  for (int j = 0; j < k; ++j) {
    breaks[j] = s_lo + span * (j + 1) / (k + 1);
  }
  double best_loss = fit_at(data, breaks).loss;

  auto coordinate_bounds = [&](const std::vector<double>& b, int j) {
    const double lo = (j == 0 ? s_lo + min_sep : b[j - 1] + min_sep);
    const double hi = (j == k - 1 ? s_hi - min_sep : b[j + 1] - min_sep);
    return std::pair<double, double>{lo, hi};
  };

  // Coarse pass: per coordinate, try every admissible quantile.
  for (int j = 0; j < k; ++j) {
    auto [lo, hi] = coordinate_bounds(breaks, j);
    for (double cand : quantiles) {
      if (cand < lo || cand > hi) continue;
      std::vector<double> trial = breaks;
      trial[j] = cand;
      const double loss = fit_at(data, trial).loss;
      if (loss < best_loss) {
        best_loss = loss;
        breaks = std::move(trial);
      }
    }
  }

  // Refinement: per-coordinate step-halving descent.
  for (int sweep = 0; sweep < 60; ++sweep) {
    const double sweep_start = best_loss;
    for (int j = 0; j < k; ++j) {
      auto [lo, hi] = coordinate_bounds(breaks, j);
      double step = span / 16.0;
      while (step > span * 1e-7) {
        bool moved = false;
        for (double dir : {1.0, -1.0}) {
          const double cand = std::clamp(breaks[j] + dir * step, lo, hi);
          if (cand == breaks[j]) continue;
          std::vector<double> trial = breaks;
          trial[j] = cand;
          const double loss = fit_at(data, trial).loss;
          if (loss < best_loss - 1e-15) {
            best_loss = loss;
            breaks = std::move(trial);
            moved = true;
            break;
          }
        }
        if (!moved) step *= 0.5;
      }
    }
    if (sweep_start - best_loss < 1e-9) break;
  }

  FitEval eval = fit_at(data, breaks);
  if (!std::isfinite(eval.loss)) {
    throw DegenerateInputError("piecewise fit is singular");
  }
  return finish(breaks, eval);
}

PiecewiseLinear fit_piecewise_auto(const std::vector<Vec2>& points, int max_breaks,
                                   double lambda) {
  PiecewiseLinear base = fit_piecewise(points, 0);
  if (lambda < 0.0) {
    std::vector<double> sq;
    sq.reserve(points.size());
    for (const Vec2& p : points) {
      const double r = p.y - base.evaluate(p.x);
      sq.push_back(r * r);
    }
    std::nth_element(sq.begin(), sq.begin() + sq.size() / 2, sq.end());
    lambda = 2.0 * sq[sq.size() / 2];
  }

  PiecewiseLinear best = std::move(base);
  double best_score = best.loss;  // k = 0 contributes no penalty
  for (int k = 1; k <= max_breaks; ++k) {
    if (static_cast<int>(points.size()) < 2 * (k + 1)) break;
    PiecewiseLinear fit = fit_piecewise(points, k);
    const double score = fit.loss + lambda * k;
    if (score < best_score - 1e-12) {
      best_score = score;
      best = std::move(fit);
    }
  }
  return best;
}

}  // namespace lanecarto
