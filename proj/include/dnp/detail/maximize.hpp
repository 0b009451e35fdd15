#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace dnp::detail {

// Objective returns -inf (or NaN) where it is undefined. `batch` fills the
// values for a whole vector of taus at once; `objective` is used pointwise
// during refinement.
template <class Batch, class Objective>
double maximize_on_window_batched(Batch&& batch, Objective&& objective,
                                  double upper, const SearchConfig& config) {
  if (!(upper > 0.0) || !std::isfinite(upper)) {
    throw ConfigError("search window must be positive and finite");
  }
  const int n = config.grid_points;
  if (n < 3) throw ConfigError("search grid needs at least 3 points");

  auto safe = [&](double tau) {
    const double v = objective(tau);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  const double step = upper / n;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[i] = step * (i + 1);
  std::vector<double> values = batch(grid);
  int best = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (std::isnan(values[i])) values[i] = -std::numeric_limits<double>::infinity();
    if (values[i] > values[best]) best = i;
    lowest = std::min(lowest, values[i]);
  }
  if (!std::isfinite(values[best])) {
    throw RuntimeSignal(RuntimeSignal::Kind::Annihilated,
                        "objective undefined on the whole search window");
  }
  if (values[best] - lowest <= 1e-15 * std::max(1.0, std::abs(values[best]))) {
    throw RuntimeSignal(RuntimeSignal::Kind::Flat, "objective is flat");
  }

  // Golden-section refinement around the strongest grid peaks; the best
  // refined value wins, and near-equal maxima go to the smallest tau.
  constexpr double kInvPhi = 0.6180339887498948482;
  constexpr int kCandidates = 3;
  const double tol = config.rel_tolerance;
  auto refine = [&](int i) {
    double a = step * i;  // grid point i - 1 (0 for the first point)
    double b = step * (i + 2);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = safe(c);
    double fd = safe(d);
    while (b - a > tol * std::max(std::abs(c), std::numeric_limits<double>::min())) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = safe(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = safe(d);
      }
    }
    std::pair<double, double> out{step * (i + 1), values[i]};
    if (std::max(fc, fd) > values[i]) out = fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
    return out;
  };

  std::vector<int> peaks;
  for (int i = 0; i < n; ++i) {
    const bool left = i == 0 || values[i] >= values[i - 1];
    const bool right = i == n - 1 || values[i] > values[i + 1];
    if (left && right && std::isfinite(values[i])) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(),
            [&](int x, int y) { return values[x] > values[y] || (values[x] == values[y] && x < y); });
  if (peaks.size() > kCandidates) peaks.resize(kCandidates);
  if (peaks.empty()) peaks.push_back(best);

  std::vector<std::pair<double, double>> refined;
  for (int i : peaks) refined.push_back(refine(i));
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& r : refined) top = std::max(top, r.second);
  const double tie = 1e-12 * std::max(1.0, std::abs(top));
  double answer = std::numeric_limits<double>::infinity();
  for (const auto& r : refined) {
    if (r.second >= top - tie) answer = std::min(answer, r.first);
  }
  return answer;
}

template <class Objective>
double maximize_on_window(Objective&& objective, double upper,
                          const SearchConfig& config) {
  auto batch = [&](const std::vector<double>& taus) {
    std::vector<double> out(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) out[i] = objective(taus[i]);
    return out;
  };
  return maximize_on_window_batched(batch, objective, upper, config);
}

}  // namespace dnp::detail
