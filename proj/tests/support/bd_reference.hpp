#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fga/metrics/metrics.hpp"

namespace fga::testing {

// Reference BD-rate: its own PCHIP (point-slope Hermite form in x) and
// composite Simpson integration.
inline double reference_bd_rate(const metrics::RDCurve& a, const metrics::RDCurve& t) {
  struct Interp {
    std::vector<double> x, y, m;
    explicit Interp(const metrics::RDCurve& c) {
      for (const auto& p : c.points) {
        x.push_back(p.quality);
        y.push_back(std::log10(p.bpp));
      }
      const std::size_t n = x.size();
      std::vector<double> del(n - 1), h(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        del[i] = (y[i + 1] - y[i]) / h[i];
      }
      m.resize(n);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0) {
          m[i] = 0;
        } else {
          const double a1 = 2 * h[i] + h[i - 1], a2 = h[i] + 2 * h[i - 1];
          m[i] = (a1 + a2) * del[i - 1] * del[i] / (a1 * del[i] + a2 * del[i - 1]);
        }
      }
      auto end = [&](double h0, double h1, double d0, double d1) {
        double v = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (v * d0 <= 0) return 0.0;
        if (d0 * d1 < 0 && std::fabs(v) > 3 * std::fabs(d0)) return 3 * d0;
        return v;
      };
      m[0] = end(h[0], h[1], del[0], del[1]);
      m[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }
    double operator()(double q) const {
      std::size_t k = 0;
      while (k + 2 < x.size() && q > x[k + 1]) ++k;
      const double h = x[k + 1] - x[k], s = q - x[k];
      const double d = (y[k + 1] - y[k]) / h;
      const double c2 = (3 * d - 2 * m[k] - m[k + 1]) / h;
      const double c3 = (m[k] + m[k + 1] - 2 * d) / (h * h);
      return y[k] + s * (m[k] + s * (c2 + s * c3));
    }
  };
  const Interp ia(a), it(t);
  const double lo = std::max(a.points.front().quality, t.points.front().quality);
  const double hi = std::min(a.points.back().quality, t.points.back().quality);
  const int n = 200000;
  const double step = (hi - lo) / n;
  double s = 0;
  for (int i = 0; i <= n; ++i) {
    const double q = lo + i * step;
    const double wgt = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    s += wgt * (it(q) - ia(q));
  }
  return (std::pow(10.0, s * step / 3 / (hi - lo)) - 1) * 100;
}

}  // namespace fga::testing
