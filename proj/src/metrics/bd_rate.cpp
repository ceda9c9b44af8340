#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fga/imageio/frame.hpp"
#include "fga/metrics/metrics.hpp"

namespace fga::metrics {
namespace {

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

void RDCurve::validate() {
  if (points.size() < 4)
    throw io::DataError(fmt::format("curve '{}' has {} points, BD-rate needs at least 4", label, points.size()));
  std::sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bpp > 0) || !std::isfinite(points[i].bpp) || !std::isfinite(points[i].quality))
      throw io::DataError(fmt::format("curve '{}': invalid point (bpp {}, quality {})", label, points[i].bpp,
                                      points[i].quality));
    if (i > 0 && !(points[i].bpp > points[i - 1].bpp && points[i].quality > points[i - 1].quality))
      throw io::DataError(fmt::format("curve '{}': rate and quality must both increase (point {})", label, i));
  }
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("pchip needs at least two matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("pchip abscissae must increase strictly");
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(d[k - 1]) * sign(d[k]) <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    m_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  auto edge = [](double h0, double h1, double d0, double d1) {
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(m) != sign(d0)) return 0.0;
    if (sign(d0) != sign(d1) && std::abs(m) > 3 * std::abs(d0)) return 3 * d0;
    return m;
  };
  m_[0] = edge(h[0], h[1], d[0], d[1]);
  m_[n - 1] = edge(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

std::size_t Pchip::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(k, x_.size() - 2);
}

double Pchip::operator()(double x) const {
  const std::size_t k = segment(x);
  const double h = x_[k + 1] - x_[k], t = (x - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
         (t3 - t2) * h * m_[k + 1];
}

// integral of segment k's cubic from x_[k] to x
double Pchip::integral_from_start(std::size_t k, double x) const {
  const double h = x_[k + 1] - x_[k], t = (x - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  const double i00 = t4 / 2 - t3 + t, i10 = t4 / 4 - 2 * t3 / 3 + t2 / 2;
  const double i01 = -t4 / 2 + t3, i11 = t4 / 4 - t3 / 3;
  return h * (i00 * y_[k] + i10 * h * m_[k] + i01 * y_[k + 1] + i11 * h * m_[k + 1]);
}

double Pchip::integral(double a, double b) const {
  if (a > b) return -integral(b, a);
  const std::size_t ka = segment(a), kb = segment(b);
  if (ka == kb) return integral_from_start(ka, b) - integral_from_start(ka, a);
  double s = integral_from_start(ka, x_[ka + 1]) - integral_from_start(ka, a);
  for (std::size_t k = ka + 1; k < kb; ++k) s += integral_from_start(k, x_[k + 1]);
  return s + integral_from_start(kb, b);
}

double bd_rate(RDCurve anchor, RDCurve test) {
  anchor.validate();
  test.validate();
  auto build = [](const RDCurve& c) {
    std::vector<double> q, r;
    for (const auto& p : c.points) {
      q.push_back(p.quality);
      r.push_back(std::log10(p.bpp));
    }
    return Pchip(q, r);
  };
  const double lo = std::max(anchor.points.front().quality, test.points.front().quality);
  const double hi = std::min(anchor.points.back().quality, test.points.back().quality);
  if (!(hi > lo))
    throw io::DataError(fmt::format("curves '{}' and '{}' share no quality range", anchor.label, test.label));
  const double diff = (build(test).integral(lo, hi) - build(anchor).integral(lo, hi)) / (hi - lo);
  return (std::pow(10.0, diff) - 1.0) * 100.0;
}

}  // namespace fga::metrics
