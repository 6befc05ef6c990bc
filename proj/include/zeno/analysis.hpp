#pragma once

// Fits used to read decay laws off simulated coherence curves.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace zeno {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need two equally sized samples of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  return {sxy / sxx, my - sxy / sxx * mx};
}

/// Exponent p in -ln(c(t)/c(0)) ~ t^p, by a log-log fit over the given
/// points. c0 is the coherence at t = 0.
inline double decay_exponent(std::span<const double> t, std::span<const double> coherence,
                             double c0) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double g = -std::log(coherence[i] / c0);
    if (!(t[i] > 0.0) || !(g > 0.0)) {
      throw std::invalid_argument("decay_exponent: need t > 0 and decayed coherence");
    }
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(g));
  }
  return fit_line(lx, ly).slope;
}

}  // namespace zeno
