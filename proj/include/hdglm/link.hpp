// Inverse-link families g, their derivatives g' and antiderivatives G
// (G' = g). Dispatch is a tagged switch rather than std::function: link
// evaluation sits inside the proximal root-finder's inner loop.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "hdglm/errors.hpp"

namespace hdglm {

enum class LinkFamily { Logistic, ClippedExp, Piecewise, Cloglog, Linear, Square };

namespace detail {

// softplus log(1+e^t) without overflow
inline double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double logistic_fn(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// E1(x) = -Ei(-x), x > 0
inline double expint_e1(double x) { return -std::expint(-x); }

}  // namespace detail

struct LinkSpec {
  LinkFamily family = LinkFamily::Logistic;
  double threshold = 0.0;   // ClippedExp clip level c
  double slope_neg = 0.0;   // Piecewise slope on t < 0 (the steeper one)
  double slope_pos = 0.0;   // Piecewise slope on t >= 0
  bool is_monotone = false;
  bool even_part_strictly_monotone = false;

  double g(double t) const {
    switch (family) {
      case LinkFamily::Logistic:
        return detail::logistic_fn(t);
      case LinkFamily::ClippedExp: {
        double lc = std::log(threshold);
        return t <= lc ? std::exp(t) : threshold * (t + 1.0 - lc);
      }
      case LinkFamily::Piecewise:
        return t < 0 ? slope_neg * t : slope_pos * t;
      case LinkFamily::Cloglog:
        return -std::expm1(-std::exp(t));
      case LinkFamily::Linear:
        return t;
      case LinkFamily::Square:
        return t * t;
    }
    return 0.0;
  }

  double dg(double t) const {
    switch (family) {
      case LinkFamily::Logistic: {
        double s = detail::logistic_fn(t);
        return s * (1.0 - s);
      }
      case LinkFamily::ClippedExp:
        return t <= std::log(threshold) ? std::exp(t) : threshold;
      case LinkFamily::Piecewise:
        return t < 0 ? slope_neg : slope_pos;
      case LinkFamily::Cloglog: {
        double et = std::exp(t);
        return std::exp(t - et);
      }
      case LinkFamily::Linear:
        return 1.0;
      case LinkFamily::Square:
        return 2.0 * t;
    }
    return 0.0;
  }

  double G(double t) const {
    switch (family) {
      case LinkFamily::Logistic:
        return detail::softplus(t);
      case LinkFamily::ClippedExp: {
        double lc = std::log(threshold);
        if (t <= lc) return std::exp(t);
        double u = t - lc;
        return threshold * (1.0 + u + 0.5 * u * u);
      }
      case LinkFamily::Piecewise:
        return t < 0 ? 0.5 * slope_neg * t * t : 0.5 * slope_pos * t * t;
      case LinkFamily::Cloglog: {
        // G(t) = t + E1(e^t), fixing G(-inf) = -EulerGamma.
        if (t > 34.0) return t;                      // E1(e^t) underflows
        if (t < -34.0) return -0.5772156649015329 + std::exp(t);
        return t + detail::expint_e1(std::exp(t));
      }
      case LinkFamily::Linear:
        return 0.5 * t * t;
      case LinkFamily::Square:
        return t * t * t / 3.0;
    }
    return 0.0;
  }

  std::string family_name() const {
    switch (family) {
      case LinkFamily::Logistic: return "logistic";
      case LinkFamily::ClippedExp: return "clippedexp";
      case LinkFamily::Piecewise: return "piecewise";
      case LinkFamily::Cloglog: return "cloglog";
      case LinkFamily::Linear: return "linear";
      case LinkFamily::Square: return "square";
    }
    return "?";
  }
};

// a/b: ClippedExp -> (threshold, unused); Piecewise -> the two slopes in
// either order (normalized so the steeper one acts on t < 0, matching
// g(t) = min(a t, b t) for positive slopes).
inline LinkSpec make_link(LinkFamily family, double a = 0.0, double b = 0.0) {
  LinkSpec s;
  s.family = family;
  switch (family) {
    case LinkFamily::Logistic:
      s.is_monotone = true;
      s.even_part_strictly_monotone = false;  // even part is constant 1/2
      break;
    case LinkFamily::ClippedExp:
      if (!(a > 0.0)) throw InvalidLinkParameter("clippedexp threshold must be > 0");
      s.threshold = a;
      s.is_monotone = true;
      // for c < 1 the even part is flat on (0, -log c)
      s.even_part_strictly_monotone = a >= 1.0;
      break;
    case LinkFamily::Piecewise: {
      if (a == b) throw InvalidLinkParameter("piecewise slopes must be distinct");
      s.slope_neg = std::max(a, b);
      s.slope_pos = std::min(a, b);
      s.is_monotone = s.slope_pos > 0.0;
      s.even_part_strictly_monotone = true;  // slopes distinct
      break;
    }
    case LinkFamily::Cloglog:
      s.is_monotone = true;
      s.even_part_strictly_monotone = true;
      break;
    case LinkFamily::Linear:
      s.is_monotone = true;
      s.even_part_strictly_monotone = false;  // odd map, even part vanishes
      break;
    case LinkFamily::Square:
      s.is_monotone = false;
      s.even_part_strictly_monotone = true;
      break;
  }
  return s;
}

inline void require_monotone(const LinkSpec& link, const char* where) {
  if (!link.is_monotone)
    throw NonMonotoneLink(std::string(where) + ": link '" + link.family_name() +
                          "' is not monotone increasing");
}

}  // namespace hdglm
