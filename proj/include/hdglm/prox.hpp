// prox_{eta G}(x): the unique root z of z + eta g(z) = x for a monotone
// increasing link g. Safeguarded Newton inside a sign bracket; the
// derivative 1 + eta g'(z) >= 1 keeps the update well conditioned.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "hdglm/errors.hpp"
#include "hdglm/link.hpp"
#include "hdglm/parallel.hpp"

namespace hdglm {

struct ProxQuery {
  double x = 0.0;
  double eta = 0.0;
  const LinkSpec* link = nullptr;
};

namespace detail {

// Monotonicity gives an analytic bracket: when g(x) > 0 the root lies in
// [x - eta g(x), x], mirrored otherwise. If the candidate fails its sign
// check (a link whose metadata lies), fall back to geometric expansion from
// z0 = x, doubling at most 60 times.
inline void prox_bracket(const LinkSpec& link, double eta, double x, double fx,
                         double& lo, double& hi, double& flo, double& fhi) {
  auto phi = [&](double z) { return z + eta * link.g(z) - x; };
  if (fx > 0.0) {
    hi = x;
    fhi = fx;
    lo = x - eta * link.g(x);
    flo = phi(lo);
    if (flo <= 0.0) return;
  } else {
    lo = x;
    flo = fx;
    hi = x - eta * link.g(x);
    fhi = phi(hi);
    if (fhi >= 0.0) return;
  }
  double step = std::max(1.0, std::abs(x));
  for (int k = 0; k < 60; ++k) {
    if (fx > 0.0) {
      lo = x - step;
      flo = phi(lo);
      if (flo <= 0.0) {
        hi = x;
        fhi = fx;
        return;
      }
    } else {
      hi = x + step;
      fhi = phi(hi);
      if (fhi >= 0.0) {
        lo = x;
        flo = fx;
        return;
      }
    }
    step *= 2.0;
  }
  throw BracketFailure("prox: no sign change after 60 bracket doublings");
}

}  // namespace detail

inline double prox(const LinkSpec& link, double eta, double x) {
  require_monotone(link, "prox");
  if (eta < 0.0) throw OutOfRange("prox: eta must be >= 0");
  if (!std::isfinite(x)) throw OutOfRange("prox: x must be finite");
  if (eta == 0.0) return x;

  auto phi = [&](double z) { return z + eta * link.g(z) - x; };
  double fx = phi(x);
  if (fx == 0.0) return x;

  double lo, hi, flo, fhi;
  detail::prox_bracket(link, eta, x, fx, lo, hi, flo, fhi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;

  double z = x - fx / (1.0 + eta * link.dg(x));
  if (!(z > lo && z < hi)) z = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double f = phi(z);
    if (f == 0.0) return z;
    if (f > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    double step = f / (1.0 + eta * link.dg(z));
    double znew = z - step;
    if (!(znew > lo && znew < hi)) znew = 0.5 * (lo + hi);
    if (std::abs(znew - z) <= 1e-14 * std::max(1.0, std::abs(znew))) return znew;
    z = znew;
  }
  return z;
}

inline double prox(const ProxQuery& q) { return prox(*q.link, q.eta, q.x); }

// Batch evaluation at fixed (link, eta); the state-evolution solver calls
// this once per panel sweep. Chunks run concurrently; each slot is
// independent so output does not depend on the worker count.
inline void prox_batch(const LinkSpec& link, double eta, const double* x, double* out,
                       std::size_t m, unsigned workers = 0) {
  require_monotone(link, "prox_batch");
  if (eta == 0.0) {
    for (std::size_t i = 0; i < m; ++i) out[i] = x[i];
    return;
  }
  const std::size_t chunk = 4096;
  const std::size_t nchunks = (m + chunk - 1) / chunk;
  parallel_for(nchunks, [&](std::size_t c) {
    std::size_t begin = c * chunk;
    std::size_t end = std::min(m, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) out[i] = prox(link, eta, x[i]);
  }, workers);
}

}  // namespace hdglm
