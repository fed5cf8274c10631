// Response laws: the noise channel h(z, eps) that turns a linear predictor
// into an observation with conditional mean g(z).
#pragma once

#include <string>

#include "hdglm/errors.hpp"
#include "hdglm/link.hpp"
#include "hdglm/rng.hpp"

namespace hdglm {

enum class ResponseFamily { Bernoulli, Poisson, GaussianAdditive, Exponential };

struct ResponseLaw {
  ResponseFamily family = ResponseFamily::Bernoulli;
  double sigma_e2 = 0.0;  // GaussianAdditive noise variance

  std::string family_name() const {
    switch (family) {
      case ResponseFamily::Bernoulli: return "bernoulli";
      case ResponseFamily::Poisson: return "poisson";
      case ResponseFamily::GaussianAdditive: return "gaussian";
      case ResponseFamily::Exponential: return "exponential";
    }
    return "?";
  }
};

struct GlmModel {
  LinkSpec link;
  ResponseLaw law;
};

// One draw of Y given linear predictor z. Orientations are mean-correct:
// E[Y | z] = g(z) for every family (the Bernoulli indicator is 1{u <= g(z)},
// the Exponential has mean g(z)).
inline double h_sample(const ResponseLaw& law, const LinkSpec& link, double z, Rng& rng) {
  double gz = link.g(z);
  switch (law.family) {
    case ResponseFamily::Bernoulli:
      return rng.uniform() <= gz ? 1.0 : 0.0;
    case ResponseFamily::Poisson:
      if (!(gz > 0.0)) throw InvalidRate("poisson rate g(z) must be positive");
      return static_cast<double>(rng.poisson(gz));
    case ResponseFamily::GaussianAdditive:
      return gz + std::sqrt(law.sigma_e2) * rng.normal();
    case ResponseFamily::Exponential:
      if (!(gz > 0.0)) throw InvalidRate("exponential mean g(z) must be positive");
      return -gz * std::log(rng.uniform_pos());
  }
  return 0.0;
}

}  // namespace hdglm
