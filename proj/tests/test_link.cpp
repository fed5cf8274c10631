#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hdglm/link.hpp"

using namespace hdglm;

namespace {

const LinkSpec kAllLinks[] = {
    make_link(LinkFamily::Logistic),
    make_link(LinkFamily::ClippedExp, 50.0),
    make_link(LinkFamily::Piecewise, 5.0, 0.1),
    make_link(LinkFamily::Cloglog),
    make_link(LinkFamily::Linear),
    make_link(LinkFamily::Square),
};

}  // namespace

TEST_CASE("link spot values", "[link]") {
  auto logistic = make_link(LinkFamily::Logistic);
  CHECK(logistic.g(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(logistic.G(0.0) == Catch::Approx(std::log(2.0)).margin(1e-15));

  auto cexp = make_link(LinkFamily::ClippedExp, 50.0);
  // above the clip the link is 50 (t + 1 - log 50)
  CHECK(cexp.g(std::log(50.0) + 1.0) == Catch::Approx(100.0).margin(1e-9));
  CHECK(cexp.g(0.0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(cexp.dg(std::log(50.0) - 1e-9) == Catch::Approx(50.0).epsilon(1e-6));
  CHECK(cexp.dg(std::log(50.0) + 1e-9) == Catch::Approx(50.0).epsilon(1e-6));

  auto pw = make_link(LinkFamily::Piecewise, 5.0, 0.1);
  CHECK(pw.g(-2.0) == Catch::Approx(-10.0));
  CHECK(pw.g(2.0) == Catch::Approx(0.2));
  // argument order must not matter
  auto pw2 = make_link(LinkFamily::Piecewise, 0.1, 5.0);
  CHECK(pw2.g(-2.0) == Catch::Approx(-10.0));
  CHECK(pw2.g(2.0) == Catch::Approx(0.2));

  auto cll = make_link(LinkFamily::Cloglog);
  CHECK(cll.g(0.0) == Catch::Approx(1.0 - std::exp(-1.0)).margin(1e-15));
}

TEST_CASE("link parameter validation", "[link]") {
  CHECK_THROWS_AS(make_link(LinkFamily::ClippedExp, 0.0), InvalidLinkParameter);
  CHECK_THROWS_AS(make_link(LinkFamily::ClippedExp, -3.0), InvalidLinkParameter);
  CHECK_THROWS_AS(make_link(LinkFamily::Piecewise, 2.0, 2.0), InvalidLinkParameter);
}

TEST_CASE("link metadata flags", "[link]") {
  CHECK(make_link(LinkFamily::Linear).is_monotone);
  CHECK_FALSE(make_link(LinkFamily::Linear).even_part_strictly_monotone);
  CHECK_FALSE(make_link(LinkFamily::Square).is_monotone);
  CHECK(make_link(LinkFamily::Square).even_part_strictly_monotone);
  CHECK_FALSE(make_link(LinkFamily::Logistic).even_part_strictly_monotone);
  CHECK(make_link(LinkFamily::Cloglog).even_part_strictly_monotone);
  CHECK(make_link(LinkFamily::ClippedExp, 50.0).even_part_strictly_monotone);
  // sub-unit clip level flattens the even part near the origin
  CHECK_FALSE(make_link(LinkFamily::ClippedExp, 0.5).even_part_strictly_monotone);
  CHECK_FALSE(make_link(LinkFamily::Piecewise, 5.0, -1.0).is_monotone);
}

TEST_CASE("central difference of G recovers g on a 1001-point grid", "[link]") {
  // small enough that the one-sided piecewise slopes stay within tolerance
  // at the kink, large enough that roundoff in G does not dominate
  const double h = 3e-7;
  for (const auto& link : kAllLinks) {
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      double t = -10.0 + 0.02 * k;
      double fd = (link.G(t + h) - link.G(t - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - link.g(t)));
    }
    INFO("family " << link.family_name());
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("central difference of g recovers g' away from kinks", "[link]") {
  const double h = 1e-6;
  for (const auto& link : kAllLinks) {
    for (int k = 0; k <= 200; ++k) {
      double t = -9.987 + 0.1 * k;  // grid avoids the piecewise/clip kinks
      double fd = (link.g(t + h) - link.g(t - h)) / (2.0 * h);
      INFO("family " << link.family_name() << " t=" << t);
      CHECK(fd == Catch::Approx(link.dg(t)).margin(1e-4).epsilon(1e-4));
    }
  }
}

TEST_CASE("monotone links have nonnegative slope on the grid", "[link]") {
  for (const auto& link : kAllLinks) {
    if (!link.is_monotone) continue;
    double prev = link.g(-10.0);
    for (int k = 1; k <= 1000; ++k) {
      double t = -10.0 + 0.02 * k;
      double cur = link.g(t);
      CHECK(cur >= prev - 1e-12);
      CHECK(link.dg(t) >= 0.0);
      prev = cur;
    }
  }
}

TEST_CASE("even-part flag matches strict monotonicity on a positive grid", "[link]") {
  auto strictly_monotone_even_part = [](const LinkSpec& link) {
    // grid starts away from 0 where the even part of any link is flat to
    // first order
    double prev = 0.5 * (link.g(0.01) + link.g(-0.01));
    int dir = 0;
    for (int k = 2; k <= 600; ++k) {
      double s = 0.01 * k;
      double cur = 0.5 * (link.g(s) + link.g(-s));
      double d = cur - prev;
      if (d == 0.0) return false;
      int sign = d > 0 ? 1 : -1;
      if (dir == 0) dir = sign;
      if (sign != dir) return false;
      prev = cur;
    }
    return true;
  };
  for (const auto& link : kAllLinks) {
    INFO("family " << link.family_name());
    CHECK(strictly_monotone_even_part(link) == link.even_part_strictly_monotone);
  }
  auto subunit = make_link(LinkFamily::ClippedExp, 0.5);
  CHECK(strictly_monotone_even_part(subunit) == subunit.even_part_strictly_monotone);
}
