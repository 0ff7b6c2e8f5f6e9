#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "elliptw/model.hpp"

using namespace elliptw;

namespace {

ModelConfig base_config(int p, int n) {
    ModelConfig c;
    c.p = p;
    c.n = n;
    c.spectrum = PopulationSpectrum::identity(p);
    c.radial = RadialLaw::parametric(1.0, 0.0);
    c.tau = 0.1;
    return c;
}

} // namespace

TEST_CASE("validate accepts the identity model") {
    ModelConfig c = base_config(200, 200);
    CHECK(validate(c).empty());
    // idempotent and side-effect free
    CHECK(validate(c).empty());
}

TEST_CASE("validate reports ordering violations") {
    ModelConfig c = base_config(3, 3);
    c.spectrum.sigmas = {2.0, 3.0, 1.0};
    auto v = validate(c);
    REQUIRE(!v.empty());
    CHECK(v.front().find("not nonincreasing at index 1") != std::string::npos);
}

TEST_CASE("validate reports the aspect-ratio bound") {
    ModelConfig c = base_config(1000, 10);
    c.spectrum = PopulationSpectrum::identity(1000);
    auto v = validate(c);
    bool found = false;
    for (const auto& msg : v)
        if (msg.find("exceeds tau^-1") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("radial_cdf of the uniform-edge family") {
    RadialLaw law = RadialLaw::parametric(1.0, 0.0); // d = 0, b = 1: uniform on (0, 1]
    CHECK(radial_cdf(law, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(radial_cdf(law, 1.0) == doctest::Approx(1.0));
    CHECK(radial_cdf(law, 2.0) == doctest::Approx(1.0));
    CHECK(radial_cdf(law, -0.1) == doctest::Approx(0.0));
}

TEST_CASE("radial_cdf closed form for d = 1") {
    RadialLaw law = RadialLaw::parametric(1.0, 1.0);
    for (double x : {1e-1, 1e-2, 1e-3}) {
        CHECK(1.0 - radial_cdf(law, 1.0 - x) == doctest::Approx(x * x).epsilon(1e-10));
    }
}

TEST_CASE("radial_cdf is nondecreasing and hits 1 at l (general b)") {
    RadialLaw law = RadialLaw::parametric(2.0, 0.5, 2.5);
    double prev = 0.0;
    for (double x = 0.0; x <= 2.0; x += 0.01) {
        double f = radial_cdf(law, x);
        CHECK(f >= prev - 1e-15);
        prev = f;
    }
    CHECK(radial_cdf(law, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("near-edge tail exponent matches d+1") {
    // log(1 - F(l - x)) / log(x) -> d + 1 as x -> 0+
    for (double d : {0.0, 0.5, 1.0, 2.0}) {
        RadialLaw law = RadialLaw::parametric(1.0, d);
        for (double x : {1e-2, 1e-3, 1e-4}) {
            double tail = 1.0 - radial_cdf(law, 1.0 - x);
            double fitted = std::log(tail) / std::log(x);
            CHECK(std::abs(fitted - (d + 1.0)) < 0.05);
        }
    }
    // a non-unit shape keeps the same edge exponent
    RadialLaw law = RadialLaw::parametric(1.0, 1.0, 2.0);
    double f3 = 1.0 - radial_cdf(law, 1.0 - 1e-3);
    double f4 = 1.0 - radial_cdf(law, 1.0 - 1e-4);
    double slope = (std::log(f3) - std::log(f4)) / (std::log(1e-3) - std::log(1e-4));
    CHECK(std::abs(slope - 2.0) < 0.05);
}

TEST_CASE("empirical law cdf and errors") {
    RadialLaw law = RadialLaw::empirical({0.2, 0.5, 1.0});
    CHECK(radial_cdf(law, 0.6) == doctest::Approx(2.0 / 3.0));
    RadialLaw broken;
    broken.kind = RadialLaw::Kind::empirical;
    CHECK_THROWS_AS(radial_cdf(broken, 0.5), std::logic_error);
}

TEST_CASE("radial mean closed form") {
    RadialLaw law = RadialLaw::parametric(1.0, 0.0); // uniform: mean 1/2
    CHECK(law.mean() == doctest::Approx(0.5));
    RadialLaw law2 = RadialLaw::parametric(2.0, 1.0, 1.0); // 2 * 1/3
    CHECK(law2.mean() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("two-atom spectrum construction") {
    auto s = PopulationSpectrum::two_atom(10, 2.0, 1.0, 0.3);
    CHECK(s.sigmas.front() == 2.0);
    CHECK(s.sigmas.back() == 1.0);
    int n_hi = 0;
    for (double v : s.sigmas) n_hi += (v == 2.0);
    CHECK(n_hi == 3);
}
