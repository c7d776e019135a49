#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../oracles/oracles.hpp"
#include "nsdp/galerkin.hpp"
#include "nsdp/rng.hpp"

using namespace nsdp;

namespace {

SpectralField random_field(std::size_t m, Rng& rng) {
    SpectralField x(m);
    for (std::size_t k = 0; k < m; ++k) x[k] = standard_normal(rng);
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("tensor matches physical-space quadrature") {
    struct Case {
        std::size_t m;
        int d;
        int N;
    };
    for (const Case c : {Case{6, 1, 24}, Case{8, 2, 16}, Case{14, 2, 16}, Case{8, 3, 8}, Case{32, 3, 10}}) {
        CAPTURE(c.m);
        CAPTURE(c.d);
        const GalerkinSystem sys = build_torus_system(c.m, c.d);
        const auto ref = oracle::structure_tensor(sys, c.N);
        CHECK(max_abs_diff(sys.tensor_data(), ref) <= 1e-10);
    }
}

TEST_CASE("tensor is not identically zero once interacting shells are present") {
    const auto nonzero = [](const GalerkinSystem& s) {
        return std::any_of(s.tensor_data().begin(), s.tensor_data().end(),
                           [](double v) { return std::abs(v) > 1e-8; });
    };
    CHECK(nonzero(build_torus_system(4, 1)));
    CHECK(nonzero(build_torus_system(8, 2)));
    CHECK(nonzero(build_torus_system(32, 3)));
    // The first shell of the 3D torus (|k| = 1) has no triad interactions.
    CHECK_FALSE(nonzero(build_torus_system(12, 3)));
}

TEST_CASE("energy conservation of the nonlinearity") {
    Rng rng(11);
    for (int d : {1, 2, 3}) {
        const GalerkinSystem sys = build_torus_system(d == 3 ? 32 : 10, d);
        double worst = 0.0;
        for (int trial = 0; trial < 2000; ++trial) {
            const SpectralField x = random_field(sys.dim(), rng);
            const SpectralField y = random_field(sys.dim(), rng);
            const double lhs = std::abs(dot(bilinear(sys, x, y), y));
            const double scale = norm(x) * std::sqrt(norm_v_sq(sys, y)) * norm(y);
            worst = std::max(worst, lhs / scale);
        }
        CAPTURE(d);
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("tensor antisymmetric in its last two slots") {
    const GalerkinSystem sys = build_torus_system(20, 2);
    const std::size_t m = sys.dim();
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k)
                worst = std::max(worst, std::abs(sys.tensor(i, j, k) + sys.tensor(i, k, j)));
    CHECK(worst <= 1e-14);
}

TEST_CASE("modes are ordered by eigenvalue and divergence free") {
    for (int d : {2, 3}) {
        const GalerkinSystem sys = build_torus_system(40, d);
        for (std::size_t k = 1; k < sys.dim(); ++k) CHECK(sys.lambdas()[k - 1] <= sys.lambdas()[k]);
        for (const auto& mode : sys.modes()) {
            double kdota = 0.0, a2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                kdota += mode.wavevector[c] * mode.polarization[c];
                a2 += mode.polarization[c] * mode.polarization[c];
            }
            CHECK(kdota == doctest::Approx(0.0));
            CHECK(a2 == doctest::Approx(1.0));
        }
    }
    const GalerkinSystem line = build_torus_system(5, 1);
    for (std::size_t k = 0; k < 5; ++k) CHECK(line.lambdas()[k] == double((k + 1) * (k + 1)));
}

TEST_CASE("nonlinear term follows the bilinear flag") {
    const GalerkinSystem sys = build_torus_system(6, 1);
    const SpectralField x{0.3, -0.2, 0.5, 0.1, 0.0, 0.4};
    CHECK(norm(nonlinear_term(sys, x)) > 0.0);
    CHECK(norm(nonlinear_term(sys.with_bilinear(false), x)) == 0.0);
    CHECK(nonlinear_term(sys, x) == bilinear(sys, x, x));
}

TEST_CASE("covariance and control spectra") {
    const HypothesisParams hyp(0.1, 1.25, 0.9);
    const GalerkinSystem sys = build_torus_system(6, 2, hyp);
    for (std::size_t k = 0; k < sys.dim(); ++k) {
        const double l = sys.lambdas()[k];
        CHECK(sys.q_spectrum()[k] == doctest::Approx(std::pow(l, -2.5)));
        CHECK(sys.control_spectrum()[k] == doctest::Approx(std::pow(l, -0.9)));
    }
    CHECK(sys.with_noise(false).q_effective(0) == 0.0);
    CHECK(sys.with_noise(false).q_spectrum()[0] == sys.q_spectrum()[0]);
}

TEST_CASE("epsilon and the smoothing threshold") {
    // epsilon = (3 - 2r) / 2 and the control operator must smooth by gamma > 1 - epsilon.
    const HypothesisParams p(0.1, 1.4, 1.0);
    CHECK(p.epsilon() == doctest::Approx(0.1));
    CHECK_NOTHROW(HypothesisParams::strict(0.1, 1.4, 0.91));
    try {
        HypothesisParams::strict(0.1, 1.4, 0.89);
        FAIL("expected rejection");
    } catch (const HypothesisError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0] == "gamma_smoothing");
    }
    try {
        HypothesisParams(-1.0, 1.6, 0.5);
        FAIL("expected rejection");
    } catch (const HypothesisError& e) {
        CHECK(e.violations() == std::vector<std::string>{"g_positive", "r_range"});
    }
}

TEST_CASE("hypothesis report") {
    const HypothesisReport ok = validate_hypotheses(build_torus_system(8, 3));
    CHECK(ok.passed);
    CHECK(ok.violations.empty());
    CHECK(ok.epsilon > 0.0);
    CHECK(ok.epsilon < 0.5);
    CHECK(ok.summable);
    CHECK(ok.q_inverse_identity_error <= 1e-12);
    for (std::size_t k = 1; k < ok.trace_partial_sums.size(); ++k) {
        CHECK(ok.trace_partial_sums[k] >= ok.trace_partial_sums[k - 1]);
    }

    const HypothesisReport bad = validate_hypotheses(build_torus_system(8, 3, HypothesisParams(0.1, 1.4, 0.89)));
    CHECK_FALSE(bad.passed);
    CHECK(bad.violations == std::vector<std::string>{"gamma_smoothing"});
}

TEST_CASE("bilinear constant estimate is finite and reproducible") {
    const GalerkinSystem sys = build_torus_system(10, 2);
    const double c1 = estimate_bilinear_constant(sys, 500, 3);
    const double c2 = estimate_bilinear_constant(sys, 500, 3);
    CHECK(std::isfinite(c1));
    CHECK(c1 > 0.0);
    CHECK(c1 == c2);
}

TEST_CASE("fractional norms") {
    const GalerkinSystem sys = build_torus_system(3, 1);
    const SpectralField x{1.0, 1.0, 1.0};
    CHECK(norm_v_sq(sys, x) == doctest::Approx(1.0 + 4.0 + 9.0));
    CHECK(norm_a_sq(sys, x) == doctest::Approx(1.0 + 16.0 + 81.0));
    CHECK(fractional_norm_sq(sys, 0.5, x) == doctest::Approx(norm_v_sq(sys, x)));
    CHECK(apply_A(sys, x)[2] == -9.0);
}
