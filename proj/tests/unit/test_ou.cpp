#include <doctest.h>

#include <cmath>

#include "../oracles/oracles.hpp"
#include "nsdp/gauss_hermite.hpp"
#include "nsdp/ou.hpp"

using namespace nsdp;

TEST_CASE("transition law in closed form") {
    const GalerkinSystem sys = build_torus_system(4, 2);
    const double t = 0.3;
    const OUTransition tr = ou_transition(sys, t);
    for (std::size_t k = 0; k < sys.dim(); ++k) {
        const double l = sys.lambdas()[k], q = sys.q_spectrum()[k];
        CHECK(tr.mean_decay[k] == doctest::Approx(std::exp(-l * t)).epsilon(1e-14));
        CHECK(tr.variance[k] == doctest::Approx(q * (1.0 - std::exp(-2.0 * l * t)) / (2.0 * l)).epsilon(1e-14));
    }
}

TEST_CASE("t = 0 is the identity and large t reaches the stationary law exactly") {
    const GalerkinSystem sys = build_torus_system(3, 1);
    const SpectralField x{0.7, -1.1, 0.2};
    Rng rng(5);
    CHECK(sample_ou(sys, x, 0.0, rng) == x);
    const OUTransition cap = ou_transition(sys, 1e3);
    for (std::size_t k = 0; k < sys.dim(); ++k) {
        CHECK(cap.mean_decay[k] == 0.0);
        CHECK(cap.variance[k] == sys.q_spectrum()[k] / (2.0 * sys.lambdas()[k]));
    }
}

TEST_CASE("small-time variance branch is continuous") {
    const GalerkinSystem sys = build_torus_system(2, 1);
    const double t = 1e-9;
    const OUTransition tr = ou_transition(sys, t);
    CHECK(tr.variance[0] == doctest::Approx(sys.q_spectrum()[0] * t).epsilon(1e-8));
}

TEST_CASE("sampled moments within four standard errors") {
    const GalerkinSystem sys = build_torus_system(3, 1);
    const SpectralField x{1.0, -0.5, 0.25};
    const double t = 0.4;
    const OUTransition tr = ou_transition(sys, t);
    Rng rng(42);
    const std::size_t n = 100000;
    std::vector<double> s1(3, 0.0), s2(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const SpectralField z = sample_ou(tr, x, rng);
        for (std::size_t k = 0; k < 3; ++k) {
            const double c = z[k] - tr.mean_decay[k] * x[k];
            s1[k] += c;
            s2[k] += c * c;
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const double v = tr.variance[k];
        const double mean_err = s1[k] / n;
        const double var_err = s2[k] / n - v;
        CHECK(std::abs(mean_err) <= 4.0 * std::sqrt(v / n));
        CHECK(std::abs(var_err) <= 4.0 * v * std::sqrt(2.0 / n));
    }
}

TEST_CASE("stochastic convolution path has the transition variance") {
    const GalerkinSystem sys = build_torus_system(2, 1);
    std::vector<double> grid{0.0, 0.1, 0.25, 0.5};
    Rng rng(9);
    const std::size_t n = 40000;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto path = stochastic_convolution_path(sys, grid, rng);
        REQUIRE(path.size() == grid.size());
        CHECK(path[0] == SpectralField(2));
        acc += path.back()[1] * path.back()[1];
    }
    const double v = ou_transition(sys, 0.5).variance[1];
    CHECK(std::abs(acc / n - v) <= 4.0 * v * std::sqrt(2.0 / n));
}

TEST_CASE("Gauss-Hermite rule integrates normal moments") {
    for (std::size_t order : {4u, 8u, 16u, 24u}) {
        const auto& rule = gauss_hermite(order);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
        for (int p = 1; p < static_cast<int>(2 * order); ++p) {
            double acc = 0.0;
            for (std::size_t i = 0; i < order; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], p);
            CAPTURE(order);
            CAPTURE(p);
            // Rounding scales with E|xi|^p, which the next even moment bounds.
            const double size = oracle::normal_moment(p + p % 2);
            CHECK(std::abs(acc - oracle::normal_moment(p)) <= 1e-10 * size);
        }
    }
    const TensorRule t = tensor_gauss_hermite(2, 5);
    CHECK(t.size() == 25);
    CHECK(t.nodes.size() == 50);
}

TEST_CASE("semigroup by quadrature and by sampling agree with the closed form") {
    const GalerkinSystem sys = build_torus_system(2, 1);
    const SpectralField x{0.8, -0.3};
    const double t = 0.2;
    const OUTransition tr = ou_transition(sys, t);
    // R_t |.|^2 (x) = sum (e^{-l t} x)^2 + v.
    double exact = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        exact += std::pow(tr.mean_decay[k] * x[k], 2) + tr.variance[k];
    }
    const TestFunction f = [](const SpectralField& y) { return norm_sq(y); };
    CHECK(apply_R_quadrature(sys, f, t, x).value == doctest::Approx(exact).epsilon(1e-12));
    Rng rng(3);
    const Estimate mc = apply_R(sys, f, t, x, 50000, rng);
    CHECK(std::abs(mc.value - exact) <= 4.0 * mc.std_error);
}
