#include <doctest.h>

#include <cmath>

#include "nsdp/value_grid.hpp"

using namespace nsdp;

namespace {

ValueGrid filled(const BoxGrid& box, const std::vector<double>& times,
                 double (*f)(double, const SpectralField&)) {
    ValueGrid v(box, times);
    for (std::size_t s = 0; s < times.size(); ++s) {
        auto u = v.slice(s);
        for (std::size_t node = 0; node < box.node_count(); ++node) u[node] = f(times[s], box.node_point(node));
    }
    return v;
}

}  // namespace

TEST_CASE("box geometry") {
    const BoxGrid box({1.0, 2.0}, 5);
    CHECK(box.node_count() == 25);
    CHECK(box.spacing(0) == 0.5);
    CHECK(box.spacing(1) == 1.0);
    CHECK(box.coordinate(1, 0) == -2.0);
    CHECK(box.coordinate(1, 4) == 2.0);
    for (std::size_t node = 0; node < box.node_count(); ++node) {
        const auto idx = box.multi_index(node);
        for (std::size_t k = 0; k < 2; ++k) CHECK(idx[k] == box.axis_index(node, k));
    }
    CHECK(box.contains(SpectralField{0.9, -1.9}));
    CHECK_FALSE(box.contains(SpectralField{1.1, 0.0}));
    CHECK_THROWS(BoxGrid({1.0}, 4));
}

TEST_CASE("multilinear data is interpolated exactly, also beyond the faces") {
    const BoxGrid box({1.0, 1.5, 0.5}, 7);
    const auto f = [](double, const SpectralField& x) { return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2] + x[0] * x[1] * x[2]; };
    const ValueGrid v = filled(box, {0.0, 1.0}, +f);
    for (const SpectralField& x : {SpectralField{0.13, -0.71, 0.2}, SpectralField{-0.99, 1.2, -0.4}}) {
        CHECK(v.value(0, x) == doctest::Approx(f(0.0, x)).epsilon(1e-13));
    }
    // Outside: the edge cell's multilinear form is continued.
    const SpectralField out{1.4, 0.2, 0.1};
    CHECK(v.value(0, out) == doctest::Approx(f(0.0, out)).epsilon(1e-13));
    const std::vector<double> nodal(v.slice(0).begin(), v.slice(0).end());
    CHECK(box.interpolate_clamped(nodal, out) == doctest::Approx(f(0.0, SpectralField{1.0, 0.2, 0.1})));
}

TEST_CASE("time interpolation is linear between slices") {
    const BoxGrid box({1.0}, 3);
    const auto f = [](double t, const SpectralField& x) { return t * 4.0 + x[0]; };
    const ValueGrid v = filled(box, {0.0, 0.5, 1.0}, +f);
    CHECK(v.value_at(0.3, SpectralField{0.2}) == doctest::Approx(1.4));
    CHECK(v.value_at(5.0, SpectralField{0.0}) == doctest::Approx(4.0));
    const TimeBracket b = bracket_time({0.0, 0.5, 1.0}, 0.75);
    CHECK(b.s0 == 1);
    CHECK(b.s1 == 2);
    CHECK(b.w == doctest::Approx(0.5));
}

TEST_CASE("gradients are exact for quadratics, including at faces") {
    const BoxGrid box({2.0, 1.0}, 9);
    const auto f = [](double, const SpectralField& x) { return x[0] * x[0] - 3.0 * x[0] * x[1] + 2.0 * x[1] * x[1]; };
    const ValueGrid v = filled(box, {0.0}, +f);
    const GradientField g = gradient(v);
    for (std::size_t node = 0; node < box.node_count(); ++node) {
        const SpectralField x = box.node_point(node);
        const SpectralField d = g.at_node(0, node);
        CHECK(d[0] == doctest::Approx(2.0 * x[0] - 3.0 * x[1]).epsilon(1e-12).scale(1.0));
        CHECK(d[1] == doctest::Approx(-3.0 * x[0] + 4.0 * x[1]).epsilon(1e-12).scale(1.0));
    }
    bool outside = false;
    g.interpolate(0.0, SpectralField{0.1, 0.1}, &outside);
    CHECK_FALSE(outside);
    const SpectralField far = g.interpolate(0.0, SpectralField{5.0, 0.0}, &outside);
    CHECK(outside);
    CHECK(far == g.interpolate(0.0, SpectralField{2.0, 0.0}));
}
