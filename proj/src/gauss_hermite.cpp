#include "nsdp/gauss_hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nsdp {

namespace {

// Physicists' Hermite nodes by Newton iteration on the orthonormal recurrence,
// then rescaled to the standard normal weight.
GaussHermiteRule compute_rule(std::size_t n) {
    std::vector<double> x(n), w(n);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    const std::size_t half = (n + 1) / 2;
    double z = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        const double nd = static_cast<double>(n);
        if (i == 0) {
            z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(nd, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = z * std::sqrt(2.0 / (jd + 1.0)) * p2 - std::sqrt(jd / (jd + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * nd) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < n; ++i) {
        // int e^{-x^2} f(x) dx  ->  E f(xi), xi = sqrt(2) x
        rule.nodes[n - 1 - i] = std::sqrt(2.0) * x[i];
        rule.weights[n - 1 - i] = w[i] * inv_sqrt_pi;
    }
    return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t order) {
    if (order == 0) throw std::invalid_argument("gauss_hermite: order must be positive");
    static std::mutex mutex;
    static std::map<std::size_t, GaussHermiteRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

TensorRule tensor_gauss_hermite(std::size_t dims, std::size_t order) {
    const GaussHermiteRule& rule = gauss_hermite(order);
    TensorRule out;
    out.dims = dims;
    std::size_t count = 1;
    for (std::size_t d = 0; d < dims; ++d) count *= order;
    out.nodes.resize(count * dims);
    out.weights.resize(count);
    std::vector<std::size_t> idx(dims, 0);
    for (std::size_t p = 0; p < count; ++p) {
        double w = 1.0;
        for (std::size_t d = 0; d < dims; ++d) {
            out.nodes[p * dims + d] = rule.nodes[idx[d]];
            w *= rule.weights[idx[d]];
        }
        out.weights[p] = w;
        for (std::size_t d = dims; d-- > 0;) {
            if (++idx[d] < order) break;
            idx[d] = 0;
        }
    }
    return out;
}

}  // namespace nsdp
