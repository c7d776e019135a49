#pragma once

#include <cstddef>
#include <vector>

namespace nsdp {

/// Nodes and weights for E[f(xi)], xi ~ N(0, 1): sum_i w_i f(x_i), sum w_i = 1.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Probabilists' rule of the given order (exact for polynomials of degree
/// 2 * order - 1). Cached per order.
const GaussHermiteRule& gauss_hermite(std::size_t order);

/// Tensor product of `dims` copies of the one-dimensional rule; nodes stored
/// row-major (point p occupies nodes[p * dims .. p * dims + dims)).
struct TensorRule {
    std::size_t dims = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

TensorRule tensor_gauss_hermite(std::size_t dims, std::size_t order);

}  // namespace nsdp
