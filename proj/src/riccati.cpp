#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsdp/hjb.hpp"

namespace nsdp {

RiccatiSolution::RiccatiSolution(const GalerkinSystem& sys, std::vector<double> M,
                                 std::vector<double> N, double T, double step)
    : m_(sys.dim()), T_(T), step_(step), M_(std::move(M)) {
    if (sys.bilinear_enabled()) {
        throw std::invalid_argument("RiccatiSolution: the quadratic ansatz needs the bilinear term disabled");
    }
    if (M_.size() != m_ * m_ || N.size() != m_ * m_) {
        throw std::invalid_argument("RiccatiSolution: M and N must be m x m");
    }
    if (!(T > 0.0) || !(step > 0.0)) throw std::invalid_argument("RiccatiSolution: T and step must be positive");
    lambda_ = sys.lambdas();
    b2_.resize(m_);
    q_.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) {
        b2_[k] = sys.control_spectrum()[k] * sys.control_spectrum()[k];
        q_[k] = sys.q_effective(k);
    }
    const auto n = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
    step_ = T / static_cast<double>(n);
    std::vector<double> s(N);
    s.push_back(0.0);
    states_.reserve(n + 1);
    states_.push_back(s);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k1 = rhs(s);
        std::vector<double> tmp(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + 0.5 * step_ * k1[j];
        const auto k2 = rhs(tmp);
        for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + 0.5 * step_ * k2[j];
        const auto k3 = rhs(tmp);
        for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + step_ * k3[j];
        const auto k4 = rhs(tmp);
        for (std::size_t j = 0; j < s.size(); ++j) {
            s[j] += step_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        states_.push_back(s);
    }
}

std::vector<double> RiccatiSolution::rhs(const std::vector<double>& s) const {
    std::vector<double> d(m_ * m_ + 1, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) {
            double quad = 0.0;
            for (std::size_t k = 0; k < m_; ++k) quad += s[i * m_ + k] * b2_[k] * s[k * m_ + j];
            d[i * m_ + j] = -(lambda_[i] + lambda_[j]) * s[i * m_ + j] - 2.0 * quad + M_[i * m_ + j];
        }
        d[m_ * m_] += q_[i] * s[i * m_ + i];
    }
    return d;
}

std::vector<double> RiccatiSolution::state_at(double t) const {
    if (!(t >= 0.0) || t > T_ * (1.0 + 1e-12)) {
        throw std::invalid_argument("RiccatiSolution: t outside [0, T]");
    }
    const auto i = std::min(static_cast<std::size_t>(t / step_), states_.size() - 1);
    const double h = t - static_cast<double>(i) * step_;
    const std::vector<double>& s = states_[i];
    if (h <= 0.0) return s;
    // One partial RK4 step from the nearest stored state below t.
    const auto k1 = rhs(s);
    std::vector<double> tmp(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + 0.5 * h * k1[j];
    const auto k2 = rhs(tmp);
    for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + 0.5 * h * k2[j];
    const auto k3 = rhs(tmp);
    for (std::size_t j = 0; j < s.size(); ++j) tmp[j] = s[j] + h * k3[j];
    const auto k4 = rhs(tmp);
    std::vector<double> out(s);
    for (std::size_t j = 0; j < s.size(); ++j) {
        out[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return out;
}

std::vector<double> RiccatiSolution::P(double t) const {
    std::vector<double> s = state_at(t);
    s.pop_back();
    return s;
}

double RiccatiSolution::rho(double t) const { return state_at(t).back(); }

double RiccatiSolution::value(double t, const SpectralField& x) const {
    const std::vector<double> s = state_at(t);
    double acc = s.back();
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) acc += x[i] * s[i * m_ + j] * x[j];
    }
    return acc;
}

SpectralField RiccatiSolution::gradient(double t, const SpectralField& x) const {
    const std::vector<double> p = P(t);
    SpectralField g(m_);
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) g[i] += 2.0 * p[i * m_ + j] * x[j];
    }
    return g;
}

}  // namespace nsdp
