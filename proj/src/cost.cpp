#include "nsdp/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace nsdp {

const char* to_string(CostKind kind) {
    switch (kind) {
        case CostKind::Constant: return "constant";
        case CostKind::SaturatedEnstrophy: return "saturated_enstrophy";
        case CostKind::RationalEnstrophy: return "rational_enstrophy";
        case CostKind::Quadratic: return "quadratic";
    }
    return "unknown";
}

CostKind cost_kind_from_string(const std::string& name) {
    if (name == "constant") return CostKind::Constant;
    if (name == "saturated_enstrophy") return CostKind::SaturatedEnstrophy;
    if (name == "rational_enstrophy") return CostKind::RationalEnstrophy;
    if (name == "quadratic") return CostKind::Quadratic;
    throw std::invalid_argument("unknown cost descriptor '" + name + "'");
}

CostTerm CostTerm::constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("constant cost must be >= 0");
    CostTerm t;
    t.kind_ = CostKind::Constant;
    t.param_ = c;
    return t;
}

CostTerm CostTerm::saturated_enstrophy(const GalerkinSystem& sys, double cap) {
    if (!(cap > 0.0) || !std::isfinite(cap)) throw std::invalid_argument("enstrophy cap M must be > 0");
    CostTerm t;
    t.kind_ = CostKind::SaturatedEnstrophy;
    t.param_ = cap;
    t.weights_ = sys.curl_weights();
    return t;
}

CostTerm CostTerm::rational_enstrophy(const GalerkinSystem& sys, double cap) {
    CostTerm t = saturated_enstrophy(sys, cap);
    t.kind_ = CostKind::RationalEnstrophy;
    return t;
}

CostTerm CostTerm::quadratic(std::size_t m, std::vector<double> matrix) {
    if (matrix.size() != m * m) throw std::invalid_argument("quadratic cost: matrix must be m x m");
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (matrix[i * m + j] != matrix[j * m + i]) {
                throw std::invalid_argument("quadratic cost: matrix must be symmetric");
            }
        }
        if (matrix[i * m + i] < 0.0) throw std::invalid_argument("quadratic cost: negative diagonal");
    }
    CostTerm t;
    t.kind_ = CostKind::Quadratic;
    t.matrix_ = std::move(matrix);
    return t;
}

CostTerm CostTerm::quadratic_diagonal(const std::vector<double>& diag) {
    const std::size_t m = diag.size();
    std::vector<double> matrix(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) matrix[i * m + i] = diag[i];
    return quadratic(m, std::move(matrix));
}

double CostTerm::operator()(const SpectralField& x) const {
    double base = 0.0;
    switch (kind_) {
        case CostKind::Constant:
            base = param_;
            break;
        case CostKind::SaturatedEnstrophy:
        case CostKind::RationalEnstrophy: {
            if (x.dim() != weights_.size()) throw std::invalid_argument("cost: dimension mismatch");
            double e = 0.0;
            for (std::size_t k = 0; k < x.dim(); ++k) e += weights_[k] * x[k] * x[k];
            base = kind_ == CostKind::SaturatedEnstrophy ? std::min(e, param_)
                                                         : e / (1.0 + e / param_);
            break;
        }
        case CostKind::Quadratic: {
            const std::size_t m = x.dim();
            if (matrix_.size() != m * m) throw std::invalid_argument("cost: dimension mismatch");
            for (std::size_t i = 0; i < m; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < m; ++j) row += matrix_[i * m + j] * x[j];
                base += x[i] * row;
            }
            break;
        }
    }
    return scale_ * base + shift_;
}

double CostTerm::sup() const {
    switch (kind_) {
        case CostKind::Constant: return scale_ * param_ + shift_;
        case CostKind::SaturatedEnstrophy:
        case CostKind::RationalEnstrophy: return scale_ * param_ + shift_;
        case CostKind::Quadratic: return std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::infinity();
}

CostTerm CostTerm::scaled(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("cost scale must be positive");
    CostTerm t = *this;
    t.scale_ *= s;
    t.shift_ *= s;
    return t;
}

CostTerm CostTerm::shifted(double delta) const {
    if (!(delta >= 0.0)) throw std::invalid_argument("cost shift must be nonnegative");
    CostTerm t = *this;
    t.shift_ += delta;
    return t;
}

CostSpec make_bounded_cost(const GalerkinSystem& sys, CostKind kind, double cap,
                           double terminal_cap) {
    switch (kind) {
        case CostKind::SaturatedEnstrophy:
            return {CostTerm::saturated_enstrophy(sys, cap),
                    CostTerm::saturated_enstrophy(sys, terminal_cap)};
        case CostKind::RationalEnstrophy:
            return {CostTerm::rational_enstrophy(sys, cap),
                    CostTerm::rational_enstrophy(sys, terminal_cap)};
        case CostKind::Constant:
            return {CostTerm::constant(cap), CostTerm::constant(terminal_cap)};
        case CostKind::Quadratic:
            break;
    }
    throw std::invalid_argument("make_bounded_cost: quadratic costs are unbounded");
}

}  // namespace nsdp
