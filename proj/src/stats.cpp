#include "nsdp/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nsdp {

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = pairwise_sum(values) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - s.mean;
        sq[i] = d * d;
    }
    s.variance = pairwise_sum(sq) / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
    return s;
}

double student_t_quantile(double dof, double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must be in (0,1)");
    const double p = 0.5 + level / 2.0;
    if (!(dof > 0.0) || dof > 1e7) {
        return boost::math::quantile(boost::math::normal_distribution<double>(), p);
    }
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

Interval confidence_interval(const SampleSummary& s, double level) {
    const double dof = s.n > 1 ? static_cast<double>(s.n - 1) : 1.0;
    const double half = student_t_quantile(dof, level) * s.std_error;
    return {s.mean - half, s.mean + half};
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

WelchComparison welch_less_equal(const SampleSummary& a, const SampleSummary& b, double level) {
    WelchComparison c;
    c.difference = b.mean - a.mean;
    const double va = a.std_error * a.std_error;
    const double vb = b.std_error * b.std_error;
    c.std_error = std::sqrt(va + vb);
    if (c.std_error == 0.0) {
        c.interval = {c.difference, c.difference};
        c.dof = 0.0;
        c.verdict = c.difference >= 0.0 ? Verdict::Pass : Verdict::Fail;
        return c;
    }
    // Welch-Satterthwaite degrees of freedom.
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    const double denom = (na > 1 ? va * va / (na - 1) : 0.0) + (nb > 1 ? vb * vb / (nb - 1) : 0.0);
    c.dof = denom > 0.0 ? (va + vb) * (va + vb) / denom : 1.0;
    const double half = student_t_quantile(c.dof, level) * c.std_error;
    c.interval = {c.difference - half, c.difference + half};
    if (c.interval.lower > 0.0) {
        c.verdict = Verdict::Pass;
    } else if (c.interval.upper < 0.0) {
        c.verdict = Verdict::Fail;
    } else {
        c.verdict = Verdict::Inconclusive;
    }
    return c;
}

}  // namespace nsdp
