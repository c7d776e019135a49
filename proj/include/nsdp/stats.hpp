#pragma once

#include <cstddef>
#include <span>

namespace nsdp {

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;   // unbiased sample variance
    double std_error = 0.0;  // sqrt(variance / n)
};

/// Pairwise summation in index order, so the result depends only on the data order.
double pairwise_sum(std::span<const double> values);

SampleSummary summarize(std::span<const double> values);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-sided Student-t confidence interval for a mean.
Interval confidence_interval(const SampleSummary& s, double level);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct WelchComparison {
    double difference = 0.0;  // mean(b) - mean(a)
    double std_error = 0.0;
    double dof = 0.0;
    Interval interval;        // two-sided CI of the difference
    Verdict verdict = Verdict::Inconclusive;
};

/// Tests mean(a) <= mean(b) with a Welch interval at `level`. Pass when the
/// interval of mean(b) - mean(a) lies strictly above zero (or the difference is
/// exact and nonnegative), Fail when it lies strictly below zero.
WelchComparison welch_less_equal(const SampleSummary& a, const SampleSummary& b, double level);

/// Two-sided Student-t quantile; falls back to the normal quantile for huge dof.
double student_t_quantile(double dof, double level);

}  // namespace nsdp
