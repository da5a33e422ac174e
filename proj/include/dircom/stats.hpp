#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace dircom {

struct MeanInterval {
    double mean = 0.0;
    /// Half-width of the two-sided confidence interval; NaN with fewer than two samples.
    double half_width = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;

    double low() const { return mean - half_width; }
    double high() const { return mean + half_width; }
};

/// Student-t confidence interval for the mean of `values`.
inline MeanInterval mean_interval(std::span<const double> values, double confidence = 0.95) {
    MeanInterval out;
    out.count = values.size();
    if (values.empty()) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) {
        return out;
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - out.mean) * (v - out.mean);
    }
    const double n = static_cast<double>(values.size());
    const double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    out.half_width = t * sd / std::sqrt(n);
    return out;
}

/// Interval for the mean of a[i] - b[i].
inline MeanInterval paired_difference(std::span<const double> a, std::span<const double> b,
                                      double confidence = 0.95) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("paired samples differ in length");
    }
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff[i] = a[i] - b[i];
    }
    return mean_interval(diff, confidence);
}

} // namespace dircom
