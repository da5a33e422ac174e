#pragma once

#include "dircom/edge_list.hpp"
#include "dircom/error.hpp"

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dircom {

/// Default bound on max_v |p_V(v) - p_W(v)| accepted for a sampled graph.
inline constexpr double kDefaultMarginalTolerance = 1e-9;
/// Total mass must equal 1 within this bound.
inline constexpr double kMassTolerance = 1e-12;

/// Dense probability matrix p(v, w) over ordered node pairs whose two
/// marginals agree. Construction validates mass and marginals; the object is
/// immutable afterwards.
class BivariateDistribution {
public:
    BivariateDistribution() = default;

    BivariateDistribution(std::size_t n, std::vector<double> values,
                          double marginal_tolerance = kDefaultMarginalTolerance)
        : n_(n), p_(std::move(values)) {
        require_dense_size(n, "bivariate distribution");
        if (p_.size() != n * n) {
            throw ValidationError("bivariate distribution needs n*n = " + std::to_string(n * n) +
                                  " entries, got " + std::to_string(p_.size()));
        }
        if (n == 0) {
            return;
        }
        marginal_v_.assign(n, 0.0);
        marginal_w_.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t w = 0; w < n; ++w) {
                const double x = p_[v * n + w];
                if (!(x >= 0.0) || !std::isfinite(x)) {
                    throw ValidationError("p(" + std::to_string(v) + ", " + std::to_string(w) +
                                          ") = " + std::to_string(x) + " is not a probability");
                }
                marginal_v_[v] += x;
                marginal_w_[w] += x;
            }
        }
        double mass = 0.0;
        for (double x : marginal_v_) {
            mass += x;
        }
        if (std::abs(mass - 1.0) > kMassTolerance) {
            throw ValidationError("bivariate distribution has total mass " + detail::format_double(mass));
        }
        for (std::size_t v = 0; v < n; ++v) {
            const double gap = std::abs(marginal_v_[v] - marginal_w_[v]);
            max_marginal_gap_ = std::max(max_marginal_gap_, gap);
        }
        if (max_marginal_gap_ > marginal_tolerance) {
            throw ValidationError("marginals differ by " + detail::format_double(max_marginal_gap_) +
                                  " (tolerance " + detail::format_double(marginal_tolerance) + ")");
        }
    }

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t v, std::size_t w) const noexcept { return p_[v * n_ + w]; }

    std::span<const double> row(std::size_t v) const noexcept {
        return std::span<const double>(p_).subspan(v * n_, n_);
    }

    std::span<const double> values() const noexcept { return p_; }

    /// p_V(v) = sum_w p(v, w).
    const std::vector<double>& marginal_v() const noexcept { return marginal_v_; }
    /// p_W(w) = sum_v p(v, w).
    const std::vector<double>& marginal_w() const noexcept { return marginal_w_; }

    double max_marginal_gap() const noexcept { return max_marginal_gap_; }

    bool is_symmetric() const noexcept {
        for (std::size_t v = 0; v < n_; ++v) {
            for (std::size_t w = v + 1; w < n_; ++w) {
                if (p_[v * n_ + w] != p_[w * n_ + v]) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> p_;
    std::vector<double> marginal_v_;
    std::vector<double> marginal_w_;
    double max_marginal_gap_ = 0.0;
};

/// Writes the text form: optional `#` comment lines, a header line `n`, then
/// `v<TAB>w<TAB>p` for every nonzero entry in row-major order. Values use the
/// shortest representation that round-trips exactly.
inline void write_bivariate(std::ostream& out, const BivariateDistribution& p,
                            std::span<const std::string> comments = {}) {
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
    const std::size_t n = p.size();
    out << n << '\n';
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t w = 0; w < n; ++w) {
            const double x = p(v, w);
            if (x != 0.0) {
                out << v << '\t' << w << '\t' << detail::format_double(x) << '\n';
            }
        }
    }
}

inline BivariateDistribution read_bivariate(std::istream& in,
                                            double marginal_tolerance = kDefaultMarginalTolerance) {
    std::string raw;
    std::size_t line_no = 0;
    std::optional<std::size_t> n;
    std::vector<double> values;
    std::vector<bool> seen;

    auto parse_index = [&](std::string_view field) {
        std::size_t idx = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), idx);
        if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
            throw ParseError(line_no, "invalid node index '" + std::string(field) + "'");
        }
        if (idx >= *n) {
            throw ParseError(line_no, "node index " + std::to_string(idx) + " outside [0, " + std::to_string(*n) + ")");
        }
        return idx;
    };

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::strip_eol(raw);
        if (line.empty() || line.front() == '#' || detail::is_blank(line)) {
            continue;
        }
        if (!n) {
            std::size_t count = 0;
            auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), count);
            if (ec != std::errc() || ptr != line.data() + line.size()) {
                throw ParseError(line_no, "expected node count header, got '" + std::string(line) + "'");
            }
            require_dense_size(count, "bivariate distribution file");
            n = count;
            values.assign(count * count, 0.0);
            seen.assign(count * count, false);
            continue;
        }
        const auto fields = detail::split_tabs(line);
        if (fields.size() != 3) {
            throw ParseError(line_no, "expected v<TAB>w<TAB>p");
        }
        const std::size_t v = parse_index(fields[0]);
        const std::size_t w = parse_index(fields[1]);
        const auto x = detail::parse_double(fields[2]);
        if (!x || !std::isfinite(*x)) {
            throw ParseError(line_no, "invalid probability '" + std::string(fields[2]) + "'");
        }
        if (*x < 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative probability");
        }
        if (seen[v * *n + w]) {
            throw ParseError(line_no, "duplicate entry (" + std::to_string(v) + ", " + std::to_string(w) + ")");
        }
        seen[v * *n + w] = true;
        values[v * *n + w] = *x;
    }
    if (!n) {
        throw ParseError(line_no, "missing node count header");
    }
    return BivariateDistribution(*n, std::move(values), marginal_tolerance);
}

} // namespace dircom
