#pragma once

#include "dircom/error.hpp"
#include "dircom/graph.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dircom {

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view strip_eol(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
        line.remove_suffix(1);
    }
    return line;
}

inline bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::optional<double> parse_double(std::string_view text) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last) {
        return std::nullopt;
    }
    return value;
}

inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} // namespace detail

/// Reads `src<TAB>dst[<TAB>weight]` lines. Lines starting with `#` and blank
/// lines are skipped; a line holding a single label declares a node without
/// edges. Labels get indices in order of first appearance, duplicate edges
/// are merged by summing weights.
inline DirectedGraph load_edge_list(std::istream& in) {
    GraphBuilder builder;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::strip_eol(raw);
        if (line.empty() || line.front() == '#' || detail::is_blank(line)) {
            continue;
        }
        const auto fields = detail::split_tabs(line);
        for (const auto f : fields) {
            if (f.empty()) {
                throw ParseError(line_no, "empty field");
            }
        }
        if (fields.size() == 1) {
            builder.add_node(fields[0]);
            continue;
        }
        if (fields.size() > 3) {
            throw ParseError(line_no, "expected src<TAB>dst[<TAB>weight], got " + std::to_string(fields.size()) +
                                          " fields");
        }
        double weight = 1.0;
        if (fields.size() == 3) {
            const auto parsed = detail::parse_double(fields[2]);
            if (!parsed || !std::isfinite(*parsed)) {
                throw ParseError(line_no, "invalid weight '" + std::string(fields[2]) + "'");
            }
            if (*parsed < 0.0) {
                throw ValidationError("line " + std::to_string(line_no) + ": negative weight " +
                                      std::string(fields[2]));
            }
            weight = *parsed;
        }
        builder.add_edge(fields[0], fields[1], weight);
    }
    return std::move(builder).build();
}

inline DirectedGraph load_edge_list(std::string_view text) {
    std::istringstream in{std::string(text)};
    return load_edge_list(in);
}

/// Writes every node as a declaration line (preserving index order), then one
/// line per merged edge. Unit weights are omitted.
inline void write_edge_list(std::ostream& out, const DirectedGraph& g) {
    for (const auto& label : g.labels()) {
        out << label << '\n';
    }
    for (const auto& e : g.edges()) {
        out << g.label(e.src) << '\t' << g.label(e.dst);
        if (e.weight != 1.0) {
            out << '\t' << detail::format_double(e.weight);
        }
        out << '\n';
    }
}

inline std::string to_edge_list(const DirectedGraph& g) {
    std::ostringstream out;
    write_edge_list(out, g);
    return out.str();
}

} // namespace dircom
