#pragma once

// LIBSVM text datasets: parsing, serialization, binary label remapping,
// seeded train/test splitting and a small generated dataset for desk runs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbmm/core.hpp"
#include "cbmm/errors.hpp"

namespace cbmm {

struct Sample {
    SparseVector features;
    double label;
    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::vector<Sample> samples;
    /// max feature index + 1, possibly widened to match a companion file
    std::size_t dimension = 0;

    std::size_t size() const noexcept { return samples.size(); }
    bool operator==(const Dataset&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n\v\f";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view tok, std::size_t line) {
    // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
    std::string_view body = tok;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (body.empty() || ec != std::errc() || ptr != body.data() + body.size() || !std::isfinite(v)) {
        throw ParseError("malformed number '" + std::string(tok) + "'", line);
    }
    return v;
}

inline std::size_t parse_index(std::string_view tok, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("malformed feature index '" + std::string(tok) + "'", line);
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Parse LIBSVM text: `label idx:val idx:val ...` per line, 1-based
/// strictly increasing indices. Blank lines and `#` comments are skipped.
/// Explicit zero values are dropped.
inline Dataset parse_libsvm(std::istream& in) {
    Dataset ds;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::vector<std::string_view> tokens;
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto start = line.find_first_not_of(" \t", pos);
            if (start == std::string_view::npos) break;
            auto end = line.find_first_of(" \t", start);
            if (end == std::string_view::npos) end = line.size();
            tokens.push_back(line.substr(start, end - start));
            pos = end;
        }

        const double label = detail::parse_double(tokens.front(), line_no);
        std::vector<SparseVector::Entry> entries;
        std::size_t last_index = 0;
        for (std::size_t k = 1; k < tokens.size(); ++k) {
            const auto colon = tokens[k].find(':');
            if (colon == std::string_view::npos) {
                throw ParseError("expected index:value, got '" + std::string(tokens[k]) + "'", line_no);
            }
            const std::size_t index = detail::parse_index(tokens[k].substr(0, colon), line_no);
            const double value = detail::parse_double(tokens[k].substr(colon + 1), line_no);
            if (index == 0) throw FormatError("feature indices are 1-based; got 0", line_no);
            if (index <= last_index) {
                throw FormatError("feature index " + std::to_string(index) + " is not greater than " +
                                      std::to_string(last_index),
                                  line_no);
            }
            last_index = index;
            if (value != 0.0) entries.push_back({index - 1, value});
        }
        SparseVector features(std::move(entries));
        ds.dimension = std::max(ds.dimension, last_index);
        ds.samples.push_back({std::move(features), label});
    }
    if (ds.samples.empty()) throw EmptyDatasetError();
    return ds;
}

inline Dataset parse_libsvm(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_libsvm(in);
}

inline Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return parse_libsvm(in);
}

/// Inverse of parse_libsvm up to formatting: shortest round-trip decimals,
/// 1-based indices.
inline void write_libsvm(const Dataset& ds, std::ostream& out) {
    for (const auto& s : ds.samples) {
        out << detail::format_double(s.label);
        for (const auto& e : s.features.entries()) {
            out << ' ' << (e.index + 1) << ':' << detail::format_double(e.value);
        }
        out << '\n';
    }
}

inline std::string to_libsvm(const Dataset& ds) {
    std::ostringstream out;
    write_libsvm(ds, out);
    return out.str();
}

/// Widen both datasets to the larger dimension so test vectors are never
/// truncated relative to the training set.
inline void harmonize_dimension(Dataset& a, Dataset& b) {
    const std::size_t d = std::max(a.dimension, b.dimension);
    a.dimension = d;
    b.dimension = d;
}

/// Assignment of raw labels to the two binary classes.
class LabelRemap {
public:
    LabelRemap(std::set<double> positive, std::set<double> negative)
        : positive_(std::move(positive)), negative_(std::move(negative)) {
        for (double v : positive_) {
            if (negative_.count(v)) {
                throw InvalidArgument("LabelRemap: label " + detail::format_double(v) + " is in both classes");
            }
        }
    }

    /// {+1} -> +1, {-1} -> -1
    static LabelRemap identity() { return LabelRemap({1.0}, {-1.0}); }

    /// Parses comma-separated label lists such as "1" and "2,3".
    static LabelRemap parse(std::string_view positive, std::string_view negative) {
        return LabelRemap(parse_list(positive), parse_list(negative));
    }

    const std::set<double>& positive() const noexcept { return positive_; }
    const std::set<double>& negative() const noexcept { return negative_; }

    double map(double raw) const {
        if (positive_.count(raw)) return 1.0;
        if (negative_.count(raw)) return -1.0;
        throw RemapError("label " + detail::format_double(raw) + " is not covered by the remap rule");
    }

private:
    static std::set<double> parse_list(std::string_view text) {
        std::set<double> out;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find(',', pos);
            if (end == std::string_view::npos) end = text.size();
            const auto tok = detail::trim(text.substr(pos, end - pos));
            if (!tok.empty()) out.insert(detail::parse_double(tok, 0));
            pos = end + 1;
        }
        return out;
    }

    std::set<double> positive_;
    std::set<double> negative_;
};

inline Dataset remap_labels(const Dataset& ds, const LabelRemap& map) {
    Dataset out = ds;
    for (auto& s : out.samples) s.label = map.map(s.label);
    return out;
}

inline bool is_binary(const Dataset& ds) {
    return std::all_of(ds.samples.begin(), ds.samples.end(),
                       [](const Sample& s) { return s.label == 1.0 || s.label == -1.0; });
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1, first round(n * fraction) indices go to test.
inline SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidArgument("split: test fraction must be in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test == 0 || n_test >= n) throw InvalidArgument("split: fraction leaves train or test empty");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    SplitIndices out;
    out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (ds.samples.empty()) throw EmptyDatasetError();
    const SplitIndices idx = split_indices(ds.size(), test_fraction, seed);
    Dataset train{{}, ds.dimension};
    Dataset test{{}, ds.dimension};
    for (auto i : idx.train) train.samples.push_back(ds.samples[i]);
    for (auto i : idx.test) test.samples.push_back(ds.samples[i]);
    return {std::move(train), std::move(test)};
}

/// Gaussian features, labels from a random hidden hyperplane with a fraction
/// of them flipped. Deterministic for a given seed.
inline Dataset generate_dataset(std::size_t n, std::size_t d, std::uint64_t seed, double flip_fraction = 0.1) {
    if (n == 0 || d == 0) throw InvalidArgument("generate_dataset: n and d must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector hidden(d);
    for (double& v : hidden) v = normal(rng);
    Dataset ds{{}, d};
    ds.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector x(d);
        for (double& v : x) v = normal(rng);
        double label = dot(x, hidden) >= 0.0 ? 1.0 : -1.0;
        if (unit(rng) < flip_fraction) label = -label;
        ds.samples.push_back({SparseVector::from_dense(x), label});
    }
    return ds;
}

}  // namespace cbmm
