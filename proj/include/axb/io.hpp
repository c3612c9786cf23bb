#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "axb/errors.hpp"

namespace axb::io {

/// Fixed 17-significant-digit text form of a double. 17 digits round-trip
/// binary64 exactly, so two runs that compute the same bits emit the same
/// bytes.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

namespace detail {

inline void dump17_impl(const nlohmann::json& j, std::string& out, int indent, int depth) {
    using value_t = nlohmann::json::value_t;
    const auto pad = [&](int d) { out.append(static_cast<std::size_t>(indent * d), ' '); };
    switch (j.type()) {
        case value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                pad(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                dump17_impl(it.value(), out, indent, depth + 1);
            }
            out += '\n';
            pad(depth);
            out += '}';
            return;
        }
        case value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ",\n";
                first = false;
                pad(depth + 1);
                dump17_impl(el, out, indent, depth + 1);
            }
            out += '\n';
            pad(depth);
            out += ']';
            return;
        }
        case value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";  // JSON has no NaN/inf
            } else {
                out += format_g17(v);
            }
            return;
        }
        default:
            // strings (escaped), integers, booleans, null
            out += j.dump();
            return;
    }
}

} // namespace detail

/// Deterministic pretty JSON: keys sorted (property of nlohmann's default
/// object map), floats in fixed 17-significant-digit form, non-finite
/// floats as null, trailing newline.
inline std::string json_dump17(const nlohmann::json& j) {
    std::string out;
    detail::dump17_impl(j, out, 2, 0);
    out += '\n';
    return out;
}

/// 64-bit FNV-1a over bytes.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex_u64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

/// Writes bytes exactly as given (binary mode, no newline translation).
inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open for writing: " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw io_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    if (f.bad()) throw io_error("read failed: " + path.string());
    return ss.str();
}

} // namespace axb::io
