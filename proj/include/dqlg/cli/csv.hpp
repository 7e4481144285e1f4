#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

namespace dqlg::cli {

/// Comma-separated text with a header row; floats carry 17 significant digits.
class CsvBuilder {
public:
    explicit CsvBuilder(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (auto h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
    }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((append(values, first), first = false), ...);
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    template <class T>
    void append(const T& value, bool first) {
        if (!first) text_ += ',';
        if constexpr (std::is_floating_point_v<T>) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(value));
            text_ += buf;
        } else if constexpr (std::is_integral_v<T>) {
            text_ += std::to_string(value);
        } else {
            text_ += std::string_view(value);
        }
    }

    std::string text_;
};

} // namespace dqlg::cli
