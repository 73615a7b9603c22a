#include "dssim/units.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace dssim {

std::string format_us(Nanos ns) {
    std::string out;
    if (ns < 0) {
        out.push_back('-');
        ns = -ns;
    }
    out += std::to_string(ns / kNsPerUs);
    Nanos frac = ns % kNsPerUs;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, 3 - digits.size(), '0');
        while (digits.back() == '0') digits.pop_back();
        out.push_back('.');
        out += digits;
    }
    return out;
}

Nanos parse_us(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty time value");
    std::size_t pos = 0;
    bool negative = false;
    if (text[0] == '-') {
        negative = true;
        pos = 1;
    }
    auto dot = text.find('.', pos);
    std::string whole = text.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (whole.empty() || frac.size() > 3 || (dot != std::string::npos && frac.empty())) {
        throw std::invalid_argument("malformed time value: " + text);
    }
    auto digits_only = [](const std::string& s) {
        for (char c : s) {
            if (c < '0' || c > '9') return false;
        }
        return true;
    };
    if (!digits_only(whole) || !digits_only(frac)) {
        throw std::invalid_argument("malformed time value: " + text);
    }
    frac.append(3 - frac.size(), '0');
    Nanos ns = std::stoll(whole) * kNsPerUs + std::stoll(frac);
    return negative ? -ns : ns;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, end);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw std::invalid_argument("malformed number: " + text);
    }
    return value;
}

}  // namespace dssim
