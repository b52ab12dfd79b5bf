#pragma once

// Exact rational scalars for all renormalization algebra, plus the shared
// error types and text helpers. Backed by Boost.Multiprecision (header-only);
// values are always stored in lowest terms with a positive denominator, and
// division by zero throws instead of producing a NaN-like value.

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gasket {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// User-facing input rejection (bad flags, malformed config, invalid weights).
// The CLI maps this to exit code 1.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Violation of a structural identity the construction guarantees (e.g. the
// level-1 trace form failing to be proportional to the corner form). Should
// never fire; the CLI maps it to exit code 2.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

// Thrown when an admissible-word enumeration would exceed the configured
// node ceiling.
struct EnumerationLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double to_double(const Rational& x) {
    return x.convert_to<double>();
}

// Canonical text: "num" when the denominator is 1, otherwise "num/den".
inline std::string to_string(const Rational& x) {
    return x.str();
}

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Accepts optional whitespace around "int" or "int/int" with optional leading
// minus signs. Anything else (including a zero denominator) is rejected.
inline Rational parse_rational(const std::string& text) {
    const auto bad = [&]() -> Rational {
        throw ValidationError("malformed rational literal: \"" + text + "\"");
    };
    std::size_t begin = text.find_first_not_of(" \t");
    if (begin == std::string::npos) return bad();
    std::size_t end = text.find_last_not_of(" \t");
    std::string body = text.substr(begin, end - begin + 1);

    const auto check_int = [&](const std::string& part) {
        std::size_t i = part.size() && part[0] == '-' ? 1 : 0;
        if (i == part.size()) bad();
        for (; i < part.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(part[i]))) bad();
        }
    };

    std::size_t slash = body.find('/');
    if (slash == std::string::npos) {
        check_int(body);
        return Rational(BigInt(body));
    }
    std::string num = body.substr(0, slash);
    std::string den = body.substr(slash + 1);
    check_int(num);
    check_int(den);
    BigInt n(num);
    BigInt d(den);
    if (d == 0) throw ValidationError("rational with zero denominator: \"" + text + "\"");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    return Rational(n, d);
}

}  // namespace gasket
