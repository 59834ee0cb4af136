#include "efpe/rational.hpp"

#include <algorithm>
#include <cctype>

namespace efpe {

namespace {

bool is_integer_text(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

mpz_class parse_integer(std::string_view s) {
    std::string t(s);
    if (!t.empty() && t[0] == '+') t.erase(0, 1);
    return mpz_class(t, 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
    const auto slash = text.find('/');
    const auto num_text = text.substr(0, slash);
    if (!is_integer_text(num_text))
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    Rational q;
    if (slash == std::string_view::npos) {
        q = Rational(parse_integer(num_text));
    } else {
        const auto den_text = text.substr(slash + 1);
        if (!is_integer_text(den_text) || den_text[0] == '-' || den_text[0] == '+')
            throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
        mpz_class den = parse_integer(den_text);
        if (den == 0)
            throw std::invalid_argument("zero denominator in rational '" + std::string(text) + "'");
        q = Rational(parse_integer(num_text), den);
        q.canonicalize();
    }
    return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

std::vector<std::string> to_strings(std::span<const Rational> v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& q : v) out.push_back(to_string(q));
    return out;
}

Rational sum(std::span<const Rational> v) {
    Rational s = 0;
    for (const auto& q : v) s += q;
    return s;
}

Rational l1_distance(std::span<const Rational> a, std::span<const Rational> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: size mismatch");
    Rational d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += abs(a[i] - b[i]);
    return d;
}

}  // namespace efpe
