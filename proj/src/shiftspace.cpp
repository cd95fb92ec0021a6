#include "phimax/shiftspace.hpp"

#include "phimax/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace phimax {

// === Alphabet and words ===

Alphabet::Alphabet(int n) : size(n) {
    if (n < 1) throw std::invalid_argument("alphabet needs at least one letter");
}

FiniteWord::FiniteWord(Alphabet a, std::vector<int> letters)
    : alphabet_(a), letters_(std::move(letters)) {
    for (int l : letters_)
        if (!alphabet_.contains(l))
            throw std::invalid_argument("letter " + std::to_string(l) +
                                        " outside alphabet of size " + std::to_string(a.size));
}

int FiniteWord::at(std::size_t k) const {
    if (k < 1 || k > letters_.size()) throw std::out_of_range("word position");
    return letters_[k - 1];
}

PeriodicWord::PeriodicWord(FiniteWord prefix, FiniteWord cycle)
    : prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
    if (prefix_.alphabet() != cycle_.alphabet())
        throw std::invalid_argument("prefix and cycle use different alphabets");
    if (cycle_.length() == 0) throw std::invalid_argument("cycle must be nonempty");

    // Primitive cycle: shortest period dividing the length.
    std::vector<int> c = cycle_.letters();
    for (std::size_t p = 1; p <= c.size() / 2; ++p) {
        if (c.size() % p != 0) continue;
        bool periodic = true;
        for (std::size_t k = p; k < c.size() && periodic; ++k)
            periodic = c[k] == c[k - p];
        if (periodic) {
            c.resize(p);
            break;
        }
    }

    // Shortest prefix: absorb a prefix tail equal to the cycle tail by
    // rotating the cycle right, e.g. 12(2) -> 1(2) and 1(21) -> (12).
    std::vector<int> pre = prefix_.letters();
    while (!pre.empty() && pre.back() == c.back()) {
        pre.pop_back();
        std::rotate(c.rbegin(), c.rbegin() + 1, c.rend());
    }

    Alphabet a = prefix_.alphabet();
    prefix_ = FiniteWord(a, std::move(pre));
    cycle_ = FiniteWord(a, std::move(c));
}

int PeriodicWord::letter_at(std::uint64_t k) const {
    if (k < 1) throw std::out_of_range("word position");
    std::uint64_t np = prefix_.length();
    if (k <= np) return prefix_.letters()[k - 1];
    return cycle_.letters()[(k - np - 1) % cycle_.length()];
}

// === Metric and operators ===

double word_metric(const PeriodicWord& w, const PeriodicWord& t) {
    if (w.alphabet() != t.alphabet())
        throw std::invalid_argument("words use different alphabets");
    if (w == t) return 0.0;

    // Distinct words differ no later than the shared prefix length plus one
    // period of the combined cycle.
    std::uint64_t lcm = std::lcm<std::uint64_t>(w.cycle().length(), t.cycle().length());
    std::uint64_t horizon = std::max(w.prefix().length(), t.prefix().length()) + lcm;
    if (horizon > 50'000'000)
        throw cap_exceeded("word metric comparison horizon too large");
    for (std::uint64_t k = 1; k <= horizon; ++k)
        if (w.letter_at(k) != t.letter_at(k))
            return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(k, 1074)));
    return 0.0; // unreachable for normalized distinct words
}

PeriodicWord shift(const PeriodicWord& w) {
    Alphabet a = w.alphabet();
    if (w.prefix().length() > 0) {
        std::vector<int> pre(w.prefix().letters().begin() + 1, w.prefix().letters().end());
        return PeriodicWord(FiniteWord(a, std::move(pre)), w.cycle());
    }
    std::vector<int> c = w.cycle().letters();
    std::rotate(c.begin(), c.begin() + 1, c.end());
    return PeriodicWord(FiniteWord::empty(a), FiniteWord(a, std::move(c)));
}

PeriodicWord branch(int letter, const PeriodicWord& w) {
    Alphabet a = w.alphabet();
    if (!a.contains(letter))
        throw std::invalid_argument("branch letter outside alphabet");
    std::vector<int> pre{letter};
    pre.insert(pre.end(), w.prefix().letters().begin(), w.prefix().letters().end());
    return PeriodicWord(FiniteWord(a, std::move(pre)), w.cycle());
}

PeriodicWord concat(const FiniteWord& s, const PeriodicWord& w) {
    if (s.alphabet() != w.alphabet())
        throw std::invalid_argument("words use different alphabets");
    std::vector<int> pre = s.letters();
    pre.insert(pre.end(), w.prefix().letters().begin(), w.prefix().letters().end());
    return PeriodicWord(FiniteWord(s.alphabet(), std::move(pre)), w.cycle());
}

// === Enumeration ===

std::vector<FiniteWord> enumerate_level(Alphabet a, int n, std::uint64_t cap) {
    if (n < 0) throw std::invalid_argument("word length must be nonnegative");
    std::uint64_t count = 1;
    for (int k = 0; k < n; ++k) {
        if (count > cap / a.size)
            throw cap_exceeded("level enumeration exceeds cap of " + std::to_string(cap));
        count *= a.size;
    }
    if (count > cap)
        throw cap_exceeded("level enumeration exceeds cap of " + std::to_string(cap));

    std::vector<FiniteWord> out;
    out.reserve(count);
    std::vector<int> digits(n, 1);
    for (std::uint64_t i = 0; i < count; ++i) {
        out.emplace_back(a, digits);
        for (int k = n - 1; k >= 0; --k) {
            if (digits[k] < a.size) {
                ++digits[k];
                break;
            }
            digits[k] = 1;
        }
    }
    return out;
}

std::vector<FiniteWord> enumerate_below(Alphabet a, int p, std::uint64_t cap) {
    if (p < 1) throw std::invalid_argument("level bound must be at least 1");
    std::vector<FiniteWord> out;
    for (int n = 0; n < p; ++n) {
        std::vector<FiniteWord> level = enumerate_level(a, n, cap);
        if (out.size() + level.size() > cap)
            throw cap_exceeded("word enumeration exceeds cap of " + std::to_string(cap));
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

// === Text form ===

namespace {

std::string format_letters(const FiniteWord& w) {
    std::string out;
    bool dotted = w.alphabet().size > 9;
    for (std::size_t i = 0; i < w.length(); ++i) {
        if (dotted && i) out += '.';
        out += std::to_string(w.letters()[i]);
    }
    return out;
}

std::vector<int> parse_letters(const std::string& text, Alphabet a) {
    std::vector<int> letters;
    if (text.empty()) return letters;
    if (a.size <= 9) {
        for (char ch : text) {
            if (ch < '1' || ch > '9')
                throw std::invalid_argument(std::string("bad letter '") + ch + "' in word");
            int l = ch - '0';
            if (!a.contains(l))
                throw std::invalid_argument("letter " + std::to_string(l) +
                                            " outside alphabet of size " + std::to_string(a.size));
            letters.push_back(l);
        }
        return letters;
    }
    std::size_t at = 0;
    while (at <= text.size()) {
        std::size_t dot = text.find('.', at);
        if (dot == std::string::npos) dot = text.size();
        std::string tok = text.substr(at, dot - at);
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("bad letter token '" + tok + "' in word");
        int l = std::stoi(tok);
        if (!a.contains(l))
            throw std::invalid_argument("letter " + std::to_string(l) +
                                        " outside alphabet of size " + std::to_string(a.size));
        letters.push_back(l);
        if (dot == text.size()) break;
        at = dot + 1;
    }
    return letters;
}

} // namespace

std::string format_word(const FiniteWord& w) { return format_letters(w); }

std::string format_word(const PeriodicWord& w) {
    return format_letters(w.prefix()) + "(" + format_letters(w.cycle()) + ")";
}

FiniteWord parse_finite_word(const std::string& text, Alphabet a) {
    if (text.find('(') != std::string::npos || text.find(')') != std::string::npos)
        throw std::invalid_argument("finite word must not contain parentheses");
    return FiniteWord(a, parse_letters(text, a));
}

PeriodicWord parse_periodic_word(const std::string& text, Alphabet a) {
    std::size_t open = text.find('(');
    if (open == std::string::npos || text.back() != ')' ||
        text.find('(', open + 1) != std::string::npos ||
        text.find(')') != text.size() - 1)
        throw std::invalid_argument("periodic word must look like \"prefix(cycle)\"");
    std::string cycle = text.substr(open + 1, text.size() - open - 2);
    if (cycle.empty()) throw std::invalid_argument("cycle must be nonempty");
    return PeriodicWord(FiniteWord(a, parse_letters(text.substr(0, open), a)),
                        FiniteWord(a, parse_letters(cycle, a)));
}

} // namespace phimax
