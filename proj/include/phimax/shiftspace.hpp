#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace phimax {

// Cap on the number of words materialized by the enumerators.
inline constexpr std::uint64_t kDefaultWordCap = 1'000'000;

// === Alphabet and words ===

// Letters are 1..size.
struct Alphabet {
    int size = 0;

    explicit Alphabet(int n);
    bool contains(int letter) const { return letter >= 1 && letter <= size; }
    bool operator==(const Alphabet&) const = default;
};

// A word of finite length, possibly empty.
class FiniteWord {
public:
    FiniteWord(Alphabet a, std::vector<int> letters);
    static FiniteWord empty(Alphabet a) { return FiniteWord(a, {}); }

    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<int>& letters() const { return letters_; }
    std::size_t length() const { return letters_.size(); }
    int at(std::size_t k) const; // 1-based
    bool operator==(const FiniteWord&) const = default;

private:
    Alphabet alphabet_{1};
    std::vector<int> letters_;
};

// An eventually periodic infinite word, stored as prefix + repeating cycle
// and normalized (primitive cycle, shortest prefix), so equal words have
// equal representations.
class PeriodicWord {
public:
    PeriodicWord(FiniteWord prefix, FiniteWord cycle);

    const FiniteWord& prefix() const { return prefix_; }
    const FiniteWord& cycle() const { return cycle_; }
    const Alphabet& alphabet() const { return prefix_.alphabet(); }
    int letter_at(std::uint64_t k) const; // 1-based
    bool operator==(const PeriodicWord&) const = default;

private:
    FiniteWord prefix_;
    FiniteWord cycle_;
};

// === Metric and operators ===

// 0 for equal words, else 2^-m with m the first position where they differ.
double word_metric(const PeriodicWord& w, const PeriodicWord& t);

// Drops the first letter.
PeriodicWord shift(const PeriodicWord& w);

// Prepends a letter.
PeriodicWord branch(int letter, const PeriodicWord& w);

// Prepends a finite word.
PeriodicWord concat(const FiniteWord& s, const PeriodicWord& w);

// === Enumeration ===

// All words of length exactly n, lexicographic order.
std::vector<FiniteWord> enumerate_level(Alphabet a, int n,
                                        std::uint64_t cap = kDefaultWordCap);

// All words of length < p, by length then lexicographic.
std::vector<FiniteWord> enumerate_below(Alphabet a, int p,
                                        std::uint64_t cap = kDefaultWordCap);

// === Text form ===

// "12(3)" for prefix 12 with cycle 3; letters above 9 are dot-separated,
// e.g. "10.2(7)".  A finite word is just its letters; the empty word is "".
std::string format_word(const FiniteWord& w);
std::string format_word(const PeriodicWord& w);
FiniteWord parse_finite_word(const std::string& text, Alphabet a);
PeriodicWord parse_periodic_word(const std::string& text, Alphabet a);

} // namespace phimax
