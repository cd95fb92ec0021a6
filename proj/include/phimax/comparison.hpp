#pragma once

#include <string>
#include <utility>
#include <vector>

namespace phimax {

// === Comparison functions ===

// A nondecreasing gauge on [0, inf) whose iterates vanish pointwise; used as
// the contraction modulus of the map systems.  Closed catalog of forms, plus
// one deliberately broken instance for exercising certifier failure paths.
class ComparisonFunction {
public:
    enum class Form { Linear, Rational, ScaledRational, PseudoIdentity };

    static ComparisonFunction linear(double c);          // c*t, 0 <= c < 1
    static ComparisonFunction rational();                // t / (1 + t)
    static ComparisonFunction scaled_rational(double a); // t / (1 + a*t), a > 0
    static ComparisonFunction pseudo_identity();         // t; fails the decay axiom

    double operator()(double t) const; // t >= 0
    double iterate(double t, int n) const;

    Form form() const { return form_; }
    double param() const { return param_; }
    std::string describe() const;
    bool operator==(const ComparisonFunction&) const = default;

private:
    ComparisonFunction(Form f, double p) : form_(f), param_(p) {}
    Form form_;
    double param_;
};

// === Certification ===

// How the iterates phi^n(t) behaved for one starting value.
struct DecayResult {
    enum class Status {
        Reached,    // dropped to epsilon_decay within n_max steps
        Decreasing, // still above epsilon_decay but strictly decreasing
        Stalled     // two consecutive iterates failed to decrease
    };
    double t = 0.0;
    Status status = Status::Reached;
    int steps = 0;          // steps taken when Reached, else n_max
    double final_value = 0.0;
};

struct CertifyReport {
    std::vector<double> grid;
    int n_max = 0;
    double epsilon_decay = 0.0;
    std::vector<DecayResult> decay;
    std::vector<std::pair<double, double>> monotonicity_violations; // (s, t) with s<t, phi(s)>phi(t)
    std::vector<double> strictness_violations;                      // t>0 with phi(t)>=t
    int max_decay_steps = -1; // largest Reached step count
    bool passed = false;      // no stalls and no violations
};

// Samples the axioms on a grid: iterate decay toward zero, monotonicity over
// adjacent grid pairs, and strictness phi(t) < t.
CertifyReport certify(const ComparisonFunction& phi, std::vector<double> grid,
                      int n_max = 10'000, double epsilon_decay = 1e-9);

} // namespace phimax
