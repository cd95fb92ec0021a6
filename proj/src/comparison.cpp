#include "phimax/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace phimax {

// === Construction ===

ComparisonFunction ComparisonFunction::linear(double c) {
    if (!(c >= 0.0 && c < 1.0))
        throw std::invalid_argument("linear comparison needs 0 <= c < 1");
    return ComparisonFunction(Form::Linear, c);
}

ComparisonFunction ComparisonFunction::rational() {
    return ComparisonFunction(Form::Rational, 1.0);
}

ComparisonFunction ComparisonFunction::scaled_rational(double a) {
    if (!(a > 0.0))
        throw std::invalid_argument("scaled rational comparison needs a > 0");
    return ComparisonFunction(Form::ScaledRational, a);
}

ComparisonFunction ComparisonFunction::pseudo_identity() {
    return ComparisonFunction(Form::PseudoIdentity, 0.0);
}

// === Evaluation ===

double ComparisonFunction::operator()(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("comparison argument must be >= 0");
    switch (form_) {
        case Form::Linear: return param_ * t;
        case Form::Rational: return t / (1.0 + t);
        case Form::ScaledRational: return t / (1.0 + param_ * t);
        case Form::PseudoIdentity: return t;
    }
    return t;
}

double ComparisonFunction::iterate(double t, int n) const {
    if (n < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (!(t >= 0.0)) throw std::invalid_argument("comparison argument must be >= 0");
    double x = t;
    for (int k = 0; k < n; ++k) x = (*this)(x);
    return x;
}

std::string ComparisonFunction::describe() const {
    char buf[64];
    switch (form_) {
        case Form::Linear:
            std::snprintf(buf, sizeof(buf), "linear c=%.17g", param_);
            return buf;
        case Form::Rational: return "rational t/(1+t)";
        case Form::ScaledRational:
            std::snprintf(buf, sizeof(buf), "scaled rational t/(1+%.17g*t)", param_);
            return buf;
        case Form::PseudoIdentity: return "pseudo-identity";
    }
    return "";
}

// === Certification ===

CertifyReport certify(const ComparisonFunction& phi, std::vector<double> grid,
                      int n_max, double epsilon_decay) {
    if (grid.empty()) throw std::invalid_argument("certification grid must be nonempty");
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (!(epsilon_decay > 0.0)) throw std::invalid_argument("epsilon_decay must be > 0");
    std::sort(grid.begin(), grid.end());

    CertifyReport report;
    report.grid = grid;
    report.n_max = n_max;
    report.epsilon_decay = epsilon_decay;

    for (double t : grid) {
        DecayResult r;
        r.t = t;
        double x = t;
        bool stalled = false;
        int n = 0;
        while (n < n_max && x > epsilon_decay) {
            double next = phi(x);
            ++n;
            if (next >= x && x > 0.0) { // no progress: the decay axiom fails here
                stalled = true;
                x = next;
                break;
            }
            x = next;
        }
        r.final_value = x;
        if (stalled) {
            r.status = DecayResult::Status::Stalled;
            r.steps = n_max;
        } else if (x <= epsilon_decay) {
            r.status = DecayResult::Status::Reached;
            r.steps = n;
            report.max_decay_steps = std::max(report.max_decay_steps, n);
        } else {
            r.status = DecayResult::Status::Decreasing;
            r.steps = n_max;
        }
        report.decay.push_back(r);
    }

    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (phi(grid[i]) > phi(grid[i + 1]))
            report.monotonicity_violations.emplace_back(grid[i], grid[i + 1]);

    for (double t : grid)
        if (t > 0.0 && phi(t) >= t) report.strictness_violations.push_back(t);

    bool any_stall = false;
    for (const DecayResult& r : report.decay)
        any_stall = any_stall || r.status == DecayResult::Status::Stalled;
    report.passed = !any_stall && report.monotonicity_violations.empty() &&
                    report.strictness_violations.empty();
    return report;
}

} // namespace phimax
