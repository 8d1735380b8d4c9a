#pragma once

// The nonlinearity W(s) = m^2 s^2 / 2 + N(s) with N a finite signed power
// series N(s) = sum_k c_k |s|^{p_k}, extended evenly to s < 0, plus checkers
// for the structural hypotheses:
//   W1: W(s) >= 0 for all s,
//   W2: W(0) = W'(0) = 0, W''(0) = m^2 > 0,
//   W3: every exponent lies in (2, 6),
//   W4: N(s) <= -D |s|^tau on [0, eps0] for the model's (D, tau, eps0).
// W2/W3 are structural (checked from the exponents); W1/W4 are verified by
// sampling because a signed power series has no simple global criterion.

#include <cmath>
#include <string>
#include <vector>

#include "qvortex/grid.hpp"

namespace qvortex {

struct PotentialTerm {
    double coeff = 0.0;
    double exponent = 0.0; // must lie in (2, 6)
    bool operator==(const PotentialTerm&) const = default;
};

namespace detail {
/// |s|^p with a fast path for small integer exponents (hot in W'(u) loops).
inline double pow_abs(double s, double p) {
    const double a = std::abs(s);
    const int ip = static_cast<int>(p);
    if (static_cast<double>(ip) == p && ip >= 0 && ip <= 8) {
        double r = 1.0;
        for (int k = 0; k < ip; ++k) r *= a;
        return r;
    }
    return std::pow(a, p);
}
} // namespace detail

class PotentialModel {
public:
    PotentialModel() = default;
    PotentialModel(double mass, std::vector<PotentialTerm> terms,
                   double D = 0.0, double tau = 3.0, double eps0 = 1.0)
        : m_(mass), terms_(std::move(terms)), D_(D), tau_(tau), eps0_(eps0) {
        if (!(m_ > 0.0)) throw ConfigError("potential: mass m must be positive");
        for (const auto& t : terms_) {
            if (!(t.exponent > 2.0))
                throw ConfigError("potential: exponent " + std::to_string(t.exponent) +
                                  " violates W3 (requires 2 < p)");
            if (!(t.exponent < 6.0))
                throw ConfigError("potential: exponent " + std::to_string(t.exponent) +
                                  " violates W3 bound p < 6");
        }
        if (!(tau_ > 2.0)) throw ConfigError("potential: W4 exponent tau must exceed 2");
        if (!(D_ >= 0.0)) throw ConfigError("potential: W4 constant D must be nonnegative");
        if (!(eps0_ > 0.0)) throw ConfigError("potential: W4 range eps0 must be positive");
    }

    double m() const { return m_; }
    double msq() const { return m_ * m_; }
    const std::vector<PotentialTerm>& terms() const { return terms_; }
    double D() const { return D_; }
    double tau() const { return tau_; }
    double eps0() const { return eps0_; }

    double N(double s) const {
        double n = 0.0;
        for (const auto& t : terms_) n += t.coeff * detail::pow_abs(s, t.exponent);
        return n;
    }
    double Nprime(double s) const {
        double n = 0.0;
        for (const auto& t : terms_)
            n += t.coeff * t.exponent * detail::pow_abs(s, t.exponent - 1.0);
        return s < 0.0 ? -n : n;
    }
    double W(double s) const { return 0.5 * m_ * m_ * s * s + N(s); }
    double Wprime(double s) const { return m_ * m_ * s + Nprime(s); }

    /// sum_k c_k (p_k - alpha) |s|^{p_k}: the pointwise value of N'(s)s - alpha*N(s).
    double Nscale(double s, double alpha) const {
        double n = 0.0;
        for (const auto& t : terms_)
            n += t.coeff * (t.exponent - alpha) * detail::pow_abs(s, t.exponent);
        return n;
    }

    bool all_coeffs_nonneg() const {
        for (const auto& t : terms_)
            if (t.coeff < 0.0) return false;
        return true;
    }

    bool operator==(const PotentialModel&) const = default;

private:
    double m_ = 1.0;
    std::vector<PotentialTerm> terms_;
    double D_ = 0.0;
    double tau_ = 3.0;
    double eps0_ = 1.0;
};

struct HypothesisReport {
    bool w1_ok = false;
    bool w2_ok = false;
    bool w3_ok = false;
    bool w4_ok = false;
    double w1_witness = 0.0; // an s with W(s) < 0 when w1_ok is false
    double w4_witness = 0.0; // an s in (0, eps0] with N(s) + D s^tau > 0 when w4_ok is false
    bool ok() const { return w1_ok && w2_ok && w3_ok && w4_ok; }
};

/// Sample-based verification of W1 (log-spaced on (0, s_max]) and W4 (on
/// (0, eps0]); W2/W3 follow from the exponent ranges enforced at construction.
inline HypothesisReport verify_hypotheses(const PotentialModel& model, double s_max, int samples) {
    if (!(s_max > model.eps0()))
        throw ConfigError("verify_hypotheses: s_max must exceed eps0");
    if (samples < 1000)
        throw ConfigError("verify_hypotheses: need at least 1000 samples");

    HypothesisReport rep;
    rep.w2_ok = true; // W(0)=W'(0)=0 and W''(0)=m^2 since every exponent > 2
    rep.w3_ok = true; // exponents in (2,6) enforced structurally

    rep.w1_ok = true;
    const double decades = 8.0;
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / (samples - 1);
        const double s = s_max * std::pow(10.0, -decades * (1.0 - t));
        if (model.W(s) < 0.0) {
            rep.w1_ok = false;
            rep.w1_witness = s;
            break;
        }
    }

    rep.w4_ok = true;
    for (int k = 1; k <= samples; ++k) {
        const double s = model.eps0() * static_cast<double>(k) / samples;
        if (model.N(s) + model.D() * std::pow(s, model.tau()) > 0.0) {
            rep.w4_ok = false;
            rep.w4_witness = s;
            break;
        }
    }
    return rep;
}

} // namespace qvortex
