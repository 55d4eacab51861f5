// SPDX-License-Identifier: Apache-2.0
//
// Model parameters, state, and region vocabulary for the defaultable
// liquidation problem. All types are immutable value objects.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dliq {

enum class ErrorCode {
    DriftDominance,        // delta <= mu
    ZeroVolatility,        // sigma == 0
    NonPositiveImpact,     // gamma <= 0
    NonPositiveCost,       // cost_sell <= 0
    NegativePenalty,       // default_penalty < 0
    NegativeIntensity,     // default_rate < 0
    CorrelationOutOfRange, // |rho| > 1
    NonFiniteParameter,
    NonPositivePrice,
    NegativeInventory,
    NegativeSale,
    NonPositiveDiscriminant,
    QuadratureFailure,
    OnBranchEdge,
    RootBracketFailure,
    ConfigError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// Market, default and cost constants. Units are per unit time except
/// gamma (1/shares), cost_sell (currency/share) and the dimensionless
/// default_penalty, barrier, rho.
struct ModelParams {
    double mu = 0.5;              // drift
    double sigma = 0.2;           // volatility
    double delta = 0.7;           // discount rate
    double gamma = 0.5;           // permanent impact coefficient
    double cost_sell = 0.3;       // per-share transaction cost C^s
    double default_rate = 0.7;    // intensity scale lambda
    double default_penalty = 0.5; // terminal cost slope K in g(x,y) = K*x*y
    double barrier = 0.0;         // credit-index threshold b
    double rho = 0.0;             // corr(price noise, credit-index noise)
};

/// A point of the controlled system: impacted price, remaining inventory,
/// credit index.
struct State {
    double x; // impacted price, > 0
    double y; // remaining inventory, >= 0
    double w; // credit-index value
};

enum class RegionLabel {
    WaitAbove,  // w >= b, x < F0
    Sell2Above, // w >= b, F0 <= x <= F0 e^{gamma y}
    Sell1Above, // w >= b, x > F0 e^{gamma y}
    WaitBelow,  // w < b, x < G_lambda(y)
    Sell2Below, // w < b, G_lambda(y) <= x <= e^{gamma y} G_lambda(y)
    Sell1Below, // w < b, x > e^{gamma y} G_lambda(y)
    Liquidated, // y == 0
};

inline const char* to_string(RegionLabel r) {
    switch (r) {
    case RegionLabel::WaitAbove: return "WaitAbove";
    case RegionLabel::Sell2Above: return "Sell2Above";
    case RegionLabel::Sell1Above: return "Sell1Above";
    case RegionLabel::WaitBelow: return "WaitBelow";
    case RegionLabel::Sell2Below: return "Sell2Below";
    case RegionLabel::Sell1Below: return "Sell1Below";
    case RegionLabel::Liquidated: return "Liquidated";
    }
    return "?";
}

/// Checks the standing assumptions and returns the parameters unchanged.
/// Throws Error with a distinct code per violated invariant.
inline ModelParams validate(const ModelParams& p) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(p.mu) || !finite(p.sigma) || !finite(p.delta) || !finite(p.gamma) ||
        !finite(p.cost_sell) || !finite(p.default_rate) || !finite(p.default_penalty) ||
        !finite(p.barrier) || !finite(p.rho))
        throw Error(ErrorCode::NonFiniteParameter, "model parameters must be finite");
    if (p.sigma == 0.0)
        throw Error(ErrorCode::ZeroVolatility, "sigma must be nonzero (got 0)");
    if (!(p.gamma > 0.0))
        throw Error(ErrorCode::NonPositiveImpact,
                    "gamma must be > 0 (got " + std::to_string(p.gamma) + ")");
    if (!(p.cost_sell > 0.0))
        throw Error(ErrorCode::NonPositiveCost,
                    "cost_sell must be > 0 (got " + std::to_string(p.cost_sell) + ")");
    if (p.default_penalty < 0.0)
        throw Error(ErrorCode::NegativePenalty,
                    "default_penalty must be >= 0 (got " + std::to_string(p.default_penalty) + ")");
    if (p.default_rate < 0.0)
        throw Error(ErrorCode::NegativeIntensity,
                    "default_rate must be >= 0 (got " + std::to_string(p.default_rate) + ")");
    if (p.rho < -1.0 || p.rho > 1.0)
        throw Error(ErrorCode::CorrelationOutOfRange,
                    "rho must lie in [-1,1] (got " + std::to_string(p.rho) + ")");
    if (!(p.delta > p.mu))
        throw Error(ErrorCode::DriftDominance, "delta must exceed mu (delta=" +
                                                   std::to_string(p.delta) +
                                                   ", mu=" + std::to_string(p.mu) + ")");
    // Follows from the above; asserted anyway.
    if (!(p.delta + p.default_rate - p.mu > 0.0))
        throw Error(ErrorCode::DriftDominance, "delta + default_rate - mu must be > 0");
    return p;
}

inline void check_state(const State& s) {
    if (!(s.x > 0.0) || !std::isfinite(s.x))
        throw Error(ErrorCode::NonPositivePrice, "price must be > 0 (got " + std::to_string(s.x) + ")");
    if (s.y < 0.0 || !std::isfinite(s.y))
        throw Error(ErrorCode::NegativeInventory,
                    "inventory must be >= 0 (got " + std::to_string(s.y) + ")");
}

} // namespace dliq
