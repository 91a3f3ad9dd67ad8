#ifndef PRIVAUTH_RISK_HPP
#define PRIVAUTH_RISK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "privauth/errors.hpp"
#include "privauth/privacy.hpp"

namespace privauth {

enum class AuthRequirement : std::uint32_t {
    Standard = 0,
    StepUp = 1,
    Advanced = 2,
};

inline const char* to_string(AuthRequirement level) {
    switch (level) {
        case AuthRequirement::Standard: return "Standard";
        case AuthRequirement::StepUp: return "StepUp";
        case AuthRequirement::Advanced: return "Advanced";
    }
    throw ParameterError("auth requirement: unknown level");
}

struct RiskPolicy {
    std::vector<double> weights;
    double low_threshold = 0.33;
    double high_threshold = 0.66;

    static RiskPolicy uniform(std::size_t n_f, double low = 0.33,
                              double high = 0.66) {
        RiskPolicy policy;
        policy.weights.assign(n_f, 1.0 / static_cast<double>(n_f));
        policy.low_threshold = low;
        policy.high_threshold = high;
        policy.validate();
        return policy;
    }

    void validate() const {
        if (weights.empty()) {
            throw ParameterError("risk policy: weights must be nonempty");
        }
        double sum = 0.0;
        for (const double w : weights) {
            if (!(w > 0) || !std::isfinite(w)) {
                throw ParameterError("risk policy: weights must be positive");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ParameterError("risk policy: weights must sum to 1");
        }
        if (!(0.0 < low_threshold && low_threshold < high_threshold &&
              high_threshold < 1.0)) {
            throw ParameterError("risk policy: thresholds must satisfy 0 < low < high < 1");
        }
    }
};

// R = sum_i w_i * min(1, |live_i - profile_i| / (hi_i - lo_i)), clamped.
inline double score(const FeatureVector& profile, const FeatureVector& live,
                    const RiskPolicy& policy) {
    policy.validate();
    if (profile.size() != live.size() ||
        profile.size() != policy.weights.size()) {
        throw ParameterError("risk: feature/policy length mismatch");
    }
    if (profile.bounds.size() != live.bounds.size()) {
        throw ParameterError("risk: bounds length mismatch");
    }
    double r = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double range = profile.bounds[i].hi - profile.bounds[i].lo;
        if (!(range > 0)) {
            throw ParameterError("risk: feature range must be positive");
        }
        const double deviation =
            std::abs(live.values[i] - profile.values[i]) / range;
        r += policy.weights[i] * std::min(1.0, deviation);
    }
    return std::clamp(r, 0.0, 1.0);
}

// Half-open bands; ties escalate to the higher requirement.
inline AuthRequirement decide(double r, const RiskPolicy& policy) {
    policy.validate();
    if (r < policy.low_threshold) return AuthRequirement::Standard;
    if (r < policy.high_threshold) return AuthRequirement::StepUp;
    return AuthRequirement::Advanced;
}

// Delta-f for the Laplace mechanism: the largest score swing one feature can
// cause, expressed on the raw feature scale the noise is added to.
inline double derive_sensitivity(const RiskPolicy& policy,
                                 const std::vector<FeatureBounds>& bounds) {
    policy.validate();
    if (bounds.size() != policy.weights.size()) {
        throw ParameterError("risk: bounds/policy length mismatch");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        const double range = bounds[i].hi - bounds[i].lo;
        if (!(range > 0)) {
            throw ParameterError("risk: feature range must be positive");
        }
        best = std::max(best, policy.weights[i] * range);
    }
    return best;
}

// Pluggable scoring hook. Only the weighted-deviation form ships; the
// interface exists so a learned model can slot in without protocol changes.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double evaluate(const FeatureVector& profile,
                            const FeatureVector& live) const = 0;
};

class WeightedDeviationScorer final : public Scorer {
public:
    explicit WeightedDeviationScorer(RiskPolicy policy)
        : policy_(std::move(policy)) {
        policy_.validate();
    }

    double evaluate(const FeatureVector& profile,
                    const FeatureVector& live) const override {
        return score(profile, live, policy_);
    }

    const RiskPolicy& policy() const { return policy_; }

private:
    RiskPolicy policy_;
};

} // namespace privauth

#endif // PRIVAUTH_RISK_HPP
