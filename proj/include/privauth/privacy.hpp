#ifndef PRIVAUTH_PRIVACY_HPP
#define PRIVAUTH_PRIVACY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "privauth/errors.hpp"
#include "privauth/rng.hpp"

namespace privauth {

struct FeatureBounds {
    double lo;
    double hi;
};

// Ordered feature values with their per-feature clamp intervals.
struct FeatureVector {
    std::vector<double> values;
    std::vector<FeatureBounds> bounds;

    std::size_t size() const { return values.size(); }

    void validate() const {
        if (values.empty() || values.size() != bounds.size()) {
            throw ParameterError("feature vector: values/bounds length mismatch");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) {
                throw ParameterError("feature vector: values must be finite");
            }
            if (!(bounds[i].lo < bounds[i].hi)) {
                throw ParameterError("feature vector: bounds must satisfy lo < hi");
            }
        }
    }
};

struct PrivacyBudget {
    double epsilon;
    double sensitivity;

    double scale() const {
        if (!(epsilon > 0) || !std::isfinite(epsilon)) {
            throw ParameterError("privacy budget: epsilon must be positive");
        }
        if (!(sensitivity > 0) || !std::isfinite(sensitivity)) {
            throw ParameterError("privacy budget: sensitivity must be positive");
        }
        return sensitivity / epsilon;
    }
};

// One draw from Laplace(0, scale) by inverse CDF on a uniform variate.
inline double laplace_sample(double scale, Rng& rng) {
    if (!(scale > 0) || !std::isfinite(scale)) {
        throw ParameterError("laplace: scale must be positive");
    }
    double u;
    do {
        u = rng.uniform_double() - 0.5;
    } while (u == -0.5);
    const double sign = u < 0 ? -1.0 : 1.0;
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

// Clamp each value into its interval, then add independent Laplace noise at
// scale sensitivity/epsilon. The output is deliberately not re-clamped: the
// noised values are transmitted as drawn.
inline FeatureVector privatize(const FeatureVector& v,
                               const PrivacyBudget& budget, Rng& rng) {
    v.validate();
    const double scale = budget.scale();
    FeatureVector out = v;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double clamped =
            std::clamp(out.values[i], out.bounds[i].lo, out.bounds[i].hi);
        out.values[i] = clamped + laplace_sample(scale, rng);
    }
    return out;
}

} // namespace privauth

#endif // PRIVAUTH_PRIVACY_HPP
