#pragma once

#include <complex>
#include <limits>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "relup/rng.hpp"

namespace relup {

struct GaussianLaw {
    double std;
};

/// Symmetric alpha-stable with characteristic function exp(-|scale * s|^alpha).
/// At alpha = 2 this is N(0, 2 scale^2).
struct SymmetricStableLaw {
    double alpha;
    double scale;
};

struct UniformLaw {
    double lo;
    double hi;
};

/// +value or -value with probability 1/2 each.
struct TwoPointLaw {
    double value;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Moments {
    double mean;
    double abs_mean;
    double second;  ///< +infinity when not finite
    double fourth;  ///< +infinity when not finite
};

/// Admissible output-weight law. Construction validates admissibility: no
/// atom at zero and a finite first absolute moment.
class WeightLaw {
public:
    using Variant = std::variant<GaussianLaw, SymmetricStableLaw, UniformLaw, TwoPointLaw>;

    static WeightLaw gaussian(double std);
    static WeightLaw symmetric_stable(double alpha, double scale);
    static WeightLaw uniform(double lo, double hi);
    static WeightLaw two_point(double value);

    const Variant& variant() const noexcept { return law_; }

    /// Short name used in configs and reports.
    std::string name() const;

    /// Copy with the spread multiplied by `factor` (> 0): std, scale, the
    /// interval or the atom location.
    WeightLaw scaled(double factor) const;

    bool operator==(const WeightLaw& other) const;

private:
    explicit WeightLaw(Variant v) : law_(v) {}
    Variant law_;
};

double sample(const WeightLaw& law, Rng& rng);

/// Fills `out` with independent draws. Faster than repeated sample() calls
/// but not the same stream.
void sample_into(const WeightLaw& law, Rng& rng, Eigen::Ref<Eigen::VectorXd> out);

/// E[exp(i V s)].
std::complex<double> char_fn(const WeightLaw& law, double s);

/// lambda * (char_fn(s) - 1).
std::complex<double> levy_exponent(const WeightLaw& law, double lambda, double s);

Moments moments(const WeightLaw& law);

/// E[V^n] for n in 1..4; +infinity (or NaN for odd orders of heavy-tailed
/// laws) is never returned: throws InfiniteMoment instead.
double raw_moment(const WeightLaw& law, int n);

bool has_finite_variance(const WeightLaw& law);

}  // namespace relup
