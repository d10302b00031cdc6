#include "relup/weight_laws.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "relup/errors.hpp"

namespace relup {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

// Chambers-Mallows-Stuck for the symmetric case: with U uniform on
// (-pi/2, pi/2) and W standard exponential,
// X = sin(aU) / cos(U)^(1/a) * (cos(U - aU) / W)^((1 - a) / a)
// has characteristic function exp(-|s|^a).
double standard_symmetric_stable(double alpha, Rng& rng) {
    constexpr double half_pi = 0.5 * std::numbers::pi;
    double u = 0.0;
    do {
        u = std::numbers::pi * uniform01(rng) - half_pi;
    } while (u == -half_pi);
    double w = 0.0;
    do {
        w = -std::log(1.0 - uniform01(rng));
    } while (w == 0.0);
    const double au = alpha * u;
    return std::sin(au) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - au) / w, (1.0 - alpha) / alpha);
}

}  // namespace

WeightLaw WeightLaw::gaussian(double std) {
    if (!positive_finite(std)) throw InvalidArgument("gaussian std must be positive");
    return WeightLaw(GaussianLaw{std});
}

WeightLaw WeightLaw::symmetric_stable(double alpha, double scale) {
    if (!(alpha > 1.0 && alpha <= 2.0)) {
        throw InvalidArgument("stable index must lie in (1, 2] for a finite first absolute moment");
    }
    if (!positive_finite(scale)) throw InvalidArgument("stable scale must be positive");
    return WeightLaw(SymmetricStableLaw{alpha, scale});
}

WeightLaw WeightLaw::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("uniform law needs lo < hi");
    return WeightLaw(UniformLaw{lo, hi});
}

WeightLaw WeightLaw::two_point(double value) {
    if (value == 0.0 || !std::isfinite(value)) throw InvalidArgument("two-point law needs a nonzero atom");
    return WeightLaw(TwoPointLaw{value});
}

std::string WeightLaw::name() const {
    return std::visit(Overloaded{[](const GaussianLaw&) { return std::string("gaussian"); },
                                 [](const SymmetricStableLaw&) { return std::string("symmetric_stable"); },
                                 [](const UniformLaw&) { return std::string("uniform"); },
                                 [](const TwoPointLaw&) { return std::string("two_point"); }},
                      law_);
}

WeightLaw WeightLaw::scaled(double factor) const {
    if (!positive_finite(factor)) throw InvalidArgument("scale factor must be positive");
    return std::visit(
        Overloaded{[&](const GaussianLaw& g) { return gaussian(g.std * factor); },
                   [&](const SymmetricStableLaw& s) { return symmetric_stable(s.alpha, s.scale * factor); },
                   [&](const UniformLaw& u) { return uniform(u.lo * factor, u.hi * factor); },
                   [&](const TwoPointLaw& t) { return two_point(t.value * factor); }},
        law_);
}

bool WeightLaw::operator==(const WeightLaw& other) const {
    if (law_.index() != other.law_.index()) return false;
    return std::visit(
        Overloaded{[&](const GaussianLaw& g) { return g.std == std::get<GaussianLaw>(other.law_).std; },
                   [&](const SymmetricStableLaw& s) {
                       const auto& o = std::get<SymmetricStableLaw>(other.law_);
                       return s.alpha == o.alpha && s.scale == o.scale;
                   },
                   [&](const UniformLaw& u) {
                       const auto& o = std::get<UniformLaw>(other.law_);
                       return u.lo == o.lo && u.hi == o.hi;
                   },
                   [&](const TwoPointLaw& t) { return t.value == std::get<TwoPointLaw>(other.law_).value; }},
        law_);
}

double sample(const WeightLaw& law, Rng& rng) {
    return std::visit(Overloaded{[&](const GaussianLaw& g) {
                                     std::normal_distribution<double> normal(0.0, g.std);
                                     return normal(rng);
                                 },
                                 [&](const SymmetricStableLaw& s) {
                                     return s.scale * standard_symmetric_stable(s.alpha, rng);
                                 },
                                 [&](const UniformLaw& u) { return u.lo + (u.hi - u.lo) * uniform01(rng); },
                                 [&](const TwoPointLaw& t) { return (rng() >> 63) ? t.value : -t.value; }},
                      law.variant());
}

void sample_into(const WeightLaw& law, Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
    // One visit per batch; the normal generator keeps its spare draw.
    std::visit(Overloaded{[&](const GaussianLaw& g) {
                              std::normal_distribution<double> normal(0.0, g.std);
                              for (auto& x : out) x = normal(rng);
                          },
                          [&](const SymmetricStableLaw& st) {
                              for (auto& x : out) x = st.scale * standard_symmetric_stable(st.alpha, rng);
                          },
                          [&](const UniformLaw& u) {
                              for (auto& x : out) x = u.lo + (u.hi - u.lo) * uniform01(rng);
                          },
                          [&](const TwoPointLaw& t) {
                              for (auto& x : out) x = (rng() >> 63) ? t.value : -t.value;
                          }},
               law.variant());
}

std::complex<double> char_fn(const WeightLaw& law, double s) {
    using C = std::complex<double>;
    return std::visit(Overloaded{[&](const GaussianLaw& g) { return C(std::exp(-0.5 * g.std * g.std * s * s)); },
                                 [&](const SymmetricStableLaw& st) {
                                     return C(std::exp(-std::pow(std::abs(st.scale * s), st.alpha)));
                                 },
                                 [&](const UniformLaw& u) {
                                     const double a = u.lo * s;
                                     const double b = u.hi * s;
                                     const double w = b - a;
                                     if (std::abs(w) < 1e-8) {
                                         // Taylor expansion of (e^{ib} - e^{ia}) / (i(b - a)).
                                         const double m = 0.5 * (a + b);
                                         return std::polar(1.0 - w * w / 24.0, m);
                                     }
                                     return C(std::sin(b) - std::sin(a), std::cos(a) - std::cos(b)) / w;
                                 },
                                 [&](const TwoPointLaw& t) { return C(std::cos(t.value * s)); }},
                      law.variant());
}

std::complex<double> levy_exponent(const WeightLaw& law, double lambda, double s) {
    return lambda * (char_fn(law, s) - 1.0);
}

Moments moments(const WeightLaw& law) {
    return std::visit(
        Overloaded{[](const GaussianLaw& g) {
                       const double v = g.std * g.std;
                       return Moments{0.0, g.std * std::sqrt(2.0 / std::numbers::pi), v, 3.0 * v * v};
                   },
                   [](const SymmetricStableLaw& s) {
                       // E|X| = (2/pi) Gamma(1 - 1/alpha) for the unit-scale law.
                       const double abs_mean = s.scale * 2.0 / std::numbers::pi * std::tgamma(1.0 - 1.0 / s.alpha);
                       if (s.alpha < 2.0) return Moments{0.0, abs_mean, kInfinity, kInfinity};
                       const double v = 2.0 * s.scale * s.scale;
                       return Moments{0.0, abs_mean, v, 3.0 * v * v};
                   },
                   [](const UniformLaw& u) {
                       const double width = u.hi - u.lo;
                       const double mean = 0.5 * (u.lo + u.hi);
                       double abs_mean = std::abs(mean);
                       if (u.lo < 0.0 && u.hi > 0.0) abs_mean = (u.lo * u.lo + u.hi * u.hi) / (2.0 * width);
                       const double second = (u.lo * u.lo + u.lo * u.hi + u.hi * u.hi) / 3.0;
                       const double fourth = (std::pow(u.hi, 5) - std::pow(u.lo, 5)) / (5.0 * width);
                       return Moments{mean, abs_mean, second, fourth};
                   },
                   [](const TwoPointLaw& t) {
                       const double v = t.value * t.value;
                       return Moments{0.0, std::abs(t.value), v, v * v};
                   }},
        law.variant());
}

double raw_moment(const WeightLaw& law, int n) {
    if (n < 1 || n > 4) throw InvalidArgument("raw_moment supports orders 1..4");
    const Moments m = moments(law);
    if (n == 1) return m.mean;
    if (n == 2 || n == 4) {
        const double value = n == 2 ? m.second : m.fourth;
        if (!std::isfinite(value)) throw InfiniteMoment("weight law has an infinite moment of order " + std::to_string(n));
        return value;
    }
    return std::visit(Overloaded{[](const GaussianLaw&) { return 0.0; },
                                 [](const SymmetricStableLaw& s) -> double {
                                     if (s.alpha < 2.0) throw InfiniteMoment("stable law has no third moment");
                                     return 0.0;
                                 },
                                 [](const UniformLaw& u) {
                                     return (std::pow(u.hi, 4) - std::pow(u.lo, 4)) / (4.0 * (u.hi - u.lo));
                                 },
                                 [](const TwoPointLaw&) { return 0.0; }},
                      law.variant());
}

bool has_finite_variance(const WeightLaw& law) { return std::isfinite(moments(law).second); }

}  // namespace relup
