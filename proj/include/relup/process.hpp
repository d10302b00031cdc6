#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "relup/geometry.hpp"
#include "relup/weight_laws.hpp"

namespace relup {

// ---------------------------------------------------------------------------
// Correction kernel
//
// k_x(u, t) = ReLU(u.x - t) + (u.x) h1(t) + h2(t) with
//   h1(t) = (sgn t - 1) / 2,  h2(t) = (t - |t|) / 2,  sgn 0 = 0.
// The kernel vanishes unless t lies between 0 and u.x, so s(0) = 0 and
// grad s(0) = 0 hold exactly, including for thresholds through the origin.
// ---------------------------------------------------------------------------

inline double sign_mid(double t) noexcept { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

/// Heaviside step with value 1/2 at the jump.
inline double heaviside_mid(double z) noexcept { return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : 0.5); }

inline double h1(double t) noexcept { return 0.5 * (sign_mid(t) - 1.0); }
inline double h2(double t) noexcept { return 0.5 * (t - std::abs(t)); }

/// Kernel as a function of the projection u.x. `h1_shift` is a perturbation
/// for negative-control runs and is zero everywhere else.
///
/// Evaluated piecewise in the sign of t, which is the same function but
/// vanishes exactly (not up to rounding) off the support.
inline double kernel_from_projection(double ux, double t, double h1_shift = 0.0) noexcept {
    const double k = t > 0.0 ? std::max(ux - t, 0.0) : (t < 0.0 ? std::max(t - ux, 0.0) : 0.5 * std::abs(ux));
    return h1_shift == 0.0 ? k : k + ux * h1_shift;
}

template <class Derived>
double kernel_k(const Eigen::MatrixBase<Derived>& x, const CylinderPoint& p) {
    return kernel_from_projection(p.u.coords().dot(x), p.t);
}

/// Mollified kernel k^eps_x(u, t): the affine correction is built from the
/// Gaussian (variance eps) smoothings of |t|/2 and sgn(t)/2. Throws
/// InvalidArgument for eps <= 0.
double kernel_eps_from_projection(double ux, double t, double eps);

template <class Derived>
double kernel_k_eps(const Eigen::MatrixBase<Derived>& x, const CylinderPoint& p, double eps) {
    return kernel_eps_from_projection(p.u.coords().dot(x), p.t, eps);
}

// ---------------------------------------------------------------------------
// Realizations
// ---------------------------------------------------------------------------

struct Neuron {
    double v;
    Direction u;
    double b;
};

struct SamplerOptions {
    /// Negative control: bias directions towards +/- e_1.
    bool anisotropic_directions = false;
};

/// One sampled network. Neurons are stored column-wise: direction k is
/// column k of `directions()`, with weight `weights()[k]` and offset
/// `offsets()[k]`. Immutable after construction.
class Realization {
public:
    /// Validates sizes, unit directions and |b_k| <= h(u_k).
    Realization(Domain domain, double lambda, WeightLaw law, std::uint64_t seed, Matrix directions, Vector weights,
                Vector offsets);

    int dim() const noexcept { return domain_.dim(); }
    Eigen::Index width() const noexcept { return weights_.size(); }

    const Domain& domain() const noexcept { return domain_; }
    double lambda() const noexcept { return lambda_; }
    const WeightLaw& law() const noexcept { return law_; }
    std::uint64_t seed() const noexcept { return seed_; }

    const Matrix& directions() const noexcept { return directions_; }
    const Vector& weights() const noexcept { return weights_; }
    const Vector& offsets() const noexcept { return offsets_; }

    Neuron neuron(Eigen::Index k) const;
    std::vector<Neuron> neurons() const;

    /// Copy with `n` appended as the last neuron.
    Realization with_neuron(const Neuron& n) const;

    /// Sum of |v_k|, the natural scale for rounding tolerances.
    double total_abs_weight() const { return weights_.cwiseAbs().sum(); }

    bool operator==(const Realization& other) const;

private:
    friend Realization sample_realization(double, const WeightLaw&, const Domain&, std::uint64_t,
                                          const SamplerOptions&);
    struct Trusted {};
    Realization(Trusted, Domain domain, double lambda, WeightLaw law, std::uint64_t seed, Matrix directions,
                Vector weights, Vector offsets);

    Domain domain_;
    double lambda_;
    WeightLaw law_;
    std::uint64_t seed_;
    Matrix directions_;
    Vector weights_;
    Vector offsets_;
};

/// Draws N ~ Poisson(lambda |Z_Omega|), then N thresholds uniform on Z_Omega,
/// then N weights from `law`. Deterministic in `seed`.
Realization sample_realization(double lambda, const WeightLaw& law, const Domain& domain, std::uint64_t seed,
                               const SamplerOptions& options = {});

struct KernelPerturbation {
    double h1_shift = 0.0;
};

/// s(x) = sum_k v_k k_x(u_k, b_k), summed in neuron order with compensation.
double evaluate(const Realization& r, const Vector& x, const KernelPerturbation& perturbation = {});

/// s at every column of `points` (d x m).
Vector evaluate_many(const Realization& r, const Matrix& points, const KernelPerturbation& perturbation = {});

struct FlaggedValue {
    double value;
    bool outside_domain;
};

/// evaluate() together with a flag telling whether x lies outside the domain,
/// where the restricted realization no longer matches the process.
FlaggedValue evaluate_flagged(const Realization& r, const Vector& x);

/// grad s(x) = sum_k v_k u_k [H(u_k.x - b_k) + h1(b_k)], H(0) = 1/2.
Vector gradient(const Realization& r, const Vector& x, const KernelPerturbation& perturbation = {});

/// gradient() at every column of `points`, as a d x m matrix.
Matrix gradient_many(const Realization& r, const Matrix& points, const KernelPerturbation& perturbation = {});

struct SkipAffine {
    Vector w0;
    double b0;
};

struct RestrictedNetwork {
    SkipAffine skip;
    std::vector<Neuron> neurons;
};

/// Splits the corrections out of the kernel sum:
/// s(x) = w0.x + b0 + sum_k v_k ReLU(u_k.x - b_k).
RestrictedNetwork restricted_form(const Realization& r);

double evaluate(const RestrictedNetwork& net, const Vector& x);

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace relup
