#include "relup/process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "relup/errors.hpp"

namespace relup {

double kernel_eps_from_projection(double ux, double t, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("mollification parameter must be positive");
    const double sigma = std::sqrt(eps);
    const double z = t / sigma;
    // (g * |.|)(t) = E|t + sigma Z| and (g * sgn)(t) = erf(t / (sigma sqrt 2)).
    const double erf_z = std::erf(z / std::numbers::sqrt2);
    const double smoothed_abs = t * erf_z + 2.0 * sigma * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(ux - t, 0.0) - 0.5 * (ux - t) - 0.5 * smoothed_abs + 0.5 * ux * erf_z;
}

Realization::Realization(Trusted, Domain domain, double lambda, WeightLaw law, std::uint64_t seed,
                         Matrix directions, Vector weights, Vector offsets)
    : domain_(std::move(domain)),
      lambda_(lambda),
      law_(std::move(law)),
      seed_(seed),
      directions_(std::move(directions)),
      weights_(std::move(weights)),
      offsets_(std::move(offsets)) {}

Realization::Realization(Domain domain, double lambda, WeightLaw law, std::uint64_t seed, Matrix directions,
                         Vector weights, Vector offsets)
    : domain_(std::move(domain)),
      lambda_(lambda),
      law_(std::move(law)),
      seed_(seed),
      directions_(std::move(directions)),
      weights_(std::move(weights)),
      offsets_(std::move(offsets)) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw InvalidArgument("rate must be positive");
    const auto n = weights_.size();
    if (offsets_.size() != n || directions_.cols() != n) throw DimensionMismatch("neuron arrays differ in length");
    if (directions_.rows() != domain_.dim()) throw DimensionMismatch("neuron directions do not match the domain");
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto u = directions_.col(k);
        if (!(std::abs(u.norm() - 1.0) <= 1e-12)) throw InvalidArgument("neuron " + std::to_string(k) + " is not unit norm");
        if (!(std::abs(offsets_[k]) <= support_halfwidth(domain_, u) * (1.0 + 1e-12))) {
            throw InvalidArgument("neuron " + std::to_string(k) + " threshold does not meet the domain");
        }
    }
}

Neuron Realization::neuron(Eigen::Index k) const {
    return Neuron{weights_[k], Direction::from_unit(directions_.col(k)), offsets_[k]};
}

std::vector<Neuron> Realization::neurons() const {
    std::vector<Neuron> out;
    out.reserve(static_cast<std::size_t>(width()));
    for (Eigen::Index k = 0; k < width(); ++k) out.push_back(neuron(k));
    return out;
}

Realization Realization::with_neuron(const Neuron& n) const {
    const auto w = width();
    Matrix dirs(dim(), w + 1);
    dirs.leftCols(w) = directions_;
    dirs.col(w) = n.u.coords();
    Vector v(w + 1);
    v.head(w) = weights_;
    v[w] = n.v;
    Vector b(w + 1);
    b.head(w) = offsets_;
    b[w] = n.b;
    return Realization(domain_, lambda_, law_, seed_, std::move(dirs), std::move(v), std::move(b));
}

bool Realization::operator==(const Realization& other) const {
    return domain_ == other.domain_ && lambda_ == other.lambda_ && law_ == other.law_ && seed_ == other.seed_ &&
           directions_.cols() == other.directions_.cols() && directions_ == other.directions_ &&
           weights_ == other.weights_ && offsets_ == other.offsets_;
}

Realization sample_realization(double lambda, const WeightLaw& law, const Domain& domain, std::uint64_t seed,
                               const SamplerOptions& options) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("rate must be positive");
    Rng rng(seed);
    std::poisson_distribution<long long> poisson(lambda * measure_Z(domain));
    const auto n = static_cast<Eigen::Index>(poisson(rng));

    Matrix dirs(domain.dim(), n);
    Vector offsets(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        offsets[k] = sample_threshold_into(domain, rng, dirs.col(k), options.anisotropic_directions);
    }
    Vector weights(n);
    sample_into(law, rng, weights);
    // Sampled thresholds satisfy the invariants by construction.
    return Realization(Realization::Trusted{}, domain, lambda, law, seed, std::move(dirs), std::move(weights),
                       std::move(offsets));
}

namespace {

void check_point(const Realization& r, Eigen::Index rows) {
    if (rows != r.dim()) throw DimensionMismatch("evaluation point does not match the realization dimension");
}

}  // namespace

Vector evaluate_many(const Realization& r, const Matrix& points, const KernelPerturbation& perturbation) {
    check_point(r, points.rows());
    const Matrix proj = r.directions().transpose() * points;
    const auto& v = r.weights();
    const auto& b = r.offsets();
    Vector out(points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        CompensatedSum sum;
        for (Eigen::Index k = 0; k < r.width(); ++k) {
            // Most kernels vanish at a given point; skipping exact zeros leaves the sum unchanged.
            const double kv = kernel_from_projection(proj(k, j), b[k], perturbation.h1_shift);
            if (kv != 0.0) sum.add(v[k] * kv);
        }
        out[j] = sum.value();
    }
    return out;
}

double evaluate(const Realization& r, const Vector& x, const KernelPerturbation& perturbation) {
    return evaluate_many(r, x, perturbation)[0];
}

FlaggedValue evaluate_flagged(const Realization& r, const Vector& x) {
    return FlaggedValue{evaluate(r, x), !r.domain().contains(x)};
}

Vector gradient(const Realization& r, const Vector& x, const KernelPerturbation& perturbation) {
    check_point(r, x.size());
    const Vector proj = r.directions().transpose() * x;
    const auto& v = r.weights();
    const auto& b = r.offsets();
    Vector g = Vector::Zero(r.dim());
    for (Eigen::Index i = 0; i < r.dim(); ++i) {
        CompensatedSum sum;
        for (Eigen::Index k = 0; k < r.width(); ++k) {
            const double slope = heaviside_mid(proj[k] - b[k]) + h1(b[k]) + perturbation.h1_shift;
            sum.add(v[k] * r.directions()(i, k) * slope);
        }
        g[i] = sum.value();
    }
    return g;
}

Matrix gradient_many(const Realization& r, const Matrix& points, const KernelPerturbation& perturbation) {
    check_point(r, points.rows());
    const Matrix proj = r.directions().transpose() * points;
    const auto& v = r.weights();
    const auto& b = r.offsets();
    Matrix g(r.dim(), points.cols());
    std::vector<CompensatedSum> sums(static_cast<std::size_t>(r.dim()));
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        std::fill(sums.begin(), sums.end(), CompensatedSum{});
        for (Eigen::Index k = 0; k < r.width(); ++k) {
            const double slope = heaviside_mid(proj(k, j) - b[k]) + h1(b[k]) + perturbation.h1_shift;
            if (slope == 0.0) continue;
            for (Eigen::Index i = 0; i < r.dim(); ++i) sums[i].add(v[k] * r.directions()(i, k) * slope);
        }
        for (Eigen::Index i = 0; i < r.dim(); ++i) g(i, j) = sums[i].value();
    }
    return g;
}

RestrictedNetwork restricted_form(const Realization& r) {
    RestrictedNetwork net{SkipAffine{Vector::Zero(r.dim()), 0.0}, r.neurons()};
    CompensatedSum b0;
    for (Eigen::Index i = 0; i < r.dim(); ++i) {
        CompensatedSum wi;
        for (Eigen::Index k = 0; k < r.width(); ++k) wi.add(r.weights()[k] * h1(r.offsets()[k]) * r.directions()(i, k));
        net.skip.w0[i] = wi.value();
    }
    for (Eigen::Index k = 0; k < r.width(); ++k) b0.add(r.weights()[k] * h2(r.offsets()[k]));
    net.skip.b0 = b0.value();
    return net;
}

double evaluate(const RestrictedNetwork& net, const Vector& x) {
    if (x.size() != net.skip.w0.size()) throw DimensionMismatch("evaluation point does not match the network");
    CompensatedSum sum;
    sum.add(net.skip.w0.dot(x));
    sum.add(net.skip.b0);
    for (const auto& n : net.neurons) sum.add(n.v * std::max(n.u.coords().dot(x) - n.b, 0.0));
    return sum.value();
}

}  // namespace relup
