#pragma once

#include <functional>
#include <memory>

#include "panelsde/linalg.hpp"

namespace panelsde {

// A time-homogeneous Ito diffusion dx = F(x) dt + sqrt(2 D(x)) dW.
// Implementations must be pure: drift and diffusion depend on x only, and the
// diffusion output must be symmetric PSD.
class SdeModel {
public:
    virtual ~SdeModel() = default;
    virtual int dim() const = 0;
    virtual Vec drift(const Vec& x) const = 0;
    virtual Mat diffusion(const Vec& x) const = 0;
};

// Linear drift F(x) = A x + c with constant diffusion. Covers the
// Ornstein-Uhlenbeck and Brownian fixtures used throughout the tests.
class LinearSde : public SdeModel {
public:
    LinearSde(Mat A, Vec c, Mat D) : A_(std::move(A)), c_(std::move(c)), D_(std::move(D)) {}

    // dx = -theta x dt + sqrt(2 diff) dW on R^d.
    static LinearSde ou(int d, double theta, double diff);
    // Pure diffusion, F = 0.
    static LinearSde brownian(int d, double diff);

    int dim() const override { return static_cast<int>(c_.size()); }
    Vec drift(const Vec& x) const override;
    Mat diffusion(const Vec&) const override { return D_; }

    const Mat& A() const { return A_; }
    const Vec& c() const { return c_; }
    const Mat& D() const { return D_; }

private:
    Mat A_;
    Vec c_;
    Mat D_;
};

// Wraps arbitrary callables, mostly for tests and the python bindings.
class FunctionalSde : public SdeModel {
public:
    using DriftFn = std::function<Vec(const Vec&)>;
    using DiffusionFn = std::function<Mat(const Vec&)>;

    FunctionalSde(int d, DriftFn drift, DiffusionFn diffusion)
        : d_(d), drift_(std::move(drift)), diffusion_(std::move(diffusion)) {}

    int dim() const override { return d_; }
    Vec drift(const Vec& x) const override { return drift_(x); }
    Mat diffusion(const Vec& x) const override { return diffusion_(x); }

private:
    int d_;
    DriftFn drift_;
    DiffusionFn diffusion_;
};

}  // namespace panelsde
