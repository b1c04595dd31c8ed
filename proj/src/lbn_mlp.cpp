#include "panelsde/lbn_mlp.hpp"

#include <cmath>

#include "panelsde/errors.hpp"

namespace panelsde::lbn {

namespace {
constexpr double kLnEps = 1e-5;

double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }
}  // namespace

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

Mlp::Mlp(int in, std::vector<int> hidden, int out) : in_(in), out_(out), hidden_(std::move(hidden)) {
    if (in < 1 || out < 1) throw InputError("network needs positive input/output dimensions");
    int offset = 0;
    int prev = in_;
    for (int width : hidden_) {
        if (width < 1) throw InputError("hidden width must be >= 1");
        BlockOffsets blk;
        blk.in = prev;
        blk.out = width;
        blk.w = offset;
        offset += width * prev;
        blk.b = offset;
        offset += width;
        blk.gain = offset;
        offset += width;
        blk.offset = offset;
        offset += width;
        blocks_.push_back(blk);
        prev = width;
    }
    BlockOffsets head;
    head.in = prev;
    head.out = out_;
    head.w = offset;
    offset += out_ * prev;
    head.b = offset;
    offset += out_;
    head.gain = head.offset = -1;
    blocks_.push_back(head);
    param_count_ = offset;
}

Vec Mlp::init_params(RngStream& rng) const {
    Vec theta(param_count_, 0.0);
    for (const auto& blk : blocks_) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(blk.in));
        for (int i = 0; i < blk.out * blk.in; ++i) theta[blk.w + i] = scale * rng.normal();
        if (blk.gain >= 0)
            for (int i = 0; i < blk.out; ++i) theta[blk.gain + i] = 1.0;
    }
    return theta;
}

Vec Mlp::forward(const Vec& x, const Vec& theta) const {
    Cache cache;
    return forward(x, theta, cache);
}

Vec Mlp::forward(const Vec& x, const Vec& theta, Cache& cache) const {
    const size_t n_hidden = blocks_.size() - 1;
    cache.inputs.assign(blocks_.size(), {});
    cache.zhat.assign(n_hidden, {});
    cache.elu_in.assign(n_hidden, {});
    cache.inv_std.assign(n_hidden, 0.0);

    Vec a = x;
    for (size_t l = 0; l < n_hidden; ++l) {
        const auto& blk = blocks_[l];
        cache.inputs[l] = a;
        Vec z(blk.out);
        for (int i = 0; i < blk.out; ++i) {
            double s = theta[blk.b + i];
            const int row = blk.w + i * blk.in;
            for (int j = 0; j < blk.in; ++j) s += theta[row + j] * a[j];
            z[i] = s;
        }
        double mu = 0.0;
        for (double v : z) mu += v;
        mu /= blk.out;
        double var = 0.0;
        for (double v : z) var += (v - mu) * (v - mu);
        var /= blk.out;
        const double inv_std = 1.0 / std::sqrt(var + kLnEps);
        cache.inv_std[l] = inv_std;

        Vec zhat(blk.out), h(blk.out);
        for (int i = 0; i < blk.out; ++i) {
            zhat[i] = (z[i] - mu) * inv_std;
            h[i] = theta[blk.gain + i] * zhat[i] + theta[blk.offset + i];
        }
        cache.zhat[l] = std::move(zhat);
        cache.elu_in[l] = h;
        a.resize(blk.out);
        for (int i = 0; i < blk.out; ++i) a[i] = elu(h[i]);
    }

    const auto& head = blocks_.back();
    cache.inputs[n_hidden] = a;
    Vec y(head.out);
    for (int i = 0; i < head.out; ++i) {
        double s = theta[head.b + i];
        const int row = head.w + i * head.in;
        for (int j = 0; j < head.in; ++j) s += theta[row + j] * a[j];
        y[i] = s;
    }
    cache.output = y;
    return y;
}

Vec Mlp::backward(const Cache& cache, const Vec& theta, const Vec& d_out, Vec& grad) const {
    const size_t n_hidden = blocks_.size() - 1;
    const auto& head = blocks_.back();

    Vec da(head.in, 0.0);
    for (int i = 0; i < head.out; ++i) {
        const double g = d_out[i];
        grad[head.b + i] += g;
        const int row = head.w + i * head.in;
        const Vec& a = cache.inputs[n_hidden];
        for (int j = 0; j < head.in; ++j) {
            grad[row + j] += g * a[j];
            da[j] += theta[row + j] * g;
        }
    }

    for (size_t l = n_hidden; l-- > 0;) {
        const auto& blk = blocks_[l];
        // Through the activation.
        Vec dh(blk.out);
        for (int i = 0; i < blk.out; ++i) dh[i] = da[i] * elu_grad(cache.elu_in[l][i]);
        // Through gain/offset.
        Vec dzhat(blk.out);
        for (int i = 0; i < blk.out; ++i) {
            grad[blk.gain + i] += dh[i] * cache.zhat[l][i];
            grad[blk.offset + i] += dh[i];
            dzhat[i] = dh[i] * theta[blk.gain + i];
        }
        // Through the normalization.
        double mean_dzhat = 0.0, mean_dzzh = 0.0;
        for (int i = 0; i < blk.out; ++i) {
            mean_dzhat += dzhat[i];
            mean_dzzh += dzhat[i] * cache.zhat[l][i];
        }
        mean_dzhat /= blk.out;
        mean_dzzh /= blk.out;
        Vec dz(blk.out);
        for (int i = 0; i < blk.out; ++i)
            dz[i] = cache.inv_std[l] *
                    (dzhat[i] - mean_dzhat - cache.zhat[l][i] * mean_dzzh);
        // Through the linear map.
        const Vec& a = cache.inputs[l];
        Vec da_prev(blk.in, 0.0);
        for (int i = 0; i < blk.out; ++i) {
            grad[blk.b + i] += dz[i];
            const int row = blk.w + i * blk.in;
            for (int j = 0; j < blk.in; ++j) {
                grad[row + j] += dz[i] * a[j];
                da_prev[j] += theta[row + j] * dz[i];
            }
        }
        da = std::move(da_prev);
    }
    return da;
}

PsdHead rectify_psd(const Vec& raw, int d) {
    if (static_cast<int>(raw.size()) != tri_size(d))
        throw ShapeError("rectify_psd: wrong number of lower-triangle slots");
    Mat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j) {
            A(i, j) = raw[tri_slot(i, j)];
            A(j, i) = A(i, j);
        }
    PsdHead head;
    head.eig = sym_eigendecompose(A);
    head.value = Mat(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k)
                s += head.eig.vectors(i, k) * softplus(head.eig.values[k]) * head.eig.vectors(j, k);
            head.value(i, j) = s;
            head.value(j, i) = s;
        }
    for (int i = 0; i < d; ++i) head.value(i, i) += kEigenFloor;
    return head;
}

Vec rectify_psd_backward(const PsdHead& head, const Mat& d_value) {
    const int d = head.value.rows();
    const Mat& U = head.eig.vectors;
    const Vec& lam = head.eig.values;

    // M = U^T G U, then scale by divided differences of softplus.
    Mat M = mat_mul(mat_transpose(U), mat_mul(d_value, U));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double gamma;
            if (std::abs(lam[i] - lam[j]) < 1e-9) {
                gamma = sigmoid(0.5 * (lam[i] + lam[j]));
            } else {
                gamma = (softplus(lam[i]) - softplus(lam[j])) / (lam[i] - lam[j]);
            }
            M(i, j) *= gamma;
        }
    }
    const Mat dA = mat_mul(U, mat_mul(M, mat_transpose(U)));

    Vec d_raw(tri_size(d), 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j)
            d_raw[tri_slot(i, j)] = i == j ? dA(i, i) : dA(i, j) + dA(j, i);
    return d_raw;
}

}  // namespace panelsde::lbn
