#pragma once

#include <vector>

#include "panelsde/linalg.hpp"
#include "panelsde/rng.hpp"

namespace panelsde::lbn {

// Feedforward net over a flat parameter vector: hidden blocks are
// Linear -> LayerNormalization -> ELU, the output layer is linear.
// Keeping parameters flat makes SWAG moment tracking and posterior sampling
// a pair of element-wise loops.
class Mlp {
public:
    Mlp() = default;
    Mlp(int in, std::vector<int> hidden, int out);

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    const std::vector<int>& hidden() const { return hidden_; }
    int param_count() const { return param_count_; }

    // Gains start at 1, everything else at Xavier-style normal / zero.
    Vec init_params(RngStream& rng) const;

    Vec forward(const Vec& x, const Vec& theta) const;

    // Per-layer intermediates needed by backward().
    struct Cache {
        std::vector<Vec> inputs;      // block inputs (first is x)
        std::vector<Vec> zhat;        // normalized pre-gain values
        std::vector<Vec> elu_in;      // values the activation was applied to
        std::vector<double> inv_std;  // 1 / sqrt(var + eps) per block
        Vec output;
    };
    Vec forward(const Vec& x, const Vec& theta, Cache& cache) const;

    // Accumulates dL/dtheta into grad given dL/doutput; returns dL/dx.
    Vec backward(const Cache& cache, const Vec& theta, const Vec& d_out, Vec& grad) const;

private:
    struct BlockOffsets {
        int w = 0, b = 0, gain = 0, offset = 0;
        int in = 0, out = 0;
    };

    int in_ = 0, out_ = 0;
    std::vector<int> hidden_;
    std::vector<BlockOffsets> blocks_;  // hidden blocks, then the linear output
    int param_count_ = 0;
};

// Symmetric matrix from lower-triangle slots (row-major, i >= j), then
// eigenvalue rectification lambda -> softplus(lambda) + 1e-9 so the result is
// strictly PSD.
struct PsdHead {
    Mat value;
    EigenSym eig;  // of the pre-rectification symmetric fill
};

PsdHead rectify_psd(const Vec& raw, int d);

// Pulls a gradient w.r.t. the rectified matrix back to the raw slots using
// the divided-difference (Daleckii-Krein) map; eigenvalue pairs closer than
// 1e-9 fall back to the derivative at their midpoint.
Vec rectify_psd_backward(const PsdHead& head, const Mat& d_value);

inline int tri_size(int d) { return d * (d + 1) / 2; }
inline int tri_slot(int i, int j) { return i * (i + 1) / 2 + j; }  // i >= j

double softplus(double z);
double sigmoid(double z);

}  // namespace panelsde::lbn
