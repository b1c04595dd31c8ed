#pragma once

#include <memory>
#include <string>
#include <vector>

#include "panelsde/lbn_mlp.hpp"
#include "panelsde/pca.hpp"
#include "panelsde/sde_model.hpp"

namespace panelsde::lbn {

// Conditional-moment regression targets, one entry per usable transition:
// y_f = dx/dt and y_d = dx dx^T / (2 dt). Transitions that straddle a
// recorded gap are excluded and counted.
struct KmDataset {
    int d = 0;
    std::vector<Vec> x;
    std::vector<Vec> y_f;
    std::vector<Mat> y_d;
    std::vector<double> dt;
    std::vector<int> unit_index;        // into unit_ids, for per-unit fold splits
    std::vector<std::string> unit_ids;
    int excluded_gap_transitions = 0;

    size_t size() const { return x.size(); }
};

KmDataset km_targets(const LatentPanel& lp);

struct LbnHyper {
    std::vector<int> widths{64, 64, 64};
    double lr = 1e-3;
    int batch = 64;
    int max_epochs = 400;
    // Validation plateau: no relative improvement > swa_tol across swa_window
    // epochs starts moment collection; training stops after swa_collect
    // collected epochs (or max_epochs).
    int swa_window = 20;
    double swa_tol = 1e-3;
    int swa_collect = 20;
    int k_folds = 5;
    int n_ens = 30;  // must be divisible by k_folds
};

// One parameter vector per net.
struct LbnParams {
    Vec drift;
    Vec diff;
};

// Running first and second moments of the parameters collected after the
// plateau trigger; the sampling posterior is the element-wise Gaussian
// N(mean, second - mean^2) with variances clamped at zero.
struct SwagState {
    LbnParams mean;
    LbnParams second;
    int n = 0;

    void accumulate(const LbnParams& p);
    LbnParams sample(RngStream& rng) const;
};

struct FoldResult {
    SwagState swag;
    std::vector<int> val_units;
    int swa_start_epoch = -1;  // first epoch whose parameters were collected
    int epochs_run = 0;
    double final_val_loss = 0.0;
    std::vector<double> val_loss_history;
};

// Trains drift and diffusion nets on the training units (everything not in
// val_units) and monitors the summed validation loss for the plateau
// trigger. With an empty val_units the training loss is monitored instead.
// Throws DivergenceError on NaN loss, InsufficientDataError on an empty
// training set.
FoldResult train_fold(const KmDataset& data, const std::vector<int>& val_units,
                      const LbnHyper& hyper, uint64_t seed);

struct EnsemblePrediction {
    Vec f_mean;
    Vec f_std;         // element-wise, divisor N
    Mat d_mean;
    Vec d_eigen_std;   // per sorted eigenvalue, divisor N
};

struct EpistemicUncertainty {
    double value = 0.0;
    // The measure is relative; it blows up where the mean field vanishes, so
    // evaluations with E[|F|^2] < 1e-6 are flagged rather than trusted.
    bool low_signal = false;
};

// Ensemble of posterior parameter draws, n_ens/k per fold. Drift and
// diffusion evaluate as per-member means (the diffusion mean of PSD members
// stays PSD).
class LbnEnsemble : public SdeModel {
public:
    LbnEnsemble() = default;
    LbnEnsemble(Mlp drift_net, Mlp diff_net, std::vector<LbnParams> members);

    int dim() const override { return drift_net_.in_dim(); }
    Vec drift(const Vec& x) const override;
    Mat diffusion(const Vec& x) const override;

    EnsemblePrediction predict(const Vec& x) const;
    EpistemicUncertainty epistemic_uncertainty(const Vec& x) const;

    const Mlp& drift_net() const { return drift_net_; }
    const Mlp& diff_net() const { return diff_net_; }
    const std::vector<LbnParams>& members() const { return members_; }

private:
    Mlp drift_net_;
    Mlp diff_net_;
    std::vector<LbnParams> members_;
};

struct LbnTrainLog {
    std::vector<uint64_t> fold_seeds;
    std::vector<FoldResult> folds;
    int excluded_gap_transitions = 0;
    std::string swa_rule;  // plateau constants, echoed into model metadata
};

// Full per-unit k-fold training: fold f trains with seed derive(f) and
// contributes n_ens/k posterior draws. Folds may run on parallel workers;
// the result is identical to the serial order.
LbnEnsemble train_lbn(const KmDataset& data, const LbnHyper& hyper, uint64_t seed,
                      int workers = 1, LbnTrainLog* log = nullptr);

// Loss and gradient of one (x, y_f, y_d) sample under theta; exposed for the
// finite-difference gradient tests.
double lbn_loss(const Mlp& drift_net, const Mlp& diff_net, const LbnParams& theta, const Vec& x,
                const Vec& y_f, const Mat& y_d);
void lbn_loss_grad(const Mlp& drift_net, const Mlp& diff_net, const LbnParams& theta,
                   const Vec& x, const Vec& y_f, const Mat& y_d, LbnParams& grad);

}  // namespace panelsde::lbn
