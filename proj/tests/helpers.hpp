#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "panelsde/pca.hpp"
#include "panelsde/rng.hpp"

namespace panelsde::testing {

// Exact Ornstein-Uhlenbeck transition draw for dx = -theta x dt + sqrt(2D) dW:
// x' ~ N(x e^{-theta dt}, (D/theta)(1 - e^{-2 theta dt})). Discretization-free,
// so simulator output can be checked against it.
inline double ou_exact_step(double x, double theta, double diff, double dt, RngStream& rng) {
    const double decay = std::exp(-theta * dt);
    const double var = diff / theta * (1.0 - decay * decay);
    return x * decay + std::sqrt(var) * rng.normal();
}

inline double ou_stationary_draw(double theta, double diff, RngStream& rng) {
    return std::sqrt(diff / theta) * rng.normal();
}

// Multi-unit 1D OU panel sampled exactly on a regular grid.
inline LatentPanel make_ou_panel(int n_units, int n_obs, double dt, double theta, double diff,
                                 uint64_t seed) {
    LatentPanel lp;
    lp.state_names = {"x1"};
    for (int u = 0; u < n_units; ++u) {
        RngStream rng(seed, static_cast<uint64_t>(u));
        LatentUnit unit;
        unit.id = "u" + std::to_string(u);
        double x = ou_stationary_draw(theta, diff, rng);
        for (int k = 0; k < n_obs; ++k) {
            unit.times.push_back(k * dt);
            unit.states.push_back({x});
            x = ou_exact_step(x, theta, diff, dt, rng);
        }
        lp.units.push_back(std::move(unit));
    }
    return lp;
}

// d-dimensional isotropic OU panel, every coordinate independent.
inline LatentPanel make_ou_panel_nd(int d, int n_units, int n_obs, double dt, double theta,
                                    double diff, uint64_t seed) {
    LatentPanel lp;
    for (int k = 0; k < d; ++k) lp.state_names.push_back("x" + std::to_string(k + 1));
    for (int u = 0; u < n_units; ++u) {
        RngStream rng(seed, static_cast<uint64_t>(u));
        LatentUnit unit;
        unit.id = "u" + std::to_string(u);
        Vec x(d);
        for (auto& v : x) v = ou_stationary_draw(theta, diff, rng);
        for (int k = 0; k < n_obs; ++k) {
            unit.times.push_back(k * dt);
            unit.states.push_back(x);
            for (auto& v : x) v = ou_exact_step(v, theta, diff, dt, rng);
        }
        lp.units.push_back(std::move(unit));
    }
    return lp;
}

// Unique scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("panelsde_" + tag + "_" + std::to_string(++counter) + "_" +
                std::to_string(static_cast<unsigned>(::getpid())));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::string str(const std::string& name) const { return (dir_ / name).string(); }

private:
    std::filesystem::path dir_;
};

}  // namespace panelsde::testing
