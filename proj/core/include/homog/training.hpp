#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homog/batch_eval.hpp"
#include "homog/fem.hpp"
#include "homog/losses.hpp"
#include "homog/network.hpp"
#include "homog/quadrature.hpp"

namespace homog {

struct TrainConfig {
    int epochs = 40000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int log_every = 100;
    /// Parameter snapshots every this many epochs when > 0 and a directory is set.
    int checkpoint_every = 0;
    std::filesystem::path checkpoint_dir;
    ParallelOptions parallel;

    void validate() const;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Throws ConfigError on size mismatch.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainConfig& config);

/// What is recorded at each log step besides the loss.
struct TrainMonitor {
    Formulation form = Formulation::primal;
    Vec2 loading = Vec2(1.0, 0.0);
    /// Material the loss was built on, sampled on the training grid; the
    /// quick estimate uses it.
    MaterialSamples training_material;
    /// Mesh on the piecewise material for the one-sided guaranteed bound
    /// (upper for primal, lower for dual). Skipped when null.
    const TriMesh* bound_mesh = nullptr;
};

struct LogEntry {
    int epoch = 0;
    double loss = 0.0;
    double estimate = 0.0;  ///< quick estimate, a conductivity
    double bound = 0.0;     ///< guaranteed one-sided bound, NaN when no mesh
};

struct TrainResult {
    std::vector<LogEntry> log;  ///< epochs 0, log_every, 2 log_every, ... < epochs
    LogEntry final;             ///< state after the last completed update
    double initial_loss = 0.0;
    int epochs_completed = 0;
    bool aborted = false;       ///< non-finite loss or gradient; net holds the last finite parameters
    std::string abort_reason;
    double seconds = 0.0;
};

/// Full-batch Adam on `loss` over the grid points. The net is updated in
/// place. Deterministic for fixed inputs when config.parallel.deterministic.
TrainResult train(PeriodicNet& net, const Loss& loss, const CollocationGrid& grid, const TrainMonitor& monitor,
                  const TrainConfig& config);

/// Quick estimate and guaranteed bound for the current net.
LogEntry evaluate_monitor(const PeriodicNet& net, const Eigen::MatrixXd& outputs, const CollocationGrid& grid,
                          const TrainMonitor& monitor, int epoch, double loss);

}  // namespace homog
