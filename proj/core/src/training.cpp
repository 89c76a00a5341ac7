#include "homog/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "homog/bounds.hpp"
#include "homog/error.hpp"

namespace homog {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1, got " + std::to_string(epochs));
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
    if (log_every < 1) throw ConfigError("log_every must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if (parallel.threads < 1) throw ConfigError("threads must be >= 1");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainConfig& config) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ConfigError("Adam: parameter, gradient and state sizes differ");
    }
    ++state.step;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
}

LogEntry evaluate_monitor(const PeriodicNet& net, const Eigen::MatrixXd& outputs, const CollocationGrid& grid,
                          const TrainMonitor& monitor, int epoch, double loss) {
    LogEntry e;
    e.epoch = epoch;
    e.loss = loss;
    const bool primal = monitor.form == Formulation::primal;
    e.estimate = primal ? quick_estimate_primal(outputs, monitor.training_material, monitor.loading)
                        : quick_estimate_dual(outputs, monitor.training_material, monitor.loading);
    e.bound = std::numeric_limits<double>::quiet_NaN();
    if (monitor.bound_mesh != nullptr) {
        const TriMesh& mesh = *monitor.bound_mesh;
        const Eigen::VectorXd dofs = mesh.n() == grid.n() ? project_to_p1(outputs.col(0), grid, mesh)
                                                          : project_to_p1(net, mesh);
        e.bound = primal ? primal_energy(mesh, dofs, monitor.loading) : 1.0 / dual_energy(mesh, dofs, monitor.loading);
    }
    return e;
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void checkpoint(const PeriodicNet& net, const TrainConfig& config, Formulation form, int epoch) {
    const std::string name = std::string("params_") + (form == Formulation::primal ? "primal" : "dual") + "_epoch" +
                             std::to_string(epoch) + ".bin";
    save_params(net, config.checkpoint_dir / name);
}

}  // namespace

TrainResult train(PeriodicNet& net, const Loss& loss, const CollocationGrid& grid, const TrainMonitor& monitor,
                  const TrainConfig& config) {
    config.validate();
    if (monitor.training_material.size() != grid.size()) {
        throw ConfigError("monitor material must be sampled on the training grid");
    }
    const auto start = std::chrono::steady_clock::now();
    BatchEvaluator eval(grid.points(), loss.order(), config.parallel);
    AdamState state(net.size());
    std::vector<double> last_good(net.params().begin(), net.params().end());
    Eigen::MatrixXd seed;
    TrainResult result;
    result.log.reserve(static_cast<std::size_t>((config.epochs + config.log_every - 1) / config.log_every));

    auto abort = [&](const std::string& why) {
        result.aborted = true;
        result.abort_reason = why;
        std::copy(last_good.begin(), last_good.end(), net.params().begin());
    };

    for (int epoch = 0; epoch <= config.epochs; ++epoch) {
        const Eigen::MatrixXd& outputs = eval.forward(net);
        const bool last = epoch == config.epochs;
        const double value = loss.evaluate(outputs, last ? nullptr : &seed);
        if (!std::isfinite(value)) {
            abort("non-finite loss at epoch " + std::to_string(epoch));
            break;
        }
        if (epoch == 0) result.initial_loss = value;
        if (last) {
            result.final = evaluate_monitor(net, outputs, grid, monitor, epoch, value);
            break;
        }
        if (epoch % config.log_every == 0) {
            result.log.push_back(evaluate_monitor(net, outputs, grid, monitor, epoch, value));
        }
        const std::vector<double> grad = eval.backward(net, seed);
        if (!all_finite(grad)) {
            abort("non-finite gradient at epoch " + std::to_string(epoch));
            break;
        }
        std::copy(net.params().begin(), net.params().end(), last_good.begin());
        adam_step(net.params(), grad, state, config);
        result.epochs_completed = epoch + 1;
        if (config.checkpoint_every > 0 && !config.checkpoint_dir.empty() &&
            result.epochs_completed % config.checkpoint_every == 0 && result.epochs_completed < config.epochs) {
            checkpoint(net, config, monitor.form, result.epochs_completed);
        }
    }
    if (result.aborted) {
        BatchEvaluator probe(grid.points(), DerivOrder::gradient, config.parallel);
        const Eigen::MatrixXd& outputs = probe.forward(net);
        result.final = evaluate_monitor(net, outputs, grid, monitor, result.epochs_completed,
                                        std::numeric_limits<double>::quiet_NaN());
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace homog
