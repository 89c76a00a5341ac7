#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "homog/cell_material.hpp"
#include "homog/losses.hpp"
#include "homog/network.hpp"
#include "homog/training.hpp"

namespace homog::app {

enum class Method { pinn, vspinn, vnpinn, fem };
enum class FormSelection { primal, dual, both };
enum class BasisKind { spectral, network };

/// Everything that determines a run. One config file plus --set overrides
/// fully reproduces a run; the parsed config is echoed into run.json.
struct RunConfig {
    Method method = Method::pinn;
    FormSelection form = FormSelection::both;
    NetworkConfig network{10, 10, 2};

    MaterialKind material = MaterialKind::smoothed;
    double epsilon = 0.05;
    PhasePair phases{1.0, 0.1};

    BasisKind test_basis = BasisKind::spectral;
    int basis_m = 5;
    int basis_n = 5;
    int n_test = 70;
    std::uint64_t test_seed = 1000;
    double gram_fallback_tau = 1e-10;

    int epochs = 40000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    int log_every = 100;
    int checkpoint_every = 0;

    int grid_n = 128;
    int fem_n = 128;
    int direction = 1;  ///< loading e_1 or e_2 for both xi and zeta
    std::filesystem::path out = "runs/default";
    bool deterministic = true;
    int threads = 1;

    /// Throws ConfigError for any out-of-range value or inconsistent
    /// combination (strong form on the piecewise material, a test_basis
    /// that contradicts the method, ...).
    void validate() const;

    MaterialField material_field() const;
    /// The material guaranteed bounds refer to.
    MaterialField reference_material() const { return MaterialField::piecewise(phases); }
    Vec2 loading() const { return direction == 1 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0); }
    bool weak() const { return method == Method::vspinn || method == Method::vnpinn; }
    bool wants(Formulation f) const;
    TrainConfig train_config() const;
};

/// Parses `key = value` lines. Strings may be double-quoted; `#` starts a
/// comment; blank lines are ignored. Unknown keys, duplicate keys and
/// malformed values throw ConfigError naming the line.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin = "config");

/// Applies one key/value pair to `config`.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Default config, then the file (if any), then `overrides` ("key=value").
/// The result is validated.
RunConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides);

/// Every key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
/// Serializes to the flat text format; load_config() of the result yields
/// the same config. The output directory is left out on request so that
/// records of the same run written to different places compare equal.
std::string format_config(const RunConfig& config, bool include_output = true);
/// Everything except the output directory.
nlohmann::json config_to_json(const RunConfig& config);

std::string to_string(Method m);
std::string to_string(FormSelection f);
std::string to_string(BasisKind b);
std::string to_string(MaterialKind k);
std::string to_string(Formulation f);

}  // namespace homog::app
