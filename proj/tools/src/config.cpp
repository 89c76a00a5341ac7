#include "homog_app/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "homog/error.hpp"

namespace homog::app {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        // Allow simple fractions such as 1/20 for epsilon.
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            const double num = parse_double(key, trim(text.substr(0, slash)));
            const double den = parse_double(key, trim(text.substr(slash + 1)));
            if (den == 0.0) throw ConfigError(key + ": division by zero in '" + text + "'");
            return num / den;
        }
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    const long long v = parse_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(key + ": value out of range");
    return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "off" || text == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <class E>
E parse_enum(const std::string& key, const std::string& text, std::initializer_list<std::pair<const char*, E>> options) {
    std::string allowed;
    for (const auto& [name, value] : options) {
        if (text == name) return value;
        allowed += allowed.empty() ? name : std::string(" | ") + name;
    }
    throw ConfigError(key + ": expected one of " + allowed + ", got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"method",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.method = parse_enum<Method>(k, v, {{"pinn", Method::pinn},
                                                  {"vspinn", Method::vspinn},
                                                  {"vnpinn", Method::vnpinn},
                                                  {"fem", Method::fem}});
         }},
        {"form",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.form = parse_enum<FormSelection>(
                 k, v, {{"primal", FormSelection::primal}, {"dual", FormSelection::dual}, {"both", FormSelection::both}});
         }},
        {"n_periodic", [](RunConfig& c, const std::string& k, const std::string& v) { c.network.n_periodic = parse_int(k, v); }},
        {"n_hidden", [](RunConfig& c, const std::string& k, const std::string& v) { c.network.n_hidden = parse_int(k, v); }},
        {"n_layers", [](RunConfig& c, const std::string& k, const std::string& v) { c.network.n_layers = parse_int(k, v); }},
        {"material",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.material = parse_enum<MaterialKind>(k, v, {{"piecewise", MaterialKind::piecewise},
                                                          {"smoothed", MaterialKind::smoothed}});
         }},
        {"epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.epsilon = parse_double(k, v); }},
        {"gamma_mat", [](RunConfig& c, const std::string& k, const std::string& v) { c.phases.gamma_mat = parse_double(k, v); }},
        {"gamma_inc", [](RunConfig& c, const std::string& k, const std::string& v) { c.phases.gamma_inc = parse_double(k, v); }},
        {"test_basis",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.test_basis = parse_enum<BasisKind>(k, v, {{"spectral", BasisKind::spectral}, {"network", BasisKind::network}});
         }},
        {"M", [](RunConfig& c, const std::string& k, const std::string& v) { c.basis_m = parse_int(k, v); }},
        {"N", [](RunConfig& c, const std::string& k, const std::string& v) { c.basis_n = parse_int(k, v); }},
        {"n_test", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_test = parse_int(k, v); }},
        {"test_seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.test_seed = parse_seed(k, v); }},
        {"gram_fallback_tau",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.gram_fallback_tau = parse_double(k, v); }},
        {"epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.epochs = parse_int(k, v); }},
        {"learning_rate", [](RunConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_double(k, v); }},
        {"adam_beta1", [](RunConfig& c, const std::string& k, const std::string& v) { c.adam_beta1 = parse_double(k, v); }},
        {"adam_beta2", [](RunConfig& c, const std::string& k, const std::string& v) { c.adam_beta2 = parse_double(k, v); }},
        {"adam_eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.adam_eps = parse_double(k, v); }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_seed(k, v); }},
        {"log_every", [](RunConfig& c, const std::string& k, const std::string& v) { c.log_every = parse_int(k, v); }},
        {"checkpoint_every",
         [](RunConfig& c, const std::string& k, const std::string& v) { c.checkpoint_every = parse_int(k, v); }},
        {"grid_n", [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_n = parse_int(k, v); }},
        {"fem_n", [](RunConfig& c, const std::string& k, const std::string& v) { c.fem_n = parse_int(k, v); }},
        {"direction", [](RunConfig& c, const std::string& k, const std::string& v) { c.direction = parse_int(k, v); }},
        {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
        {"deterministic", [](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
        {"threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = parse_int(k, v); }},
    };
    return table;
}

std::string unquote(const std::string& value, const std::string& where) {
    if (value.empty() || value.front() != '"') return value;
    if (value.size() < 2 || value.back() != '"') throw ConfigError(where + ": unterminated string");
    return value.substr(1, value.size() - 2);
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::pinn: return "pinn";
        case Method::vspinn: return "vspinn";
        case Method::vnpinn: return "vnpinn";
        case Method::fem: return "fem";
    }
    return "?";
}

std::string to_string(FormSelection f) {
    switch (f) {
        case FormSelection::primal: return "primal";
        case FormSelection::dual: return "dual";
        case FormSelection::both: return "both";
    }
    return "?";
}

std::string to_string(BasisKind b) { return b == BasisKind::spectral ? "spectral" : "network"; }
std::string to_string(MaterialKind k) { return k == MaterialKind::piecewise ? "piecewise" : "smoothed"; }
std::string to_string(Formulation f) { return f == Formulation::primal ? "primal" : "dual"; }

void RunConfig::validate() const {
    network.validate();
    phases.validate();
    if (material == MaterialKind::smoothed && !(epsilon > 0.0))
        throw ConfigError("epsilon must be > 0 for the smoothed material");
    if (method == Method::pinn && material == MaterialKind::piecewise)
        throw ConfigError("the strong-form PINN needs a differentiable material; use material = smoothed");
    if (method == Method::vspinn && test_basis != BasisKind::spectral)
        throw ConfigError("method vspinn uses test_basis = spectral");
    if (method == Method::vnpinn && test_basis != BasisKind::network)
        throw ConfigError("method vnpinn uses test_basis = network");
    if (basis_m < 1 || basis_n < 1) throw ConfigError("M and N must be >= 1");
    if (n_test < 1) throw ConfigError("n_test must be >= 1");
    if (!(gram_fallback_tau >= 0.0 && gram_fallback_tau < 1.0)) throw ConfigError("gram_fallback_tau must be in [0, 1)");
    if (grid_n < 4) throw ConfigError("grid_n must be >= 4");
    if (fem_n < 4 || fem_n % 4 != 0)
        throw ConfigError("fem_n must be a positive multiple of 4 so the inclusion edges fall on mesh lines");
    if (direction != 1 && direction != 2) throw ConfigError("direction must be 1 or 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (out.empty()) throw ConfigError("out must name a directory");
    train_config().validate();
}

MaterialField RunConfig::material_field() const {
    return material == MaterialKind::piecewise ? MaterialField::piecewise(phases) : MaterialField::smoothed(phases, epsilon);
}

bool RunConfig::wants(Formulation f) const {
    if (form == FormSelection::both) return true;
    return (form == FormSelection::primal) == (f == Formulation::primal);
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.adam_beta1 = adam_beta1;
    t.adam_beta2 = adam_beta2;
    t.adam_eps = adam_eps;
    t.seed = seed;
    t.log_every = log_every;
    t.checkpoint_every = checkpoint_every;
    t.checkpoint_dir = checkpoint_every > 0 ? out / "checkpoints" : std::filesystem::path();
    t.parallel.threads = threads;
    t.parallel.deterministic = deterministic;
    return t;
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        // Strip a trailing comment, but not a '#' inside a quoted string.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)), where);
        if (key.empty()) throw ConfigError(where + ": missing key");
        if (!setters().count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
        if (out.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        out[key] = value;
    }
    return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
    it->second(config, key, value);
}

RunConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
    RunConfig config;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open config file " + file.string());
        std::stringstream buf;
        buf << in.rdbuf();
        for (const auto& [key, value] : parse_key_values(buf.str(), file.string())) apply_setting(config, key, value);
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + item + "'");
        apply_setting(config, trim(item.substr(0, eq)), unquote(trim(item.substr(eq + 1)), "--set"));
    }
    config.validate();
    return config;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    return {
        {"method", to_string(c.method)},
        {"form", to_string(c.form)},
        {"n_periodic", std::to_string(c.network.n_periodic)},
        {"n_hidden", std::to_string(c.network.n_hidden)},
        {"n_layers", std::to_string(c.network.n_layers)},
        {"material", to_string(c.material)},
        {"epsilon", format_double(c.epsilon)},
        {"gamma_mat", format_double(c.phases.gamma_mat)},
        {"gamma_inc", format_double(c.phases.gamma_inc)},
        {"test_basis", to_string(c.test_basis)},
        {"M", std::to_string(c.basis_m)},
        {"N", std::to_string(c.basis_n)},
        {"n_test", std::to_string(c.n_test)},
        {"test_seed", std::to_string(c.test_seed)},
        {"gram_fallback_tau", format_double(c.gram_fallback_tau)},
        {"epochs", std::to_string(c.epochs)},
        {"learning_rate", format_double(c.learning_rate)},
        {"adam_beta1", format_double(c.adam_beta1)},
        {"adam_beta2", format_double(c.adam_beta2)},
        {"adam_eps", format_double(c.adam_eps)},
        {"seed", std::to_string(c.seed)},
        {"log_every", std::to_string(c.log_every)},
        {"checkpoint_every", std::to_string(c.checkpoint_every)},
        {"grid_n", std::to_string(c.grid_n)},
        {"fem_n", std::to_string(c.fem_n)},
        {"direction", std::to_string(c.direction)},
        {"out", c.out.string()},
        {"deterministic", c.deterministic ? "true" : "false"},
        {"threads", std::to_string(c.threads)},
    };
}

std::string format_config(const RunConfig& config, bool include_output) {
    std::string text;
    for (const auto& [key, value] : config_entries(config)) {
        if (key == "out" && !include_output) continue;
        const bool is_string = key == "method" || key == "form" || key == "material" || key == "test_basis" || key == "out";
        text += key + " = " + (is_string ? "\"" + value + "\"" : value) + "\n";
    }
    return text;
}

nlohmann::json config_to_json(const RunConfig& c) {
    return {
        {"method", to_string(c.method)},
        {"form", to_string(c.form)},
        {"network",
         {{"n_periodic", c.network.n_periodic},
          {"n_hidden", c.network.n_hidden},
          {"n_layers", c.network.n_layers},
          {"param_count", param_count(c.network)}}},
        {"material",
         {{"kind", to_string(c.material)},
          {"epsilon", c.material == MaterialKind::smoothed ? nlohmann::json(c.epsilon) : nlohmann::json(nullptr)},
          {"gamma_mat", c.phases.gamma_mat},
          {"gamma_inc", c.phases.gamma_inc}}},
        {"basis",
         {{"test_basis", to_string(c.test_basis)},
          {"M", c.basis_m},
          {"N", c.basis_n},
          {"n_test", c.n_test},
          {"test_seed", c.test_seed},
          {"gram_fallback_tau", c.gram_fallback_tau}}},
        {"training",
         {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed},
          {"log_every", c.log_every},
          {"checkpoint_every", c.checkpoint_every}}},
        {"grid_n", c.grid_n},
        {"fem_n", c.fem_n},
        {"direction", c.direction},
        {"deterministic", c.deterministic},
        {"threads", c.threads},
        {"text", format_config(c, false)},
    };
}

}  // namespace homog::app
