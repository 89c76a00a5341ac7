#include "homog_app/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <ostream>

#include "homog/bounds.hpp"
#include "homog/error.hpp"
#include "homog/fem.hpp"
#include "homog/losses.hpp"
#include "homog/test_bases.hpp"
#include "homog/training.hpp"

namespace homog::app {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json number_or_null(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

json percent_error(std::optional<double> v, double reference) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return 100.0 * (*v - reference) / reference;
}

struct FinalValues {
    std::optional<double> primal_estimate, dual_estimate, upper_bound, lower_bound;
};

json results_block(const FinalValues& f, double reference) {
    std::optional<double> gap;
    if (f.primal_estimate && f.dual_estimate) gap = relative_gap(*f.primal_estimate, *f.dual_estimate);
    const bool suspected = gap && (!std::isfinite(*gap) || std::abs(*gap) > 0.10);
    return {
        {"primal_estimate", number_or_null(f.primal_estimate)},
        {"dual_estimate", number_or_null(f.dual_estimate)},
        {"upper_bound", number_or_null(f.upper_bound)},
        {"lower_bound", number_or_null(f.lower_bound)},
        {"gap", number_or_null(gap)},
        {"relative_errors",
         {{"primal_estimate_pct", percent_error(f.primal_estimate, reference)},
          {"dual_estimate_pct", percent_error(f.dual_estimate, reference)},
          {"upper_bound_pct", percent_error(f.upper_bound, reference)},
          {"lower_bound_pct", percent_error(f.lower_bound, reference)}}},
        {"suspected_failure", suspected},
    };
}

json record_skeleton(const RunConfig& config, const std::string& command) {
    const double reference = obnosov_effective(config.phases);
    const VoigtReuss vr = voigt_reuss(config.phases);
    return {
        {"schema_version", kRecordSchemaVersion},
        {"command", command},
        {"config", config_to_json(config)},
        {"exact_reference", reference},
        {"reference_kind", "obnosov_effective"},
        {"voigt_reuss", {{"voigt", vr.upper}, {"reuss", vr.lower}}},
        {"dual_convention", "reciprocal_B11"},
        {"output", {{"directory", config.out.string()}}},
    };
}

void write_solution_csv(const std::filesystem::path& path, const TriMesh& mesh, const Eigen::VectorXd& values) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << std::setprecision(17) << "dof,x1,x2,value\n";
    for (std::size_t d = 0; d < mesh.dof_count(); ++d) {
        const Vec2 x = mesh.node_position(d);
        out << d << ',' << x(0) << ',' << x(1) << ',' << values(static_cast<Eigen::Index>(d)) << '\n';
    }
}

void prepare_output(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + config.out.string() + ": " + ec.message());
}

void print_table(std::ostream& log, const json& results, double reference) {
    auto cell = [](const json& v, int precision) {
        std::ostringstream s;
        if (v.is_null()) s << "-";
        else s << std::fixed << std::setprecision(precision) << v.get<double>();
        return s.str();
    };
    const json& err = results["relative_errors"];
    log << "reference " << std::setprecision(6) << reference << "\n"
        << std::left << std::setw(18) << "quantity" << std::setw(14) << "value" << "error %\n"
        << std::setw(18) << "primal estimate" << std::setw(14) << cell(results["primal_estimate"], 6)
        << cell(err["primal_estimate_pct"], 4) << "\n"
        << std::setw(18) << "dual estimate" << std::setw(14) << cell(results["dual_estimate"], 6)
        << cell(err["dual_estimate_pct"], 4) << "\n"
        << std::setw(18) << "upper bound" << std::setw(14) << cell(results["upper_bound"], 6)
        << cell(err["upper_bound_pct"], 4) << "\n"
        << std::setw(18) << "lower bound" << std::setw(14) << cell(results["lower_bound"], 6)
        << cell(err["lower_bound_pct"], 4) << "\n";
    if (results["suspected_failure"].get<bool>()) log << "suspected failure: primal-dual gap above 10%\n";
}

std::string form_name(Formulation f) { return to_string(f); }

struct TestBasisSetup {
    std::shared_ptr<const BasisGradients> gradients;
    Gram gram = Gram::diagonal(Eigen::VectorXd::Ones(1));
    json info;
};

TestBasisSetup build_test_basis(const RunConfig& config, const CollocationGrid& grid, const ParallelOptions& par,
                                std::ostream& log) {
    TestBasisSetup setup;
    if (config.test_basis == BasisKind::spectral) {
        const SpectralBasis basis = build_spectral(config.basis_m, config.basis_n);
        setup.gradients = std::make_shared<const BasisGradients>(basis_gradients(basis, grid));
        setup.gram = spectral_gram(basis);
        setup.info = {{"kind", "spectral"},
                      {"size", basis.size()},
                      {"gram_form", "diagonal"},
                      {"fallback", false},
                      {"relative_conditioning", nullptr},
                      {"note", "analytic diagonal Gram m^2 + n^2"}};
        return setup;
    }
    const NetworkBasis basis = build_network_basis(config.network, config.n_test, config.test_seed);
    setup.gradients = std::make_shared<const BasisGradients>(basis_gradients(basis, grid, par));
    GramSelection sel = select_gram(*setup.gradients, grid, config.gram_fallback_tau);
    if (sel.fallback) log << "warning: " << sel.note << "\n";
    setup.info = {{"kind", "network"},
                  {"size", basis.size()},
                  {"gram_form", sel.gram.form() == GramForm::full ? "full" : "diagonal"},
                  {"fallback", sel.fallback},
                  {"relative_conditioning", number_or_null(sel.relative_conditioning)},
                  {"note", sel.note}};
    setup.gram = std::move(sel.gram);
    return setup;
}

struct FormRun {
    TrainResult result;
    std::size_t param_count = 0;
};

}  // namespace

void write_json(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << value.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

bool record_aborted(const json& record) {
    if (!record.contains("training") || !record["training"].is_object()) return false;
    for (const auto& item : record["training"].items()) {
        if (item.value().value("aborted", false)) return true;
    }
    return false;
}

json comparable_record(const json& record) {
    json copy = record;
    copy.erase("timing");
    copy.erase("output");
    return copy;
}

json run_fem(const RunConfig& config, std::ostream& log) {
    config.validate();
    prepare_output(config);
    const auto start = Clock::now();
    const ParallelOptions par{config.threads, config.deterministic};
    const Vec2 loading = config.loading();
    const double reference = obnosov_effective(config.phases);

    const TriMesh mesh = build_mesh(config.fem_n, config.material_field());
    json record = record_skeleton(config, "fem");
    json fem_info = {{"n", mesh.n()}, {"dof_count", mesh.dof_count()}};
    json timing = json::object();

    FinalValues final;
    for (Formulation form : {Formulation::primal, Formulation::dual}) {
        if (!config.wants(form)) continue;
        const auto t0 = Clock::now();
        const SparseSystem system =
            form == Formulation::primal ? assemble_primal(mesh, loading, par) : assemble_dual(mesh, loading, par);
        const SolveResult solved = solve(system);
        if (form == Formulation::primal) {
            final.upper_bound = primal_energy(mesh, solved.solution, loading);
            final.primal_estimate = final.upper_bound;
        } else {
            final.lower_bound = 1.0 / dual_energy(mesh, solved.solution, loading);
            final.dual_estimate = final.lower_bound;
        }
        fem_info[form_name(form)] = {{"iterations", solved.iterations},
                                     {"final_residual", solved.residual_history.empty()
                                                            ? json(nullptr)
                                                            : json(solved.residual_history.back())}};
        timing[form_name(form) + "_seconds"] = seconds_since(t0);
        write_solution_csv(config.out / ("solution_" + form_name(form) + ".csv"), mesh, solved.solution);
        log << form_name(form) << ": " << solved.iterations << " CG iterations\n";
    }

    record["results"] = results_block(final, reference);
    record["training"] = nullptr;
    record["history"] = json::array();
    record["test_basis"] = nullptr;
    record["fem"] = fem_info;
    timing["total_seconds"] = seconds_since(start);
    record["timing"] = timing;
    write_json(config.out / "run.json", record);
    print_table(log, record["results"], reference);
    return record;
}

json run_train(const RunConfig& config, std::ostream& log) {
    config.validate();
    if (config.method == Method::fem) throw ConfigError("method fem is run with the fem subcommand");
    prepare_output(config);
    if (config.checkpoint_every > 0) std::filesystem::create_directories(config.out / "checkpoints");
    const auto start = Clock::now();
    const ParallelOptions par{config.threads, config.deterministic};
    const Vec2 loading = config.loading();
    const double reference = obnosov_effective(config.phases);
    const MaterialField material = config.material_field();

    const CollocationGrid grid(config.grid_n);
    const TriMesh mesh = build_mesh(config.fem_n, config.reference_material());
    const MaterialSamples samples = MaterialSamples::sample(material, grid.points());

    json record = record_skeleton(config, "train");
    json timing = json::object();
    json training = json::object();

    std::optional<TestBasisSetup> basis;
    if (config.weak()) {
        const auto t0 = Clock::now();
        basis = build_test_basis(config, grid, par, log);
        timing["test_basis_seconds"] = seconds_since(t0);
    }

    std::map<Formulation, FormRun> runs;
    for (Formulation form : {Formulation::primal, Formulation::dual}) {
        if (!config.wants(form)) continue;
        std::unique_ptr<Loss> loss;
        if (config.weak()) {
            loss = std::make_unique<WeakLoss>(form, material, loading, grid, basis->gradients, basis->gram);
        } else {
            loss = std::make_unique<StrongLoss>(form, material, loading, grid);
        }
        TrainMonitor monitor;
        monitor.form = form;
        monitor.loading = loading;
        monitor.training_material = samples;
        monitor.bound_mesh = &mesh;

        PeriodicNet net = PeriodicNet::init(config.network, config.seed);
        log << "training " << form_name(form) << " (" << net.size() << " parameters, " << config.epochs
            << " epochs)\n";
        FormRun run;
        run.param_count = net.size();
        run.result = train(net, *loss, grid, monitor, config.train_config());
        const TrainResult& r = run.result;
        if (r.aborted) log << "warning: " << form_name(form) << " training aborted: " << r.abort_reason << "\n";
        log << form_name(form) << ": loss " << r.initial_loss << " -> " << r.final.loss << ", estimate "
            << r.final.estimate << ", bound " << r.final.bound << " (" << r.seconds << " s)\n";

        save_params(net, config.out / ("params_" + form_name(form) + ".bin"));
        write_solution_csv(config.out / ("solution_" + form_name(form) + ".csv"), mesh, project_to_p1(net, mesh, par));

        training[form_name(form)] = {
            {"param_count", run.param_count},
            {"initial_loss", number_or_null(r.initial_loss)},
            {"final_loss", number_or_null(r.final.loss)},
            {"epochs_completed", r.epochs_completed},
            {"loss_decreased", std::isfinite(r.final.loss) && r.final.loss < r.initial_loss},
            {"aborted", r.aborted},
            {"abort_reason", r.abort_reason},
        };
        timing[form_name(form) + "_seconds"] = r.seconds;
        runs.emplace(form, std::move(run));
    }

    // History rows keyed by epoch, primal and dual merged.
    struct Row {
        std::optional<double> primal_loss, dual_loss, primal_estimate, dual_estimate, upper, lower;
    };
    std::map<int, Row> rows;
    FinalValues final;
    for (const auto& [form, run] : runs) {
        auto put = [&, f = form](const LogEntry& e) {
            Row& row = rows[e.epoch];
            if (f == Formulation::primal) {
                row.primal_loss = e.loss;
                row.primal_estimate = e.estimate;
                row.upper = e.bound;
            } else {
                row.dual_loss = e.loss;
                row.dual_estimate = e.estimate;
                row.lower = e.bound;
            }
        };
        for (const LogEntry& e : run.result.log) put(e);
        if (form == Formulation::primal) {
            final.primal_estimate = run.result.final.estimate;
            final.upper_bound = run.result.final.bound;
        } else {
            final.dual_estimate = run.result.final.estimate;
            final.lower_bound = run.result.final.bound;
        }
    }

    json history = json::array();
    bool ordered = true;
    std::ofstream curve(config.out / "curve.csv");
    if (!curve) throw ConfigError("cannot write " + (config.out / "curve.csv").string());
    curve << std::setprecision(17)
          << "epoch,loss,primal_estimate,dual_estimate,gap,primal_loss,dual_loss,upper_bound,lower_bound\n";
    auto csv = [](std::optional<double> v) {
        std::ostringstream s;
        s << std::setprecision(17);
        if (v && std::isfinite(*v)) s << *v;
        return s.str();
    };
    auto emit = [&](int epoch, const Row& row, bool is_final) {
        std::optional<double> gap, loss;
        if (row.primal_estimate && row.dual_estimate) gap = relative_gap(*row.primal_estimate, *row.dual_estimate);
        if (row.primal_loss || row.dual_loss) loss = row.primal_loss.value_or(0.0) + row.dual_loss.value_or(0.0);
        if (row.upper && *row.upper < reference - 1e-12) ordered = false;
        if (row.lower && *row.lower > reference + 1e-12) ordered = false;
        curve << epoch << ',' << csv(loss) << ',' << csv(row.primal_estimate) << ',' << csv(row.dual_estimate) << ','
              << csv(gap) << ',' << csv(row.primal_loss) << ',' << csv(row.dual_loss) << ',' << csv(row.upper) << ','
              << csv(row.lower) << '\n';
        if (is_final) return;
        history.push_back({{"epoch", epoch},
                           {"primal_loss", number_or_null(row.primal_loss)},
                           {"dual_loss", number_or_null(row.dual_loss)},
                           {"primal_estimate", number_or_null(row.primal_estimate)},
                           {"dual_estimate", number_or_null(row.dual_estimate)},
                           {"upper_bound", number_or_null(row.upper)},
                           {"lower_bound", number_or_null(row.lower)},
                           {"gap", number_or_null(gap)}});
    };
    for (const auto& [epoch, row] : rows) emit(epoch, row, false);
    Row last;
    for (const auto& [form, run] : runs) {
        const LogEntry& e = run.result.final;
        if (form == Formulation::primal) {
            last.primal_loss = e.loss;
            last.primal_estimate = e.estimate;
            last.upper = e.bound;
        } else {
            last.dual_loss = e.loss;
            last.dual_estimate = e.estimate;
            last.lower = e.bound;
        }
    }
    emit(config.epochs, last, true);

    record["results"] = results_block(final, reference);
    record["results"]["bounds_ordered"] = ordered;
    record["training"] = training;
    record["history"] = history;
    record["test_basis"] = basis ? basis->info : json(nullptr);
    record["fem"] = {{"n", mesh.n()}, {"dof_count", mesh.dof_count()}, {"material", "piecewise"}};
    timing["total_seconds"] = seconds_since(start);
    record["timing"] = timing;
    write_json(config.out / "run.json", record);
    print_table(log, record["results"], reference);
    return record;
}

}  // namespace homog::app
