#include "cforge/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "cforge/catalog.hpp"
#include "cforge/errors.hpp"
#include "cforge/rational.hpp"
#include "cforge/report.hpp"

namespace cforge {

namespace {

struct RunConfig {
    std::string subcommand;
    std::string model;
    std::string output;
    std::string format = "json";
    std::uint64_t seed = 1;

    int max_generations = 16;

    std::optional<double> t_end, dt;
    std::string schedule;
    std::string compare;
    std::string csv;
    std::string state;
    int reproject = 0;
    int record_every = 1;
    bool extended = false;

    int D = 26, K = 3, n_max = 6, k = 2, l = -2;
    double N = 0;
    std::vector<double> P;
    std::string family = "a";
    std::string signature = "lorentzian";
    int helicity = -1;
    std::vector<int> mode{0, 0, 1};
    double hbar = 1;
    std::string alpha = "1/2";

    std::size_t triples = 200, nullity = 100;
    std::string export_dir;

    Json to_json() const {
        Json j;
        j["subcommand"] = subcommand;
        j["format"] = format;
        j["seed"] = seed;
        if (!model.empty()) j["model"] = model;
        if (!output.empty()) j["output"] = output;
        if (subcommand == "analyze") j["max_generations"] = max_generations;
        if (subcommand == "simulate") {
            j["t_end"] = t_end ? Json(*t_end) : Json(nullptr);
            j["dt"] = dt ? Json(*dt) : Json(nullptr);
            j["schedule"] = schedule;
            j["compare"] = compare;
            j["csv"] = csv;
            j["state"] = state;
            j["reproject_every"] = reproject;
            j["record_every"] = record_every;
            j["extended"] = extended;
        }
        if (subcommand == "quantum virasoro")
            j["quantum"] = {{"D", D}, {"K", K}, {"n_max", n_max}, {"k", k}, {"l", l}, {"N", N}, {"P", P},
                            {"family", family}, {"signature", signature}};
        if (subcommand == "quantum em-norm") j["quantum"] = {{"helicity", helicity}, {"k", mode}, {"hbar", hbar}};
        if (subcommand == "quantum kg") j["quantum"] = {{"alpha", alpha}};
        if (subcommand == "check") j["check"] = {{"triples", triples}, {"nullity_samples", nullity}};
        return j;
    }
};

struct Resolved {
    PhaseSpaceModel model;
    std::optional<CatalogEntry> entry;
};

Resolved resolve_model(const std::string& source) {
    const std::string prefix = "builtin:";
    if (source.rfind(prefix, 0) == 0) {
        CatalogEntry e = builtin(source.substr(prefix.size()));
        return {load_model(e.source), e};
    }
    std::ifstream in(source);
    if (!in) throw Error("cannot open model file '" + source + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Resolved r{load_model(ss.str()), std::nullopt};
    try {
        r.entry = builtin(r.model.name());
    } catch (const std::invalid_argument&) {
    }
    return r;
}

void flatten(const Json& j, const std::string& path, std::ostream& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
    } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
    } else {
        out << path << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
    }
}

void emit(const Json& report, const RunConfig& cfg, std::ostream& out) {
    std::ostringstream text;
    if (cfg.format == "text")
        flatten(report, "", text);
    else
        text << report.dump(2) << '\n';
    if (cfg.output.empty()) {
        out << text.str();
        return;
    }
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) throw Error("cannot write '" + cfg.output + "'");
    f << text.str();
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_top_level(text)) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = std::stod(item, &used);
        if (used != item.size()) throw Error("bad number '" + item + "' in list");
        out.push_back(v);
    }
    return out;
}

int run_analyze(const RunConfig& cfg, std::ostream& out) {
    auto r = resolve_model(cfg.model);
    ConsistencyOptions opt;
    opt.max_generations = cfg.max_generations;
    auto a = analyze(r.model, opt);
    Json report;
    report["config"] = cfg.to_json();
    report["analysis"] = analysis_report(a);
    emit(report, cfg, out);
    return a.status.converged ? kExitOk : kExitInconsistent;
}

int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto r = resolve_model(cfg.model);
    auto a = analyze(r.model);
    if (!a.status.converged) {
        err << "analysis did not converge: " << (a.status.inconsistent ? a.status.witness : a.status.diagnostic) << '\n';
        return kExitInconsistent;
    }
    DynamicsDefaults defaults = r.entry ? r.entry->dynamics : DynamicsDefaults{};
    DynamicsOptions opt;
    opt.t_end = cfg.t_end.value_or(defaults.t_end);
    opt.dt = cfg.dt.value_or(defaults.dt);
    opt.reproject_every = cfg.reproject;
    opt.record_every = cfg.record_every;
    opt.extended = cfg.extended;

    ConstrainedFlow flow(a, opt.extended);
    std::vector<double> x0 = cfg.state.empty() ? defaults.initial : parse_list(cfg.state);
    if (x0.empty()) throw Error("no initial state: pass --state with " + std::to_string(flow.dimension()) + " values");
    auto projected = project_to_surface(NumericState{0, x0}, flow, opt);
    auto observables = model_observables(a);

    std::string schedule = cfg.schedule;
    if (schedule.empty()) schedule = defaults.schedules.empty() ? "u=zero" : defaults.schedules.front();
    if (flow.free_names().empty() && cfg.schedule.empty()) schedule.clear();

    RunConfig resolved = cfg;
    resolved.t_end = opt.t_end;
    resolved.dt = opt.dt;
    resolved.schedule = schedule;
    if (cfg.state.empty()) {
        std::ostringstream st;
        st.precision(17);
        for (std::size_t i = 0; i < x0.size(); ++i) st << (i ? "," : "") << x0[i];
        resolved.state = st.str();
    }
    Json report;
    report["config"] = resolved.to_json();
    report["model"] = a.model.name();
    report["free_multipliers"] = flow.free_names();
    report["schedule"] = USchedule::parse(schedule).to_string();
    report["dt"] = opt.dt;
    report["t_end"] = opt.t_end;

    Trajectory traj = integrate(a, projected.state, USchedule::parse(schedule), opt);
    report["summary"] = trajectory_summary(traj, projected.state, projected.iterations);

    if (!cfg.compare.empty()) {
        auto schedules = split_top_level(cfg.compare);
        if (schedules.size() < 2) throw Error("--compare needs at least two schedules separated by commas");
        Json comparisons = Json::array();
        for (std::size_t i = 1; i < schedules.size(); ++i) {
            auto cmp = gauge_orbit_compare(flow, projected.state, USchedule::parse(schedules[0]),
                                           USchedule::parse(schedules[i]), observables, opt);
            comparisons.push_back(comparison_report(cmp, schedules[0], schedules[i]));
        }
        report["comparisons"] = comparisons;
    }
    if (!cfg.csv.empty()) {
        std::ofstream f(cfg.csv, std::ios::binary);
        if (!f) throw Error("cannot write '" + cfg.csv + "'");
        write_csv(f, traj);
    }
    emit(report, cfg, out);
    return kExitOk;
}

int run_virasoro(const RunConfig& cfg, std::ostream& out) {
    if (cfg.family != "a" && cfg.family != "b") throw Error("--family must be a or b");
    if (cfg.signature != "lorentzian" && cfg.signature != "euclidean")
        throw Error("--signature must be lorentzian or euclidean");
    FockSpace space(cfg.D, cfg.K, cfg.n_max, cfg.signature == "lorentzian" ? -1 : 1);
    auto r = commutator_check(space, cfg.k, cfg.l, cfg.N, cfg.P, cfg.family == "a" ? Family::A : Family::B);
    Json report;
    report["config"] = cfg.to_json();
    report["report"] = central_term_report(r);
    report["passed"] = r.passed();
    emit(report, cfg, out);
    return r.passed() ? kExitOk : kExitCheckFailed;
}

int run_em_norm(const RunConfig& cfg, std::ostream& out) {
    if (cfg.mode.size() != 3) throw Error("--k takes three integers");
    ModeVector m{cfg.mode[0], cfg.mode[1], cfg.mode[2]};
    Vec3 k{double(m[0]), double(m[1]), double(m[2])};
    std::map<ModeVector, CVec3> omega{{m, helicity_vector(k, cfg.helicity)}};
    const double cs = em_one_photon_norm(omega, EmProduct::ChernSimons, cfg.hbar);
    const double phys = em_one_photon_norm(omega, EmProduct::Physical, cfg.hbar);
    auto ev = em_positivity_eigenvalues(k);
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    const double ev_dev = std::max({std::abs(ev[0]), std::abs(ev[1] - kn), std::abs(ev[2] - kn)});
    const bool passed = phys > 0 && ev_dev < 1e-12 && (cs < 0) == (cfg.helicity < 0);
    Json report;
    report["config"] = cfg.to_json();
    report["chern_simons"] = cs;
    report["physical"] = phys;
    report["positivity_eigenvalues"] = ev;
    report["eigenvalue_deviation"] = ev_dev;
    report["passed"] = passed;
    emit(report, cfg, out);
    return passed ? kExitOk : kExitCheckFailed;
}

int run_kg(const RunConfig& cfg, std::ostream& out) {
    auto r = kg_hermiticity_condition(parse_rational(cfg.alpha));
    Json report;
    report["config"] = cfg.to_json();
    report["report"] = kg_report(r);
    const bool passed = r.condition_holds && r.omega_rule_consistent;
    report["passed"] = passed;
    emit(report, cfg, out);
    return passed ? kExitOk : kExitCheckFailed;
}

int run_check(const RunConfig& cfg, std::ostream& out) {
    auto r = resolve_model(cfg.model);
    auto a = analyze(r.model);
    if (!a.status.converged) return kExitInconsistent;
    PropertyOptions opt;
    opt.triples = cfg.triples;
    opt.nullity_samples = cfg.nullity;
    opt.seed = cfg.seed;
    auto rep = check_bracket_properties(a, opt);
    Json report;
    report["config"] = cfg.to_json();
    report["properties"] = property_report(rep);
    emit(report, cfg, out);
    return rep.passed() ? kExitOk : kExitCheckFailed;
}

int run_catalog(const RunConfig& cfg, std::ostream& out) {
    Json report;
    report["config"] = cfg.to_json();
    report["builtins"] = builtin_names();
    if (!cfg.export_dir.empty()) {
        std::filesystem::create_directories(cfg.export_dir);
        Json files = Json::array();
        for (const auto& e : shipped_entries()) {
            auto path = std::filesystem::path(cfg.export_dir) / (e.file_stem + ".model");
            std::ofstream f(path, std::ios::binary);
            if (!f) throw Error("cannot write '" + path.string() + "'");
            f << e.source;
            files.push_back(path.filename().string());
        }
        report["exported"] = files;
    }
    emit(report, cfg, out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Constrained Hamiltonian systems: constraint analysis, dynamics and quantum checks",
                 "constraint-forge"};
    app.require_subcommand(1);
    auto global = [&](CLI::App* sub) {
        sub->add_option("--output,-o", cfg.output, "write the report to this file");
        sub->add_option("--format", cfg.format, "json or text")->check(CLI::IsMember({"json", "text"}));
        sub->add_option("--seed", cfg.seed, "seed for randomized checks");
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "run the constraint algorithm");
    global(analyze_cmd);
    analyze_cmd->add_option("--model,-m", cfg.model, "builtin:NAME or a .model file")->required();
    analyze_cmd->add_option("--max-generations", cfg.max_generations);

    auto* sim = app.add_subcommand("simulate", "integrate the total-Hamiltonian flow");
    global(sim);
    sim->add_option("--model,-m", cfg.model, "builtin:NAME or a .model file")->required();
    sim->add_option("--t-end", cfg.t_end);
    sim->add_option("--dt", cfg.dt);
    sim->add_option("--schedule", cfg.schedule, "e.g. u=sin(1,1) or u1=zero;u2=step(1,0,2)");
    sim->add_option("--compare", cfg.compare, "two or more schedules separated by commas");
    sim->add_option("--csv", cfg.csv, "write the trajectory as CSV");
    sim->add_option("--state", cfg.state, "initial state, interleaved q,p per pair");
    sim->add_option("--reproject", cfg.reproject, "project back onto the surface every N steps");
    sim->add_option("--record-every", cfg.record_every);
    sim->add_flag("--extended", cfg.extended, "use multipliers for every first-class constraint");

    auto* quantum = app.add_subcommand("quantum", "truncated Fock-space checks");
    quantum->require_subcommand(1);
    auto* vir = quantum->add_subcommand("virasoro", "string constraint commutators");
    global(vir);
    vir->add_option("--D", cfg.D);
    vir->add_option("--K", cfg.K);
    vir->add_option("--nmax", cfg.n_max);
    vir->add_option("--k", cfg.k);
    vir->add_option("--l", cfg.l);
    vir->add_option("--N", cfg.N);
    vir->add_option("--P", cfg.P, "zero-mode momentum, D values")->delimiter(',');
    vir->add_option("--family", cfg.family, "a or b");
    vir->add_option("--signature", cfg.signature, "lorentzian or euclidean");
    auto* em = quantum->add_subcommand("em-norm", "one-photon norms");
    global(em);
    em->add_option("--helicity", cfg.helicity)->check(CLI::IsMember({-1, 1}));
    em->add_option("--k", cfg.mode, "wave vector, three integers")->delimiter(',')->expected(3);
    em->add_option("--hbar", cfg.hbar);
    auto* kg = quantum->add_subcommand("kg", "Klein-Gordon scalar-product condition");
    global(kg);
    kg->add_option("--alpha", cfg.alpha, "rational ordering parameter");

    auto* check = app.add_subcommand("check", "randomized bracket property suite");
    global(check);
    check->add_option("--model,-m", cfg.model)->required();
    check->add_option("--triples", cfg.triples);
    check->add_option("--nullity", cfg.nullity);

    auto* catalog = app.add_subcommand("catalog", "list builtin models or export them as files");
    global(catalog);
    catalog->add_option("--export", cfg.export_dir, "directory for the .model files");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (analyze_cmd->parsed()) {
            cfg.subcommand = "analyze";
            return run_analyze(cfg, out);
        }
        if (sim->parsed()) {
            cfg.subcommand = "simulate";
            return run_simulate(cfg, out, err);
        }
        if (vir->parsed()) {
            cfg.subcommand = "quantum virasoro";
            return run_virasoro(cfg, out);
        }
        if (em->parsed()) {
            cfg.subcommand = "quantum em-norm";
            return run_em_norm(cfg, out);
        }
        if (kg->parsed()) {
            cfg.subcommand = "quantum kg";
            return run_kg(cfg, out);
        }
        if (check->parsed()) {
            cfg.subcommand = "check";
            return run_check(cfg, out);
        }
        cfg.subcommand = "catalog";
        return run_catalog(cfg, out);
    } catch (const BlowUp& e) {
        err << e.what() << '\n';
        return kExitBlowUp;
    } catch (const ProjectionFailure& e) {
        err << e.what() << '\n';
        return kExitBlowUp;
    } catch (const InconsistentSystem& e) {
        err << e.what() << '\n';
        return kExitInconsistent;
    } catch (const AnalysisError& e) {
        err << e.what() << '\n';
        return kExitInconsistent;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace cforge
