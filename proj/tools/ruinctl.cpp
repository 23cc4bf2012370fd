// ruinctl: command-line front end for the resampled ruin model.
//
//   ruinctl validate    --model m.json
//   ruinctl asymptotics --model m.json [--u 175 ...] [--spectrum-csv out.csv]
//   ruinctl bound       --model m.json [--u 175 ...]
//   ruinctl simulate    --model m.json --u 175 [--runs N --seed S --method is|crude --jobs J]
//   ruinctl table       --which 1|2 [--model m.json --runs N --seed S --jobs J]
//
// Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ruin/ruin.hpp"

#ifndef RUIN_DEFAULT_TABLE_CONFIG
#define RUIN_DEFAULT_TABLE_CONFIG "configs/paper_table.json"
#endif

namespace {

using nlohmann::json;

enum class Format { Json, Csv };

struct Globals {
    Format format = Format::Json;
    bool quiet = false;
};

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

// JSON has no infinity; unbounded quantities are written as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void emit(const json& doc) { std::cout << doc.dump(2) << '\n'; }

void progress(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << std::endl;
}

ruin::RiskModel load_valid(const std::string& path) {
    ruin::RiskModel model = ruin::load_model(path);
    ruin::require_valid(model);
    return model;
}

int cmd_validate(const Globals& g, const std::string& path) {
    const ruin::RiskModel model = ruin::load_model(path);
    const ruin::ValidationReport report = ruin::validate(model);
    if (g.format == Format::Csv) {
        std::cout << "status,detail\n" << (report.ok() ? "valid," : "invalid,\"" + report.summary() + "\"") << '\n';
    } else {
        json doc{{"status", report.ok() ? "valid" : "invalid"}, {"violations", report.violations}};
        if (report.ok()) {
            doc["kappa"] = ruin::mean_drift(model);
            doc["omega_max"] = finite_or_null(ruin::domain_bound(model));
        }
        emit(doc);
    }
    if (!report.ok()) {
        std::cerr << "invalid model: " << report.summary() << '\n';
        return 1;
    }
    return 0;
}

struct SpectrumOptions {
    std::string path;
    std::optional<double> lo;
    std::optional<double> hi;
    std::size_t points = 201;
};

void write_spectrum(const ruin::RiskModel& model, const ruin::AsymptoticResult& res, const SpectrumOptions& opt) {
    // default window: from just past -omega* to beyond the largest determinant zero
    const double top = res.det_roots.empty() ? 1.0 : res.det_roots.back();
    const double lo = opt.lo.value_or(std::max(-1.5 * res.omega_star, -(1.0 - 1e-6) * ruin::domain_bound(model)));
    const double hi = opt.hi.value_or(1.25 * top);
    if (!(hi > lo)) throw ruin::ValidationError("spectrum window needs alpha-max > alpha-min");
    std::ofstream out(opt.path);
    if (!out) throw ruin::IoError("cannot write spectrum file: " + opt.path);
    out << "alpha";
    for (std::size_t k = 0; k < model.dim(); ++k) out << ",theta_" << k + 1;
    out << '\n';
    for (const auto& pt : ruin::spectrum_curve(model, lo, hi, opt.points)) {
        out << num(pt.alpha);
        for (double t : pt.theta) out << ',' << num(t);
        out << '\n';
    }
    if (!out) throw ruin::IoError("error writing spectrum file: " + opt.path);
}

int cmd_asymptotics(const Globals& g, const std::string& path, const std::vector<double>& levels,
                    const SpectrumOptions& spec) {
    const ruin::RiskModel model = load_valid(path);
    const ruin::AsymptoticResult res = ruin::cramer_constant(model);
    if (!spec.path.empty()) write_spectrum(model, res, spec);
    // a single state has no positive zero of det M
    const double a_star = res.det_roots.empty() ? std::nan("") : res.det_roots.front();

    if (g.format == Format::Csv) {
        std::cout << "u,omega_star,alpha_star,kappa,A,approx\n";
        for (double u : levels) {
            std::cout << num(u) << ',' << num(res.omega_star) << ',' << (std::isnan(a_star) ? "" : num(a_star)) << ','
                      << num(res.kappa) << ',' << num(res.A) << ',' << num(ruin::approx_ruin_probability(res, u).value)
                      << '\n';
        }
        return 0;
    }
    json doc{{"omega_star", res.omega_star},
             {"alpha_star", finite_or_null(a_star)},
             {"kappa", res.kappa},
             {"A", res.A},
             {"theta_prime", res.theta_prime},
             {"pi_bar", res.pi_bar},
             {"det_roots", res.det_roots}};
    json values = json::array();
    for (double u : levels) {
        const ruin::ApproxRuin a = ruin::approx_ruin_probability(res, u);
        values.push_back({{"u", u}, {"approx", a.value}, {"clamped", a.clamped}});
    }
    doc["values"] = values;
    emit(doc);
    return 0;
}

int cmd_bound(const Globals& g, const std::string& path, const std::vector<double>& levels) {
    const ruin::RiskModel model = load_valid(path);
    const ruin::TwistedModel tw = ruin::twist_model(model);
    if (g.format == Format::Csv) {
        std::cout << "u,omega_star,Omega,bound\n";
        for (double u : levels)
            std::cout << num(u) << ',' << num(tw.omega_star) << ',' << num(tw.omega_big) << ','
                      << num(ruin::lundberg_bound(tw, u)) << '\n';
        return 0;
    }
    json bounds = json::array();
    for (double u : levels) bounds.push_back({{"u", u}, {"bound", ruin::lundberg_bound(tw, u)}});
    emit({{"omega_star", tw.omega_star}, {"gamma", tw.gamma}, {"Omega", tw.omega_big}, {"bounds", bounds}});
    return 0;
}

json estimate_json(const ruin::Estimate& e, double u) {
    return {{"u", u},
            {"mean", e.mean},
            {"se", e.std_error},
            {"ci", {e.ci_low, e.ci_high}},
            {"runs", e.runs},
            {"rel_err", finite_or_null(e.relative_error)},
            {"method", ruin::method_name(e.method)},
            {"seed", e.seed}};
}

int cmd_simulate(const Globals& g, const std::string& path, double u, const ruin::EstimateOptions& opt) {
    const ruin::RiskModel model = load_valid(path);
    progress(g, "simulate: " + std::to_string(opt.runs) + " " + ruin::method_name(opt.method) + " runs at u = " + num(u));
    const ruin::Estimate e = ruin::estimate(model, u, opt);
    if (g.format == Format::Csv) {
        std::cout << "u,mean,se,ci_low,ci_high,runs,rel_err,method,seed\n"
                  << num(u) << ',' << num(e.mean) << ',' << num(e.std_error) << ',' << num(e.ci_low) << ','
                  << num(e.ci_high) << ',' << e.runs << ',' << num(e.relative_error) << ','
                  << ruin::method_name(e.method) << ',' << e.seed << '\n';
    } else {
        emit(estimate_json(e, u));
    }
    return 0;
}

struct TableRow {
    double q, u, exact, exact_se, thm31, thm42, no_modulation;
};

int cmd_table(const Globals& g, int which, const std::string& path, const ruin::EstimateOptions& opt) {
    const ruin::RiskModel base = load_valid(path);
    std::vector<std::pair<double, double>> cells;  // (q, u)
    if (which == 1) {
        for (int i = -2; i <= 2; ++i) cells.emplace_back(3.0 * std::pow(4.0, i), 175.0);
    } else {
        for (double u : {175.0, 162.5, 150.0, 137.5, 125.0}) cells.emplace_back(base.q, u);
    }

    // Ignoring resampling gives one Levy process whatever q is.
    const ruin::TwistedModel flat = ruin::twist_model(ruin::averaged_model(base));

    std::vector<TableRow> rows;
    for (const auto& [q, u] : cells) {
        ruin::RiskModel model = base;
        model.q = q;
        ruin::require_valid(model);
        const ruin::AsymptoticResult res = ruin::cramer_constant(model);
        const ruin::TwistedModel tw = ruin::twist_model(model, res.omega_star);
        progress(g, "table: q = " + num(q) + ", u = " + num(u));
        const ruin::Estimate exact = ruin::estimate(tw, u, opt);
        const ruin::Estimate flat_est = ruin::estimate(flat, u, opt);
        rows.push_back({q, u, exact.mean, exact.std_error, ruin::approx_ruin_probability(res, u).value,
                        ruin::lundberg_bound(tw, u), flat_est.mean});
    }

    if (g.format == Format::Csv) {
        std::cout << "q,u,exact,exact_se,thm31,thm42,no_modulation\n";
        for (const TableRow& r : rows)
            std::cout << num(r.q) << ',' << num(r.u) << ',' << num(r.exact) << ',' << num(r.exact_se) << ','
                      << num(r.thm31) << ',' << num(r.thm42) << ',' << num(r.no_modulation) << '\n';
        return 0;
    }
    json out = json::array();
    for (const TableRow& r : rows)
        out.push_back({{"q", r.q},
                       {"u", r.u},
                       {"exact", r.exact},
                       {"exact_se", r.exact_se},
                       {"thm31", r.thm31},
                       {"thm42", r.thm42},
                       {"no_modulation", r.no_modulation}});
    emit(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ruin probabilities for a Levy risk model in a resampled environment"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    Globals g;
    const std::map<std::string, Format> formats{{"json", Format::Json}, {"csv", Format::Csv}};
    app.add_option("--format", g.format, "output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    app.add_flag("--quiet", g.quiet, "no progress messages on stderr");

    std::string model_path;
    std::vector<double> levels{175.0};
    ruin::EstimateOptions opt;
    double u = 175.0;
    int which = 1;
    SpectrumOptions spec;
    double alpha_lo = 0.0, alpha_hi = 0.0;

    const std::map<std::string, ruin::Method> methods{{"is", ruin::Method::ImportanceSampling},
                                                      {"crude", ruin::Method::Crude}};

    auto* validate = app.add_subcommand("validate", "check a model file");
    validate->add_option("--model", model_path, "model JSON")->required();

    auto* asym = app.add_subcommand("asymptotics", "omega*, A and A exp(-omega* u)");
    asym->add_option("--model", model_path, "model JSON")->required();
    asym->add_option("--u", levels, "initial reserves")->check(CLI::NonNegativeNumber);
    asym->add_option("--spectrum-csv", spec.path, "write the eigenvalue curves to this file");
    auto* lo_opt = asym->add_option("--alpha-min", alpha_lo, "spectrum window start");
    auto* hi_opt = asym->add_option("--alpha-max", alpha_hi, "spectrum window end");
    asym->add_option("--points", spec.points, "spectrum grid size")->check(CLI::Range(2, 1000000));

    auto* bound = app.add_subcommand("bound", "Lundberg-type bound Omega exp(-omega* u)");
    bound->add_option("--model", model_path, "model JSON")->required();
    bound->add_option("--u", levels, "initial reserves")->check(CLI::NonNegativeNumber);

    auto add_run_options = [&](CLI::App* sub) {
        sub->add_option("--runs", opt.runs, "number of runs")->check(CLI::Range(2, 1000000000));
        sub->add_option("--seed", opt.seed, "base seed");
        sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 1024));
    };

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of the ruin probability");
    sim->add_option("--model", model_path, "model JSON")->required();
    sim->add_option("--u", u, "initial reserve")->required()->check(CLI::PositiveNumber);
    sim->add_option("--method", opt.method, "is or crude")
        ->transform(CLI::CheckedTransformer(methods, CLI::ignore_case));
    add_run_options(sim);

    auto* table = app.add_subcommand("table", "regenerate the q-sweep (1) or u-sweep (2) table");
    table->add_option("--which", which, "1: vary q at u = 175, 2: vary u at the model's q")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    model_path = RUIN_DEFAULT_TABLE_CONFIG;
    table->add_option("--model", model_path, "model JSON (default: bundled table config)");
    opt.runs = 10000;
    add_run_options(table);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (lo_opt->count() > 0) spec.lo = alpha_lo;
    if (hi_opt->count() > 0) spec.hi = alpha_hi;
    if (*table && table->get_option("--runs")->count() == 0) opt.runs = 200000;

    try {
        if (*validate) return cmd_validate(g, model_path);
        if (*asym) return cmd_asymptotics(g, model_path, levels, spec);
        if (*bound) return cmd_bound(g, model_path, levels);
        if (*sim) return cmd_simulate(g, model_path, u, opt);
        if (*table) return cmd_table(g, which, model_path, opt);
    } catch (const ruin::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ruin::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
