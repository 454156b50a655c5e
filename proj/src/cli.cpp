#include "loadshare/cli.hpp"

#include "loadshare/error.hpp"
#include "loadshare/estimator.hpp"
#include "loadshare/io.hpp"
#include "loadshare/oracle.hpp"
#include "loadshare/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

namespace loadshare {

namespace {

constexpr double kVerifyParamTol = 1e-6;
constexpr double kVerifyLoglikTol = 1e-9;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidModelSpec:
        case ErrorKind::InvalidParams:
        case ErrorKind::InvalidSampleSize:
            return kExitUsageError;
        default:
            return kExitDataError;
    }
}

struct ModelFlags {
    std::string model;
    CLI::Option* model_opt = nullptr;
    std::size_t s = 0;
    CLI::Option* s_opt = nullptr;

    void add_to(CLI::App& cmd) {
        model_opt = cmd.add_option("--model", model, "Load-sharing model")
                        ->check(CLI::IsMember({"kim-kvam", "ssk"}));
        s_opt = cmd.add_option("--s", s, "Switch index of the SSK model (2 <= s <= k-1)");
    }

    ModelKind kind() const {
        if (model_opt->count() == 0) throw UsageError("--model is required");
        return parse_model_kind(model);
    }

    // Checks flag combinations that do not depend on k.
    ModelKind checked_kind() const {
        const ModelKind kind = this->kind();
        if (kind == ModelKind::KimKvam && s_opt->count() > 0) throw UsageError("--s only applies to --model ssk");
        if (kind == ModelKind::SSK && s_opt->count() == 0) throw UsageError("--model ssk requires --s");
        return kind;
    }

    ModelSpec spec(std::size_t k) const {
        return checked_kind() == ModelKind::KimKvam ? ModelSpec::kim_kvam(k) : ModelSpec::ssk(k, s);
    }
};

struct TruthFlags {
    ModelFlags model;
    std::size_t k = 0;
    CLI::Option* k_opt = nullptr;
    double theta = 0.0;
    CLI::Option* theta_opt = nullptr;
    std::vector<double> lambda;
    CLI::Option* lambda_opt = nullptr;
    std::string params_file;

    void add_to(CLI::App& cmd) {
        model.add_to(cmd);
        k_opt = cmd.add_option("--k", k, "Number of components (k >= 2)");
        theta_opt = cmd.add_option("--theta", theta, "Initial failure rate");
        lambda_opt = cmd.add_option("--lambda", lambda, "Load-share multipliers lambda_1..lambda_{k-1}")
                         ->delimiter(',');
        auto* file = cmd.add_option("--params", params_file, "JSON params file instead of the flags above")
                         ->check(CLI::ExistingFile);
        for (auto* opt : {model.model_opt, model.s_opt, k_opt, theta_opt, lambda_opt}) file->excludes(opt);
    }

    ParamsFile resolve() const {
        if (!params_file.empty()) return read_params_file(params_file);
        if (k_opt->count() == 0) throw UsageError("--k is required");
        if (theta_opt->count() == 0) throw UsageError("--theta is required");
        ModelSpec spec = model.spec(k);
        if (lambda_opt->count() == 0) throw UsageError("--lambda is required");
        if (lambda.size() != k - 1) {
            throw UsageError("--lambda must list k-1 = " + std::to_string(k - 1) + " values, got " +
                             std::to_string(lambda.size()));
        }
        return ParamsFile{spec, Params(theta, lambda)};
    }
};

std::string json_array(std::span<const double> values) {
    std::string out = "[";
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j > 0) out += ',';
        out += format_number(values[j]);
    }
    return out + "]";
}

std::string text_list(std::span<const double> values) {
    std::string out;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (j > 0) out += ' ';
        out += format_number(values[j]);
    }
    return out;
}

std::string json_model_fields(const ModelSpec& spec) {
    std::string out = "\"model\":\"" + std::string(to_string(spec.kind())) + "\",\"k\":" + std::to_string(spec.k());
    if (spec.s()) out += ",\"s\":" + std::to_string(*spec.s());
    return out;
}

std::string text_model_line(const ModelSpec& spec) {
    std::string out = "model: " + std::string(to_string(spec.kind())) + "\nk: " + std::to_string(spec.k()) + "\n";
    if (spec.s()) out += "s: " + std::to_string(*spec.s()) + "\n";
    return out;
}

std::string parameter_name(std::size_t q) {
    return q == 0 ? "theta" : "lambda_" + std::to_string(q);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const TruthFlags& truth_flags, std::size_t n, std::uint64_t seed, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
    const ParamsFile truth = truth_flags.resolve();
    Rng rng(seed);
    const SpacingsMatrix data = sample_dataset(truth.spec, truth.params, n, rng);
    const std::string csv = format_dataset(data);
    if (out_path.empty() || out_path == "-") {
        out << csv;
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) {
            err << "error: cannot write '" << out_path << "'\n";
            return kExitDataError;
        }
        file << csv;
    }
    err << "simulate: n=" << n << " k=" << truth.spec.k() << " seed=" << seed << "\n";
    return kExitOk;
}

int cmd_fit(const ModelFlags& model, const std::string& data_path, bool lifetimes, const std::string& format,
            std::ostream& out) {
    model.checked_kind();  // flag errors take precedence over data errors
    const Dataset dataset = read_dataset_file(data_path, lifetimes);
    const ModelSpec spec = model.spec(dataset.spacings.k());
    const FitResult fit = closed_form_mle(spec, dataset.spacings);

    if (format == "json") {
        out << "{" << json_model_fields(spec) << ",\"n\":" << fit.n
            << ",\"theta_hat\":" << format_number(fit.params_hat.theta())
            << ",\"lambda_hat\":" << json_array(fit.params_hat.lambdas())
            << ",\"loglik\":" << format_number(fit.loglik_at_mle) << "}\n";
    } else {
        out << text_model_line(spec) << "n: " << fit.n << "\n"
            << "theta_hat: " << format_number(fit.params_hat.theta()) << "\n"
            << "lambda_hat: " << text_list(fit.params_hat.lambdas()) << "\n"
            << "loglik: " << format_number(fit.loglik_at_mle) << "\n";
    }
    return kExitOk;
}

struct VerifyRow {
    ModelSpec spec;
    std::size_t n;
    FitResult closed;
    std::optional<FitResult> numeric;
    std::string failure;
    double discrepancy = 0.0;
    double gap = 0.0;
    bool pass = false;
};

VerifyRow verify_instance(const ModelSpec& spec, const SpacingsMatrix& data, const OracleConfig& cfg) {
    VerifyRow row{spec, data.n(), closed_form_mle(spec, data), std::nullopt, {}, 0.0, 0.0, false};
    try {
        row.numeric = numeric_mle(spec, data, cfg);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence) throw;
        row.failure = e.what();
        return row;
    }
    const auto c = row.closed.params_hat.as_vector();
    const auto o = row.numeric->params_hat.as_vector();
    for (std::size_t q = 0; q < c.size(); ++q) {
        row.discrepancy = std::max(row.discrepancy, std::abs(o[q] - c[q]) / std::abs(c[q]));
    }
    row.gap = std::abs(row.numeric->loglik_at_mle - row.closed.loglik_at_mle);
    row.pass = row.discrepancy <= kVerifyParamTol && row.gap <= kVerifyLoglikTol;
    return row;
}

int cmd_verify(const ModelFlags& model, const std::string& data_path, bool lifetimes, bool random,
               std::size_t instances, std::uint64_t seed, const std::string& format, const OracleConfig& cfg,
               std::ostream& out) {
    cfg.validate();
    const ModelKind kind = model.kind();
    if (random && kind == ModelKind::KimKvam && model.s_opt->count() > 0) {
        throw UsageError("--s only applies to --model ssk");
    }
    if (!random) model.checked_kind();
    if (random == !data_path.empty()) throw UsageError("give exactly one of --data or --random");

    std::vector<VerifyRow> rows;
    if (random) {
        if (instances == 0) throw UsageError("--instances must be >= 1");
        RandomInstanceOptions options;
        if (kind == ModelKind::SSK && model.s_opt->count() > 0) {
            ModelSpec::ssk(std::max<std::size_t>(model.s + 1, 3), model.s);  // validates s
            options.fixed_s = model.s;
        }
        for (std::size_t i = 0; i < instances; ++i) {
            const RandomInstance inst = random_instance(kind, seed, i, options);
            rows.push_back(verify_instance(inst.spec, inst.data, cfg));
        }
    } else {
        const Dataset dataset = read_dataset_file(data_path, lifetimes);
        rows.push_back(verify_instance(model.spec(dataset.spacings.k()), dataset.spacings, cfg));
    }

    const auto passed = static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.pass; }));
    if (format == "json") {
        out << "{\"instances\":[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const VerifyRow& r = rows[i];
            if (i > 0) out << ",";
            out << "{\"index\":" << i + 1 << "," << json_model_fields(r.spec) << ",\"n\":" << r.n
                << ",\"closed_form\":" << json_array(r.closed.params_hat.as_vector())
                << ",\"closed_form_loglik\":" << format_number(r.closed.loglik_at_mle);
            if (r.numeric) {
                out << ",\"oracle\":" << json_array(r.numeric->params_hat.as_vector())
                    << ",\"oracle_loglik\":" << format_number(r.numeric->loglik_at_mle)
                    << ",\"sweeps\":" << r.numeric->iterations
                    << ",\"max_rel_discrepancy\":" << format_number(r.discrepancy)
                    << ",\"loglik_gap\":" << format_number(r.gap);
            } else {
                out << ",\"error\":\"NoConvergence\"";
            }
            out << ",\"pass\":" << (r.pass ? "true" : "false") << "}";
        }
        out << "],\"passed\":" << passed << ",\"total\":" << rows.size() << "}\n";
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const VerifyRow& r = rows[i];
            out << "instance " << i + 1 << ": model=" << to_string(r.spec.kind()) << " k=" << r.spec.k();
            if (r.spec.s()) out << " s=" << *r.spec.s();
            out << " n=" << r.n << "\n";
            out << "  closed-form: " << text_list(r.closed.params_hat.as_vector())
                << "  loglik=" << format_number(r.closed.loglik_at_mle) << "\n";
            if (r.numeric) {
                out << "  oracle:      " << text_list(r.numeric->params_hat.as_vector())
                    << "  loglik=" << format_number(r.numeric->loglik_at_mle)
                    << "  sweeps=" << r.numeric->iterations << "\n";
                out << "  max_rel_discrepancy=" << format_number(r.discrepancy)
                    << " loglik_gap=" << format_number(r.gap) << " " << (r.pass ? "PASS" : "FAIL") << "\n";
            } else {
                out << "  oracle: " << r.failure << " FAIL\n";
            }
        }
        out << "summary: " << passed << "/" << rows.size()
            << " passed (tolerances: parameters 1e-6 relative, loglik 1e-9 absolute)\n";
    }
    return passed == rows.size() ? kExitOk : kExitVerificationFailed;
}

int cmd_mc_study(const TruthFlags& truth_flags, std::size_t n, std::size_t reps, std::uint64_t seed,
                 unsigned threads, const std::string& format, std::ostream& out) {
    const ParamsFile truth = truth_flags.resolve();
    if (n < 2) throw UsageError("--n must be >= 2 (the mean of theta_hat is infinite at n = 1)");
    if (reps < 1) throw UsageError("--reps must be >= 1");
    const McSummary summary = mc_study(truth.spec, truth.params, n, reps, seed, threads);
    const std::vector<double> target = truth.params.as_vector();
    const double inflation = static_cast<double>(n) / static_cast<double>(n - 1);

    if (format == "json") {
        out << "{" << json_model_fields(truth.spec) << ",\"n\":" << n << ",\"reps\":" << reps << ",\"seed\":" << seed
            << ",\"parameters\":[";
        for (std::size_t q = 0; q < target.size(); ++q) {
            if (q > 0) out << ",";
            out << "{\"name\":\"" << parameter_name(q) << "\",\"truth\":" << format_number(target[q])
                << ",\"mean\":" << format_number(summary.mean_estimates[q])
                << ",\"bias\":" << format_number(summary.bias[q]) << ",\"mse\":" << format_number(summary.mse[q])
                << ",\"std_error\":" << format_number(summary.std_error[q])
                << ",\"reference_mean\":" << format_number(inflation * target[q]) << "}";
        }
        out << "]}\n";
    } else {
        out << text_model_line(truth.spec) << "n: " << n << "\nreps: " << reps << "\nseed: " << seed << "\n";
        out << "parameter truth mean bias mse std_error reference_mean\n";
        for (std::size_t q = 0; q < target.size(); ++q) {
            out << parameter_name(q) << " " << format_number(target[q]) << " "
                << format_number(summary.mean_estimates[q]) << " " << format_number(summary.bias[q]) << " "
                << format_number(summary.mse[q]) << " " << format_number(summary.std_error[q]) << " "
                << format_number(inflation * target[q]) << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed-form and numeric MLE for k-component load-sharing systems", "loadshare"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Simulate spacings and write them as CSV");
    TruthFlags sim_truth;
    sim_truth.add_to(*simulate);
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    simulate->add_option("--n", sim_n, "Number of systems")->required();
    simulate->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output CSV path (default: stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "Closed-form MLE for a dataset");
    ModelFlags fit_model;
    fit_model.add_to(*fit);
    std::string fit_data;
    bool fit_lifetimes = false;
    std::string fit_format = "text";
    fit->add_option("--data", fit_data, "Dataset CSV")->required();
    fit->add_flag("--lifetimes", fit_lifetimes, "Read a headerless file as raw component lifetimes");
    fit->add_option("--format", fit_format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

    // verify
    auto* verify = app.add_subcommand("verify", "Compare the closed form against the numeric maximizer");
    ModelFlags verify_model;
    verify_model.add_to(*verify);
    std::string verify_data;
    bool verify_lifetimes = false;
    bool verify_random = false;
    std::size_t verify_instances = 50;
    std::uint64_t verify_seed = 0;
    std::string verify_format = "text";
    OracleConfig verify_cfg;
    verify->add_option("--data", verify_data, "Dataset CSV");
    verify->add_flag("--lifetimes", verify_lifetimes, "Read a headerless file as raw component lifetimes");
    verify->add_flag("--random", verify_random, "Verify on seeded random instances");
    verify->add_option("--instances", verify_instances, "Number of random instances")->capture_default_str();
    verify->add_option("--seed", verify_seed, "Random seed")->capture_default_str();
    verify->add_option("--format", verify_format, "Output format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    verify->add_option("--max-iters", verify_cfg.max_iters, "Oracle sweep limit")->capture_default_str();
    verify->add_option("--tol", verify_cfg.tol, "Oracle relative-change tolerance")->capture_default_str();

    // mc-study
    auto* mc = app.add_subcommand("mc-study", "Monte Carlo parameter-recovery study");
    TruthFlags mc_truth;
    mc_truth.add_to(*mc);
    std::size_t mc_n = 0;
    std::size_t mc_reps = 0;
    std::uint64_t mc_seed = 0;
    unsigned mc_threads = 0;
    std::string mc_format = "text";
    mc->add_option("--n", mc_n, "Systems per replicate (>= 2)")->required();
    mc->add_option("--reps", mc_reps, "Number of replicates")->required();
    mc->add_option("--seed", mc_seed, "Master seed")->capture_default_str();
    mc->add_option("--threads", mc_threads, "Worker threads (0 = all cores); output does not depend on it")
        ->capture_default_str();
    mc->add_option("--format", mc_format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsageError;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_truth, sim_n, sim_seed, sim_out, out, err);
        if (fit->parsed()) return cmd_fit(fit_model, fit_data, fit_lifetimes, fit_format, out);
        if (verify->parsed()) {
            return cmd_verify(verify_model, verify_data, verify_lifetimes, verify_random, verify_instances,
                              verify_seed, verify_format, verify_cfg, out);
        }
        if (mc->parsed()) return cmd_mc_study(mc_truth, mc_n, mc_reps, mc_seed, mc_threads, mc_format, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    return kExitUsageError;
}

}  // namespace loadshare
