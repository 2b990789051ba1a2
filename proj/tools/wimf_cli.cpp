// Command-line front end: generate, factorize, evaluate, filter-response, benchmark.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wimf/wimf.hpp"

namespace fs = std::filesystem;
using namespace wimf;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::string fmt(double x) { return format_double(x); }

double parse_snr(const std::string& s) { return parse_double(s); }

// Lowest SNR row of the paper's tables for each dataset.
double lowest_snr(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::homogeneous: return -11.84;
        case DatasetKind::inhomogeneous: return -13.09;
        case DatasetKind::traveling: return -11.73;
        case DatasetKind::segmented: return -11.56;
    }
    return 0.0;
}

struct GridOptions {
    std::string preset = "table";
    std::string sampling = "interior";
    std::optional<double> delta_l, length_l, delta_t, length_t;

    void add(CLI::App* app) {
        app->add_option("--grid", preset, "Grid preset: table or dense")->check(CLI::IsMember({"table", "dense"}));
        app->add_option("--sampling", sampling, "Spatial sampling: interior or step")
            ->check(CLI::IsMember({"interior", "step"}));
        app->add_option("--delta-l", delta_l, "Override spatial step");
        app->add_option("--length-l", length_l, "Override spatial length");
        app->add_option("--delta-t", delta_t, "Override time step");
        app->add_option("--length-t", length_t, "Override duration");
    }

    Grid resolve(DatasetKind kind) const {
        Grid g = table_grid(kind, parse_preset(preset));
        g.sampling = parse_sampling(sampling);
        if (delta_l) g.delta_l = *delta_l;
        if (length_l) g.length_l = *length_l;
        if (delta_t) g.delta_t = *delta_t;
        if (length_t) g.length_t = *length_t;
        g.validate();
        return g;
    }
};

void record_grid(KeyValues& kv, const Grid& g, const std::string& preset) {
    kv["grid"] = preset;
    kv["sampling"] = to_string(g.sampling);
    kv["delta-l"] = fmt(g.delta_l);
    kv["length-l"] = fmt(g.length_l);
    kv["delta-t"] = fmt(g.delta_t);
    kv["length-t"] = fmt(g.length_t);
    kv["n_d"] = std::to_string(g.n_d());
    kv["n_t"] = std::to_string(g.n_t());
}

struct SolverOptions {
    double epsilon = 1e-2;
    int max_outer = 200;
    int max_inner = 10000;
    std::string descent = "exact";
    int coarse = 200;
    int refine = 200;
    int levels = 4;
    int candidates = 4;
    bool no_anchors = false;
    std::optional<double> stationarity_tol;

    void add(CLI::App* app) {
        app->add_option("--epsilon", epsilon, "Polar-gap stopping tolerance")->check(CLI::PositiveNumber);
        app->add_option("--max-outer", max_outer, "Outer-iteration cap")->check(CLI::PositiveNumber);
        app->add_option("--max-inner", max_inner, "Inner-descent pass cap")->check(CLI::PositiveNumber);
        app->add_option("--descent", descent, "Inner descent: exact or gradient")
            ->check(CLI::IsMember({"exact", "gradient"}));
        app->add_option("--coarse-points", coarse, "Coarse line-search points")->check(CLI::Range(2, 1000000));
        app->add_option("--refine-points", refine, "Points per refinement level")->check(CLI::Range(2, 1000000));
        app->add_option("--refine-levels", levels, "Refinement levels")->check(CLI::NonNegativeNumber);
        app->add_option("--candidates", candidates, "Coarse peaks refined")->check(CLI::PositiveNumber);
        app->add_flag("--no-anchors", no_anchors, "Do not add -eigenvalues to the coarse grid");
        app->add_option("--stationarity-tol", stationarity_tol, "Absolute gradient tolerance");
    }

    SolverConfig resolve() const {
        SolverConfig c;
        c.epsilon = epsilon;
        c.max_outer_iters = max_outer;
        c.max_inner_iters = max_inner;
        c.descent = descent == "gradient" ? DescentMethod::gradient : DescentMethod::exact_block;
        c.line_search.coarse_points = coarse;
        c.line_search.refine_points = refine;
        c.line_search.refine_levels = levels;
        c.line_search.candidates = candidates;
        c.line_search.eigenvalue_anchors = !no_anchors;
        c.stationarity_tol = stationarity_tol;
        return c;
    }

    void record(KeyValues& kv) const {
        kv["epsilon"] = fmt(epsilon);
        kv["max-outer"] = std::to_string(max_outer);
        kv["max-inner"] = std::to_string(max_inner);
        kv["descent"] = descent;
        kv["coarse-points"] = std::to_string(coarse);
        kv["refine-points"] = std::to_string(refine);
        kv["refine-levels"] = std::to_string(levels);
        kv["candidates"] = std::to_string(candidates);
        if (no_anchors) kv["no-anchors"] = "true";
        if (stationarity_tol) kv["stationarity-tol"] = fmt(*stationarity_tol);
    }
};

// ---------------------------------------------------------------- generate

struct GenerateCmd {
    std::string kind;
    std::string snr = "inf";
    std::uint64_t seed = 0;
    std::string out;
    std::optional<double> delta;
    bool randomize_ab = false;
    GridOptions grid;

    void add(CLI::App* app) {
        app->add_option("--kind", kind, "homogeneous | inhomogeneous | traveling | segmented")->required();
        app->add_option("--snr", snr, "SNR in dB, or inf");
        app->add_option("--seed", seed, "Seed for parameter draws and noise");
        app->add_option("--out", out, "Output directory (env WIMF_OUT)");
        app->add_option("--delta", delta, "Bandwidth factor recorded for the gamma rule");
        app->add_flag("--randomize-ab", randomize_ab, "Draw a_n, b_n from U[-1,1]");
        grid.add(app);
    }

    int run() const {
        const DatasetKind k = parse_kind(kind);
        const Grid g = grid.resolve(k);
        GeneratorParams p = table_params(k, seed, randomize_ab);
        if (delta) p.delta = *delta;
        const double snr_db = parse_snr(snr);
        const Dataset clean = generate(g, p);
        const Dataset ds = add_noise(clean, snr_db, noise_seed(seed));

        const fs::path dir = out.empty() ? fs::path(env_or("WIMF_OUT", ".")) : fs::path(out);
        write_matrix_csv(dir / "Y.csv", ds.Y);
        write_matrix_csv(dir / "truth.csv", ds.truth);

        KeyValues kv;
        kv["command"] = "generate";
        kv["kind"] = to_string(k);
        kv["snr"] = fmt(snr_db);
        kv["seed"] = std::to_string(seed);
        kv["noise_seed"] = std::to_string(noise_seed(seed));
        kv["delta"] = fmt(p.delta);
        kv["n_modes"] = std::to_string(p.n_modes);
        kv["truth_modes"] = std::to_string(ds.truth.cols());
        kv["alpha"] = join_doubles(p.alpha);
        kv["beta"] = join_doubles(p.beta);
        kv["k"] = join_doubles(p.k);
        kv["omega"] = join_doubles(p.omega);
        kv["a"] = join_doubles(p.a);
        kv["b"] = join_doubles(p.b);
        if (randomize_ab) kv["randomize-ab"] = "true";
        kv["out"] = dir.string();
        record_grid(kv, g, grid.preset);
        write_key_values(dir / "meta.cfg", kv);

        std::cout << "Y: " << ds.Y.rows() << " x " << ds.Y.cols() << "\n"
                  << "ground-truth modes: " << ds.truth.cols() << "\n"
                  << "wrote " << (dir / "Y.csv").string() << ", truth.csv, meta.cfg\n";
        return 0;
    }
};

// --------------------------------------------------------------- factorize

struct FactorizeCmd {
    std::string in = ".";
    std::string out;
    std::optional<double> lambda, gamma, delta;
    std::optional<int> max_modes;
    std::uint64_t seed = 0;
    SolverOptions solver;

    void add(CLI::App* app) {
        app->add_option("--in", in, "Dataset directory holding Y.csv (and meta.cfg)");
        app->add_option("--out", out, "Output directory (env WIMF_OUT; defaults to --in)");
        app->add_option("--lambda", lambda, "Override lambda (default 0.75 sigma_N(Y))")->check(CLI::PositiveNumber);
        app->add_option("--gamma", gamma, "Override gamma (default delta (M/pi)^2)")->check(CLI::NonNegativeNumber);
        app->add_option("--delta", delta, "Bandwidth factor for the gamma rule")->check(CLI::PositiveNumber);
        app->add_option("--max-modes", max_modes, "Mode cap N")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Recorded for reproducibility");
        solver.add(app);
    }

    int run() const {
        const fs::path src(in);
        const MatrixXd Y = read_matrix_csv(src / "Y.csv");
        if (Y.size() == 0) throw DataError("Y.csv is empty");
        if (!Y.allFinite()) throw DataError("Y.csv has non-finite entries");
        KeyValues meta;
        if (fs::exists(src / "meta.cfg")) meta = read_key_values(src / "meta.cfg");

        std::optional<Index> N;
        if (max_modes) N = *max_modes;
        else if (meta.count("truth_modes")) N = std::stol(meta.at("truth_modes"));
        if (N) N = std::min<Index>(*N, std::min(Y.rows(), Y.cols()));

        double lam = 0.0;
        if (lambda) {
            lam = *lambda;
        } else {
            if (!N) throw InvalidArgument("need --lambda or --max-modes (or a meta.cfg with truth_modes)");
            const LambdaRule r = lambda_rule(Y, *N);
            if (r.rank_deficient) std::cerr << "warning: Y has rank " << r.rank << " < N\n";
            lam = r.value;
        }
        const double dlt = delta ? *delta : meta.count("delta") ? parse_double(meta.at("delta")) : 1.0;
        const double gam = gamma ? *gamma : gamma_rule(Y.rows(), dlt);

        SolverConfig cfg = solver.resolve();
        if (N) cfg.max_modes = static_cast<int>(*N);
        cfg.seed = seed;

        const fs::path dir = out.empty() ? fs::path(env_or("WIMF_OUT", in)) : fs::path(out);
        fs::create_directories(dir);

        KeyValues kv;
        kv["command"] = "factorize";
        kv["in"] = in;
        kv["out"] = dir.string();
        kv["lambda"] = fmt(lam);
        kv["gamma"] = fmt(gam);
        kv["delta"] = fmt(dlt);
        if (cfg.max_modes) kv["max-modes"] = std::to_string(*cfg.max_modes);
        kv["seed"] = std::to_string(seed);
        solver.record(kv);
        write_key_values(dir / "config.cfg", kv);

        std::ofstream trace(dir / "trace.csv");
        if (!trace) throw DataError("cannot write trace.csv");
        trace << "outer,modes,inner_iters,inner_converged,objective,polar,polar_k_bar,appended,tau,objective_after\n";
        cfg.on_record = [&](const TraceRecord& r) {
            trace << r.outer << ',' << r.modes << ',' << r.inner_iters << ',' << (r.inner_converged ? 1 : 0) << ','
                  << fmt(r.objective) << ',' << fmt(r.polar) << ',' << fmt(r.polar_k_bar) << ','
                  << (r.appended ? 1 : 0) << ',' << fmt(r.tau) << ',' << fmt(r.objective_after) << '\n';
            trace.flush();
        };

        const FactorizeResult res = factorize(Y, cfg, lam, gam);
        write_matrix_csv(dir / "D.csv", res.model.D);
        write_matrix_csv(dir / "X.csv", res.model.X);
        write_matrix_csv(dir / "k.csv", MatrixXd(res.model.k_bar));
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

        const auto& last = res.trace.records.back();
        std::cout << "lambda = " << fmt(lam) << ", gamma = " << fmt(gam) << "\n"
                  << "modes: " << res.model.modes() << ", stop: " << to_string(res.reason)
                  << ", final polar = " << fmt(last.polar) << ", objective = " << fmt(last.objective_after) << "\n";
        return 0;
    }
};

// ---------------------------------------------------------------- evaluate

void write_report(const fs::path& path, const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write " + path.string());
    os << "dataset,snr_db,trials,mse_e3_mean,mse_e3_std,fmse_e3_mean,fmse_e3_std\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

struct EvaluateCmd {
    std::string in = ".";
    std::optional<std::string> fit;
    std::optional<std::string> truth_file, modes_file;
    std::string out;
    int pad = 1;

    void add(CLI::App* app) {
        app->add_option("--in", in, "Dataset directory (truth.csv, meta.cfg)");
        app->add_option("--fit", fit, "Factorization directory holding D.csv (defaults to --in)");
        app->add_option("--truth", truth_file, "Explicit truth CSV");
        app->add_option("--modes", modes_file, "Explicit recovered-modes CSV");
        app->add_option("--out", out, "Output directory (env WIMF_OUT; defaults to the fit directory)");
        app->add_option("--pad", pad, "Zero-padding factor for Fourier magnitudes")->check(CLI::PositiveNumber);
    }

    int run() const {
        const fs::path data_dir(in);
        const fs::path fit_dir(fit.value_or(in));
        const fs::path tpath = truth_file ? fs::path(*truth_file) : data_dir / "truth.csv";
        const fs::path mpath = modes_file ? fs::path(*modes_file) : fit_dir / "D.csv";
        const MatrixXd truth = read_matrix_csv(tpath);
        const MatrixXd modes = read_matrix_csv(mpath);
        if (truth.rows() != modes.rows())
            throw DataError("shape mismatch: truth has " + std::to_string(truth.rows()) + " rows, modes have " +
                            std::to_string(modes.rows()));

        KeyValues meta;
        if (fs::exists(data_dir / "meta.cfg")) meta = read_key_values(data_dir / "meta.cfg");
        const std::string dataset = meta.count("kind") ? meta.at("kind") : "custom";
        const std::string snr = meta.count("snr") ? meta.at("snr") : "inf";

        const EvalReport rep = evaluate(modes, truth, pad);
        const fs::path dir = out.empty() ? fs::path(env_or("WIMF_OUT", fit_dir.string())) : fs::path(out);
        fs::create_directories(dir);
        write_report(dir / "report.csv",
                     {{dataset, snr, "1", fmt(rep.mse * 1e3), "0", fmt(rep.fourier_mse * 1e3), "0"}});

        KeyValues kv{{"command", "evaluate"},     {"in", in},          {"fit", fit_dir.string()},
                     {"truth", tpath.string()},   {"modes", mpath.string()}, {"out", dir.string()},
                     {"pad", std::to_string(pad)}};
        write_key_values(dir / "config.cfg", kv);

        std::cout << "mode MSE x1e3 = " << fmt(rep.mse * 1e3) << "\n"
                  << "Fourier-magnitude MSE x1e3 = " << fmt(rep.fourier_mse * 1e3) << "\n";
        return 0;
    }
};

// --------------------------------------------------------- filter-response

struct FilterCmd {
    double k_bar = 2.5;
    double gamma = 1000.0;
    int n = 256;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--k-bar", k_bar, "Centre k_bar in [0,4]")->check(CLI::Range(0.0, 4.0));
        app->add_option("--gamma", gamma, "Regularization weight")->check(CLI::NonNegativeNumber);
        app->add_option("--n", n, "Laplacian size")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Output CSV (env WIMF_OUT directory; default filter_response.csv)");
    }

    int run() const {
        const SpectralBasis basis = eigendecompose(build_laplacian(n));
        const VectorXd c = filter_coefficients(basis, {k_bar, gamma});
        fs::path path = out.empty() ? fs::path(env_or("WIMF_OUT", ".")) / "filter_response.csv" : fs::path(out);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream os(path);
        if (!os) throw DataError("cannot write " + path.string());
        os << "lambda,coefficient\n";
        for (Index i = 0; i < basis.size(); ++i) os << fmt(basis.lambda(i)) << ',' << fmt(c(i)) << '\n';
        fs::path cfg = path;
        cfg.replace_extension(".cfg");
        write_key_values(cfg, {{"command", "filter-response"},
                               {"k-bar", fmt(k_bar)},
                               {"gamma", fmt(gamma)},
                               {"n", std::to_string(n)},
                               {"out", path.string()}});
        std::cout << "peak coefficient " << fmt(c.maxCoeff()) << "; -3 dB width in Lambda units: "
                  << (gamma > 0 ? fmt(2.0 / std::sqrt(gamma)) : std::string("inf")) << "\nwrote " << path.string()
                  << "\n";
        return 0;
    }
};

// --------------------------------------------------------------- benchmark

struct BenchmarkCmd {
    std::vector<std::string> kinds{"homogeneous", "inhomogeneous", "traveling", "segmented"};
    std::string snr = "inf,lowest";
    int trials = 5;
    std::uint64_t seed = 0;
    int threads = 0;
    std::optional<double> delta, lambda, gamma;
    std::optional<int> max_modes;
    int pad = 1;
    std::string out;
    GridOptions grid;
    SolverOptions solver;

    void add(CLI::App* app) {
        app->add_option("--kind", kinds, "Dataset kinds (repeatable)")->delimiter(',');
        app->add_option("--snr", snr, "Comma-separated SNRs in dB; 'inf' and 'lowest' (per-kind table minimum)");
        app->add_option("--trials", trials, "Monte-Carlo trials per cell")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Base seed; trial i uses seed + i");
        app->add_option("--threads", threads, "Worker threads (env WIMF_THREADS)")->check(CLI::NonNegativeNumber);
        app->add_option("--delta", delta, "Override the table delta")->check(CLI::PositiveNumber);
        app->add_option("--lambda", lambda, "Override lambda")->check(CLI::PositiveNumber);
        app->add_option("--gamma", gamma, "Override gamma")->check(CLI::NonNegativeNumber);
        app->add_option("--max-modes", max_modes, "Override the mode cap")->check(CLI::PositiveNumber);
        app->add_option("--pad", pad, "Zero-padding factor for Fourier magnitudes")->check(CLI::PositiveNumber);
        app->add_option("--out", out, "Output directory (env WIMF_OUT)");
        grid.add(app);
        solver.add(app);
    }

    int run() const {
        const fs::path dir = out.empty() ? fs::path(env_or("WIMF_OUT", ".")) : fs::path(out);
        fs::create_directories(dir);
        const int nthreads = threads > 0 ? threads : std::stoi(env_or("WIMF_THREADS", "1"));

        KeyValues kv;
        kv["command"] = "benchmark";
        std::string kind_list;
        for (const auto& k : kinds) kind_list += (kind_list.empty() ? "" : ",") + to_string(parse_kind(k));
        kv["kind"] = kind_list;
        kv["snr"] = snr;
        kv["trials"] = std::to_string(trials);
        kv["seed"] = std::to_string(seed);
        kv["threads"] = std::to_string(nthreads);
        kv["pad"] = std::to_string(pad);
        kv["grid"] = grid.preset;
        kv["sampling"] = grid.sampling;
        if (delta) kv["delta"] = fmt(*delta);
        if (lambda) kv["lambda"] = fmt(*lambda);
        if (gamma) kv["gamma"] = fmt(*gamma);
        if (max_modes) kv["max-modes"] = std::to_string(*max_modes);
        kv["out"] = dir.string();
        solver.record(kv);
        write_key_values(dir / "config.cfg", kv);

        std::ofstream table(dir / "benchmark.csv");
        std::ofstream per_trial(dir / "trials.csv");
        if (!table || !per_trial) throw DataError("cannot write benchmark outputs in " + dir.string());
        table << "dataset,snr_db,trials,failures,wimf_mse_e3_mean,wimf_mse_e3_std,wimf_fmse_e3_mean,"
                 "wimf_fmse_e3_std,pca_mse_e3_mean,pca_mse_e3_std,pca_fmse_e3_mean,pca_fmse_e3_std,seconds\n";
        per_trial << "dataset,snr_db,seed,ok,lambda,gamma,modes,stop,wimf_mse_e3,wimf_fmse_e3,pca_mse_e3,"
                     "pca_fmse_e3,seconds,error\n";
        std::vector<std::vector<std::string>> wimf_rows, pca_rows;

        std::cout << std::left << std::setw(15) << "dataset" << std::setw(9) << "snr_db" << std::setw(22)
                  << "WIMF mse x1e3" << std::setw(22) << "PCA mse x1e3" << "seconds\n";
        for (const auto& kname : kinds) {
            const DatasetKind k = parse_kind(kname);
            std::stringstream ss(snr);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const double s = tok == "lowest" ? lowest_snr(k) : parse_snr(tok);
                MonteCarloTask task;
                task.kind = k;
                task.snr_db = s;
                task.trials = trials;
                task.base_seed = seed;
                task.grid = grid.resolve(k);
                task.delta = delta;
                task.lambda_reg = lambda;
                task.gamma_reg = gamma;
                task.max_modes = max_modes;
                task.solver = solver.resolve();
                task.pad_factor = pad;
                task.threads = nthreads;
                task.exclude_failures = true;

                const auto t0 = std::chrono::steady_clock::now();
                const MonteCarloReport rep = monte_carlo(task);
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                const std::string ds = to_string(k);
                table << ds << ',' << fmt(s) << ',' << trials << ',' << rep.failures << ','
                      << fmt(rep.wimf_mse.mean * 1e3) << ',' << fmt(rep.wimf_mse.std * 1e3) << ','
                      << fmt(rep.wimf_fmse.mean * 1e3) << ',' << fmt(rep.wimf_fmse.std * 1e3) << ','
                      << fmt(rep.pca_mse.mean * 1e3) << ',' << fmt(rep.pca_mse.std * 1e3) << ','
                      << fmt(rep.pca_fmse.mean * 1e3) << ',' << fmt(rep.pca_fmse.std * 1e3) << ',' << fmt(secs)
                      << '\n';
                table.flush();
                wimf_rows.push_back({ds, fmt(s), std::to_string(trials), fmt(rep.wimf_mse.mean * 1e3),
                                     fmt(rep.wimf_mse.std * 1e3), fmt(rep.wimf_fmse.mean * 1e3),
                                     fmt(rep.wimf_fmse.std * 1e3)});
                pca_rows.push_back({ds, fmt(s), std::to_string(trials), fmt(rep.pca_mse.mean * 1e3),
                                    fmt(rep.pca_mse.std * 1e3), fmt(rep.pca_fmse.mean * 1e3),
                                    fmt(rep.pca_fmse.std * 1e3)});
                for (const auto& r : rep.records) {
                    per_trial << ds << ',' << fmt(s) << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
                              << fmt(r.lambda_reg) << ',' << fmt(r.gamma_reg) << ','
                              << (r.ok ? r.fit.model.modes() : 0) << ',' << (r.ok ? to_string(r.fit.reason) : "")
                              << ',' << fmt(r.wimf.mse * 1e3) << ',' << fmt(r.wimf.fourier_mse * 1e3) << ','
                              << fmt(r.pca.mse * 1e3) << ',' << fmt(r.pca.fourier_mse * 1e3) << ','
                              << fmt(r.seconds) << ",\"" << r.error << "\"\n";
                }
                per_trial.flush();

                std::ostringstream w, p;
                w << std::fixed << std::setprecision(3) << rep.wimf_mse.mean * 1e3 << " +- " << rep.wimf_mse.std * 1e3;
                p << std::fixed << std::setprecision(3) << rep.pca_mse.mean * 1e3 << " +- " << rep.pca_mse.std * 1e3;
                std::cout << std::setw(15) << ds << std::setw(9) << fmt(s) << std::setw(22) << w.str()
                          << std::setw(22) << p.str() << std::fixed << std::setprecision(1) << secs
                          << (rep.failures ? "  (" + std::to_string(rep.failures) + " failed)" : "") << "\n"
                          << std::defaultfloat;
            }
        }
        write_report(dir / "report_wimf.csv", wimf_rows);
        write_report(dir / "report_pca.csv", pca_rows);
        std::cout << "wrote " << (dir / "benchmark.csv").string() << "\n";
        return 0;
    }
};

// Lines of a resolved-config file become command-line flags unless the same
// flag was given explicitly.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::optional<std::string> cfg_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            cfg_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            cfg_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!cfg_path) return out;
    std::set<std::string> given;
    for (const auto& a : out)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                                             : a.find('=') - 2));
    static const std::set<std::string> recorded_only{"command", "n_d",   "n_t",   "noise_seed", "n_modes",
                                                     "truth_modes", "alpha", "beta", "k",          "omega",
                                                     "a",       "b"};
    for (const auto& [key, value] : read_key_values(*cfg_path)) {
        if (given.count(key) || recorded_only.count(key)) continue;
        if (value == "true") {
            out.push_back("--" + key);
        } else {
            out.push_back("--" + key);
            out.push_back(value);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wave-informed matrix factorization"};
    app.require_subcommand(1);

    GenerateCmd gen;
    FactorizeCmd fac;
    EvaluateCmd eva;
    FilterCmd fil;
    BenchmarkCmd ben;
    auto* g = app.add_subcommand("generate", "Write a synthetic dataset (Y.csv, truth.csv, meta.cfg)");
    auto* f = app.add_subcommand("factorize", "Factorize Y.csv; writes D.csv, X.csv, k.csv, trace.csv");
    auto* e = app.add_subcommand("evaluate", "Score recovered modes against the truth; writes report.csv");
    auto* r = app.add_subcommand("filter-response", "Tabulate the spectral filter coefficients");
    auto* b = app.add_subcommand("benchmark", "Monte-Carlo WIMF vs PCA over dataset kinds and SNRs");
    gen.add(g);
    fac.add(f);
    eva.add(e);
    fil.add(r);
    ben.add(b);
    for (auto* sc : {g, f, e, r, b})
        sc->add_option("--config", "Resolved config file from a previous run; explicit flags take precedence");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config(args);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitData;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());

    try {
        app.parse(rev);
    } catch (const CLI::ParseError& ex) {
        const int rc = app.exit(ex);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (g->parsed()) return gen.run();
        if (f->parsed()) return fac.run();
        if (e->parsed()) return eva.run();
        if (r->parsed()) return fil.run();
        if (b->parsed()) return ben.run();
    } catch (const InvalidArgument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const DataError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitData;
    } catch (const InvalidDimension& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitData;
    } catch (const NumericalFailure& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const PreconditionViolation& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const fs::filesystem_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitData;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
