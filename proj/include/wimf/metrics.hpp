#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wimf/datagen.hpp"
#include "wimf/solver.hpp"
#include "wimf/spectral.hpp"

namespace wimf {

// Greedy assignment of recovered columns to truth columns.
struct ModeMatch {
    std::vector<Index> truth_index;  // per recovered column; -1 when left unmatched
    std::vector<int> signs;          // c_n in {-1, +1}
    std::vector<Index> order;        // recovered columns in the order they were matched
    std::vector<bool> degenerate;    // zero-norm recovered or truth column in the pair
};

ModeMatch match_modes(const MatrixXd& recovered, const MatrixXd& truth);

// ||d/||d|| - c t/||t|| ||^2 for every matched pair, in recovered-column order.
std::vector<double> mode_errors(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match);
double mode_mse(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match);

// Magnitude of the DFT of `v` zero-padded to pad_factor * length.
VectorXd magnitude_spectrum(const VectorXd& v, int pad_factor = 1);

std::vector<double> fourier_errors(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match,
                                   int pad_factor = 1);
double fourier_mse(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match, int pad_factor = 1);

// Leading N left singular vectors, first nonzero entry positive; zero columns
// pad the result when N exceeds the numerical rank.
MatrixXd pca_baseline(const MatrixXd& Y, Index N, bool* padded = nullptr);

struct EvalReport {
    double mse = 0.0;
    double fourier_mse = 0.0;
    std::vector<double> per_mode;
    std::vector<double> per_mode_fourier;
    ModeMatch match;
};

EvalReport evaluate(const MatrixXd& recovered, const MatrixXd& truth, int pad_factor = 1);

struct Stats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single trial
};

Stats summarize(const std::vector<double>& xs);

struct MonteCarloTask {
    DatasetKind kind = DatasetKind::homogeneous;
    double snr_db = std::numeric_limits<double>::infinity();
    int trials = 1;
    std::uint64_t base_seed = 0;  // trial i uses base_seed + i
    Grid grid;
    std::optional<double> delta;  // defaults to the table value for the kind
    std::optional<double> lambda_reg;
    std::optional<double> gamma_reg;
    std::optional<int> max_modes;  // defaults to min(target modes, n_d)
    SolverConfig solver;
    int pad_factor = 1;
    int threads = 1;
    bool exclude_failures = false;
};

struct TrialRecord {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double lambda_reg = 0.0;
    double gamma_reg = 0.0;
    EvalReport wimf;
    EvalReport pca;
    FactorizeResult fit;
    double seconds = 0.0;
};

struct MonteCarloReport {
    DatasetKind kind = DatasetKind::homogeneous;
    double snr_db = 0.0;
    int trials = 0;
    int failures = 0;
    Stats wimf_mse, wimf_fmse, pca_mse, pca_fmse;
    std::vector<TrialRecord> records;
};

TrialRecord run_trial(const MonteCarloTask& task, std::uint64_t seed);
MonteCarloReport monte_carlo(const MonteCarloTask& task);

}  // namespace wimf
