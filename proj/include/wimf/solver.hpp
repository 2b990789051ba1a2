#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wimf/polar.hpp"
#include "wimf/spectral.hpp"

namespace wimf {

struct FactorModel {
    MatrixXd D;      // n x N spatial modes
    MatrixXd X;      // m x N temporal coefficients
    VectorXd k_bar;  // N squared wavenumbers in [0, 4]
    double lambda_reg = 0.0;
    double gamma_reg = 0.0;

    Index modes() const { return D.cols(); }
    static FactorModel empty(Index n, Index m, double lambda_reg, double gamma_reg);
    void validate(Index n, Index m) const;
};

enum class DescentMethod {
    // Exact minimisation of each column block in turn (closed form in the
    // Laplacian eigenbasis), then the exact k_bar update.
    exact_block,
    // Plain gradient steps with backtracking.
    gradient,
};

struct TraceRecord {
    int outer = 0;
    Index modes = 0;            // N at the stationary point
    int inner_iters = 0;
    bool inner_converged = true;
    double objective = 0.0;     // at the stationary point, before any append
    double polar = 0.0;
    double polar_k_bar = 0.0;
    bool appended = false;
    double tau = 0.0;
    double objective_after = 0.0;  // after the append (equals objective otherwise)
};

struct SolverConfig {
    double epsilon = 1e-2;
    int max_outer_iters = 200;
    int max_inner_iters = 10000;
    std::optional<double> step_size;         // initial gradient step; default 1/(||Y||_2^2 + lambda(1+16 gamma))
    std::optional<double> stationarity_tol;  // default 1e-6 ||Y||_F
    std::optional<int> max_modes;
    LineSearchConfig line_search;
    DescentMethod descent = DescentMethod::exact_block;
    std::uint64_t seed = 0;
    // Called as each outer-iteration record is finalised.
    std::function<void(const TraceRecord&)> on_record;

    void validate() const;
};

struct SolverTrace {
    std::vector<TraceRecord> records;
};

enum class StopReason { certificate, mode_cap, max_outer_iters, zero_data };

std::string to_string(StopReason r);

struct FactorizeResult {
    FactorModel model;
    SolverTrace trace;
    StopReason reason = StopReason::certificate;
    std::vector<std::string> warnings;
};

struct Gradients {
    MatrixXd dD;
    MatrixXd dX;
};

struct DescentResult {
    FactorModel model;
    int iterations = 0;
    bool converged = false;
};

double objective(const FactorModel& model, const MatrixXd& Y);

// Minimiser of ||L d + k_bar d||^2 over k_bar in [0, 4]; 0 for d = 0.
double optimal_k_bar(const VectorXd& d);

// ||x||^2 + min_k d^T A(k) d.
double theta_bar(const VectorXd& d, const VectorXd& x, double gamma_reg);

Gradients gradients(const FactorModel& model, const MatrixXd& Y);

// Largest absolute gradient entry over both blocks.
double stationarity(const FactorModel& model, const MatrixXd& Y);

// One gradient step on every d_i, then every x_i against the updated D,
// then the closed-form k_bar update.
FactorModel block_descent_pass(const FactorModel& model, const MatrixXd& Y, double step_size);

// Exact per-column minimisation, same block order as block_descent_pass.
FactorModel exact_block_pass(const FactorModel& model, const MatrixXd& Y, const SpectralBasis& basis);

DescentResult descend_to_stationary(const FactorModel& model, const MatrixXd& Y, const SolverConfig& cfg,
                                    const SpectralBasis& basis);

double optimal_tau(double residual_inner, double lambda_reg, const VectorXd& d_star, const VectorXd& x_star);

FactorModel append_mode(const FactorModel& model, const PolarSolution& sol, double tau);

// Drops columns with ||d_i|| ||x_i|| below `threshold`.
FactorModel prune_columns(const FactorModel& model, double threshold);

FactorizeResult factorize(const MatrixXd& Y, const SolverConfig& cfg, double lambda_reg, double gamma_reg,
                          const std::optional<FactorModel>& init = std::nullopt);

}  // namespace wimf
