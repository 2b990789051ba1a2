#pragma once

#include <optional>

#include "wimf/spectral.hpp"

namespace wimf {

// Coarse-to-fine search for the maximiser of k_bar -> ||A(k_bar)^{-1/2} Z||_2.
struct LineSearchConfig {
    int coarse_points = 200;
    int refine_points = 200;
    // Half-width of the first zoom window; defaults to one coarse step.
    std::optional<double> refine_radius;
    double lo = 0.0;
    double hi = 4.0;
    // Successive zooms; each shrinks the window to one step of the previous level.
    int refine_levels = 4;
    // Number of coarse local maxima that get refined.
    int candidates = 4;
    // Adds k_bar = -Lambda_ii to the coarse grid. A sharp filter (large gamma)
    // puts its peaks exactly on these points and can slip between uniform samples.
    bool eigenvalue_anchors = true;

    void validate() const;
    double coarse_step() const { return (hi - lo) / static_cast<double>(coarse_points - 1); }
};

struct PolarSolution {
    VectorXd d_star;
    VectorXd x_star;
    double k_bar_star = 0.0;
    double value = 0.0;
    // Grid maximum plus Lipschitz slack over half a coarse step; bounds the true maximum.
    double upper_bound = 0.0;
    int evaluations = 0;
    bool degenerate = false;
};

// Caches Gamma^T Z (and its Gram matrix) so each k_bar costs one small
// symmetric eigenvalue problem.
class LineSearchObjective {
public:
    LineSearchObjective(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z);

    double operator()(double k_bar) const;
    double z_norm() const { return z_norm_; }

    // Top singular triplet of A(k_bar)^{-1/2} Z, expressed as the polar maximiser.
    PolarSolution maximiser(double k_bar) const;

private:
    VectorXd coefficients(double k_bar) const;

    const SpectralBasis& basis_;
    double gamma_;
    MatrixXd W_;     // Gamma^T Z
    MatrixXd gram_;  // W W^T when rows <= cols
    bool use_row_gram_;
    double z_norm_;
};

double line_search_objective(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z, double k_bar);

PolarSolution solve_polar(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z,
                          const LineSearchConfig& cfg = {});

// Slope bound of the line-search objective in k_bar.
double lipschitz_constant(double gamma_reg, double z_spectral_norm);
double lipschitz_bound(double gamma_reg, const MatrixXd& Z);

double spectral_norm(const MatrixXd& Z);

enum class GapVerdict { optimal, continue_search };

struct OptimalityGap {
    GapVerdict verdict = GapVerdict::optimal;
    double gap = 0.0;
    // Value well below one at a stationary point: the grid search undershot.
    bool undershoot = false;
};

OptimalityGap optimality_gap(double polar_value, double epsilon);

}  // namespace wimf
