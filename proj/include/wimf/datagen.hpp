#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "wimf/spectral.hpp"

namespace wimf {

enum class DatasetKind { homogeneous, inhomogeneous, traveling, segmented };

std::string to_string(DatasetKind kind);
DatasetKind parse_kind(const std::string& s);

// Where the n_d spatial samples sit inside [0, L].
enum class SpatialSampling {
    // l_j = j L / (n_d + 1): both Dirichlet ends fall one step outside the
    // sample range, matching the boundary rows of the Laplacian.
    interior,
    // l_j = j * delta_l.
    step,
};

std::string to_string(SpatialSampling s);
SpatialSampling parse_sampling(const std::string& s);

// `table` reproduces the printed spacings; `dense` refines the three
// 11-sample rows tenfold (the segmented row is unchanged).
enum class GridPreset { table, dense };

std::string to_string(GridPreset p);
GridPreset parse_preset(const std::string& s);

struct Grid {
    double delta_l = 1.0;
    double length_l = 1.0;
    double delta_t = 1.0;
    double length_t = 1.0;
    SpatialSampling sampling = SpatialSampling::interior;

    Index n_d() const;
    Index n_t() const;
    VectorXd space() const;  // n_d positions
    VectorXd time() const;   // t_j = j delta_t, j = 0..n_t-1
    void validate() const;
};

struct GeneratorParams {
    DatasetKind kind = DatasetKind::homogeneous;
    int n_modes = 0;
    VectorXd alpha;  // temporal decay
    VectorXd beta;   // spatial decay
    VectorXd k;      // angular wavenumber per physical length
    VectorXd omega;  // angular frequency
    VectorXd a;
    VectorXd b;
    double delta = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Dataset {
    MatrixXd Y;                // n_d x n_t
    MatrixXd truth;            // n_d x N_true spatial modes
    MatrixXd truth_temporal;   // n_t x N_true; noiseless Y = truth * truth_temporal^T
    Grid grid;
    GeneratorParams params;
    double snr_db = std::numeric_limits<double>::infinity();

    // Mode count the factorisation should recover (2N for travelling waves).
    Index target_modes() const { return truth.cols(); }
};

Grid table_grid(DatasetKind kind, GridPreset preset = GridPreset::table);

// Table-row parameters. Inhomogeneous decay offsets u_n ~ U[0,1] and the
// optional a_n, b_n ~ U[-1,1] are drawn from `seed`.
GeneratorParams table_params(DatasetKind kind, std::uint64_t seed = 0, bool randomize_ab = false);

// Roots 2 pi -/+ atan(sqrt((13 +/- 4 sqrt 10)/3)) in ascending order.
VectorXd segmented_wavenumbers();

Dataset gen_homogeneous(const Grid& grid, const GeneratorParams& params);
Dataset gen_inhomogeneous(const Grid& grid, const GeneratorParams& params);
Dataset gen_traveling(const Grid& grid, const GeneratorParams& params);
Dataset gen_segmented(const Grid& grid, const GeneratorParams& params);
Dataset generate(const Grid& grid, const GeneratorParams& params);

// Seed of the noise stream paired with a generator seed.
std::uint64_t noise_seed(std::uint64_t seed);

// White Gaussian noise rescaled so that sum(y^2)/sum(eta^2) is exactly the
// requested ratio. An infinite SNR returns the input unchanged.
Dataset add_noise(const Dataset& data, double snr_db, std::uint64_t seed);

struct LambdaRule {
    double value = 0.0;
    Index rank = 0;
    bool rank_deficient = false;
};

// 0.75 sigma_N(Y).
LambdaRule lambda_rule(const MatrixXd& Y, Index N);

// delta (M / pi)^2.
double gamma_rule(Index M, double delta);

}  // namespace wimf
