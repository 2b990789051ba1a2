#include "wimf/datagen.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SVD>

#include "wimf/errors.hpp"

namespace wimf {

namespace {

constexpr double pi = std::numbers::pi;

// Guards against 1/0.0005 landing a hair below an integer.
Index robust_floor(double x) { return static_cast<Index>(std::floor(x + 1e-9)); }

VectorXd index_vector(int n) { return VectorXd::LinSpaced(n, 1.0, static_cast<double>(n)); }

VectorXd temporal(const VectorXd& t, double alpha, double omega, double a, double b) {
    return ((-alpha * t.array()).exp() * (a * (omega * t.array()).sin() + b * (omega * t.array()).cos())).matrix();
}

void check_kind(const GeneratorParams& p, DatasetKind want) {
    p.validate();
    if (p.kind != want) throw InvalidArgument("generator called with parameters for " + to_string(p.kind));
}

Dataset assemble(const Grid& grid, const GeneratorParams& params, MatrixXd truth, MatrixXd temporal_part) {
    Dataset ds;
    ds.grid = grid;
    ds.params = params;
    ds.Y = truth * temporal_part.transpose();
    ds.truth = std::move(truth);
    ds.truth_temporal = std::move(temporal_part);
    return ds;
}

}  // namespace

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::homogeneous: return "homogeneous";
        case DatasetKind::inhomogeneous: return "inhomogeneous";
        case DatasetKind::traveling: return "traveling";
        case DatasetKind::segmented: return "segmented";
    }
    return "unknown";
}

DatasetKind parse_kind(const std::string& s) {
    if (s == "homogeneous") return DatasetKind::homogeneous;
    if (s == "inhomogeneous") return DatasetKind::inhomogeneous;
    if (s == "traveling" || s == "travelling") return DatasetKind::traveling;
    if (s == "segmented") return DatasetKind::segmented;
    throw InvalidArgument("unknown dataset kind: " + s);
}

std::string to_string(SpatialSampling s) { return s == SpatialSampling::interior ? "interior" : "step"; }

SpatialSampling parse_sampling(const std::string& s) {
    if (s == "interior") return SpatialSampling::interior;
    if (s == "step") return SpatialSampling::step;
    throw InvalidArgument("unknown spatial sampling: " + s);
}

std::string to_string(GridPreset p) { return p == GridPreset::table ? "table" : "dense"; }

GridPreset parse_preset(const std::string& s) {
    if (s == "table") return GridPreset::table;
    if (s == "dense") return GridPreset::dense;
    throw InvalidArgument("unknown grid preset: " + s);
}

Index Grid::n_d() const { return robust_floor(length_l / delta_l); }
Index Grid::n_t() const { return robust_floor(length_t / delta_t); }

void Grid::validate() const {
    if (!(delta_l > 0.0 && length_l > 0.0 && delta_t > 0.0 && length_t > 0.0))
        throw InvalidArgument("grid spacings and lengths must be positive");
    if (n_d() < 1 || n_t() < 1) throw InvalidArgument("grid must have at least one sample per axis");
}

VectorXd Grid::space() const {
    const Index n = n_d();
    const VectorXd j = VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
    if (sampling == SpatialSampling::interior) return j * (length_l / static_cast<double>(n + 1));
    return j * delta_l;
}

VectorXd Grid::time() const {
    const Index n = n_t();
    return VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) * delta_t;
}

void GeneratorParams::validate() const {
    if (n_modes < 1) throw InvalidArgument("n_modes must be positive");
    for (const VectorXd* v : {&alpha, &beta, &k, &omega, &a, &b})
        if (v->size() != n_modes) throw InvalidDimension("generator parameter arrays must have n_modes entries");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
}

Grid table_grid(DatasetKind kind, GridPreset preset) {
    Grid g;
    switch (kind) {
        case DatasetKind::homogeneous:
            g = {0.0901, 1.0, 0.0005, 2.0};
            break;
        case DatasetKind::inhomogeneous:
        case DatasetKind::traveling:
            g = {0.901, 10.0, 0.0005, 2.0};
            break;
        case DatasetKind::segmented:
            return {0.01, 2.0, 0.02, 10.0};
    }
    if (preset == GridPreset::dense) g.delta_l /= 10.0;
    return g;
}

VectorXd segmented_wavenumbers() {
    const double r = std::atan(std::sqrt((13.0 + 4.0 * std::sqrt(10.0)) / 3.0));
    const double q = std::atan(std::sqrt((13.0 - 4.0 * std::sqrt(10.0)) / 3.0));
    VectorXd k(4);
    k << 2 * pi - r, 2 * pi - q, 2 * pi + q, 2 * pi + r;
    return k;
}

GeneratorParams table_params(DatasetKind kind, std::uint64_t seed, bool randomize_ab) {
    GeneratorParams p;
    p.kind = kind;
    p.seed = seed;
    std::mt19937_64 rng(seed);

    if (kind == DatasetKind::segmented) {
        p.n_modes = 8;
        const VectorXd r = segmented_wavenumbers();
        p.k.resize(8);
        p.omega.resize(8);
        // Modes 0-3 live on the left segment, 4-7 on the right one; both
        // halves share the table's (k_i, w_i = 3 k_i).
        for (int i = 0; i < 4; ++i) {
            p.k(i) = p.k(i + 4) = r(i);
            p.omega(i) = p.omega(i + 4) = 3.0 * r(i);
        }
        p.alpha = p.beta = p.b = VectorXd::Zero(8);
        p.a = VectorXd::Ones(8);
        p.delta = 1.0;
        return p;
    }

    p.n_modes = 6;
    const VectorXd n = index_vector(6);
    p.k = pi * n;
    p.omega = 106.0 * p.k;
    p.alpha = kind == DatasetKind::inhomogeneous ? VectorXd::Zero(6) : VectorXd(n / 2.0);
    p.beta = VectorXd::Zero(6);
    if (kind == DatasetKind::inhomogeneous) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 6; ++i) p.beta(i) = (4.0 + n(i)) / 10.0 + u(rng);
    }
    p.a = VectorXd::Ones(6);
    p.b = VectorXd::Zero(6);
    if (randomize_ab) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 6; ++i) {
            p.a(i) = u(rng);
            p.b(i) = u(rng);
        }
    }
    p.delta = kind == DatasetKind::homogeneous ? 100.0 : 1.0;
    return p;
}

Dataset gen_homogeneous(const Grid& grid, const GeneratorParams& params) {
    check_kind(params, DatasetKind::homogeneous);
    grid.validate();
    const VectorXd l = grid.space();
    const VectorXd t = grid.time();
    MatrixXd truth(l.size(), params.n_modes), tmp(t.size(), params.n_modes);
    for (int i = 0; i < params.n_modes; ++i) {
        truth.col(i) = (params.k(i) * l.array()).sin().matrix();
        tmp.col(i) = temporal(t, params.alpha(i), params.omega(i), params.a(i), params.b(i));
    }
    return assemble(grid, params, std::move(truth), std::move(tmp));
}

Dataset gen_inhomogeneous(const Grid& grid, const GeneratorParams& params) {
    check_kind(params, DatasetKind::inhomogeneous);
    grid.validate();
    const VectorXd l = grid.space();
    const VectorXd t = grid.time();
    MatrixXd truth(l.size(), params.n_modes), tmp(t.size(), params.n_modes);
    for (int i = 0; i < params.n_modes; ++i) {
        truth.col(i) = ((-params.beta(i) * l.array()).exp() * (params.k(i) * l.array()).sin()).matrix();
        tmp.col(i) = temporal(t, params.alpha(i), params.omega(i), params.a(i), params.b(i));
    }
    return assemble(grid, params, std::move(truth), std::move(tmp));
}

Dataset gen_traveling(const Grid& grid, const GeneratorParams& params) {
    check_kind(params, DatasetKind::traveling);
    grid.validate();
    const VectorXd l = grid.space();
    const VectorXd t = grid.time();
    const int N = params.n_modes;
    MatrixXd truth(l.size(), 2 * N), tmp(t.size(), 2 * N);
    MatrixXd Y = MatrixXd::Zero(l.size(), t.size());
    for (int i = 0; i < N; ++i) {
        const Eigen::ArrayXd env = (-params.alpha(i) * t.array()).exp();
        const Eigen::ArrayXd wt = params.omega(i) * t.array();
        truth.col(2 * i) = (params.k(i) * l.array()).sin().matrix();
        truth.col(2 * i + 1) = (params.k(i) * l.array()).cos().matrix();
        tmp.col(2 * i) = (env * wt.cos()).matrix();
        tmp.col(2 * i + 1) = (env * wt.sin()).matrix();
        for (Index c = 0; c < t.size(); ++c)
            Y.col(c) += env(c) * (params.k(i) * l.array() + wt(c)).sin().matrix();
    }
    Dataset ds;
    ds.grid = grid;
    ds.params = params;
    ds.Y = std::move(Y);
    ds.truth = std::move(truth);
    ds.truth_temporal = std::move(tmp);
    return ds;
}

Dataset gen_segmented(const Grid& grid, const GeneratorParams& params) {
    check_kind(params, DatasetKind::segmented);
    if (params.n_modes % 2 != 0) throw InvalidArgument("segmented data needs an even mode count");
    grid.validate();
    const VectorXd l = grid.space();
    const VectorXd t = grid.time();
    const double L = grid.length_l;
    const double mid = L / 2.0;
    const int half = params.n_modes / 2;
    MatrixXd truth = MatrixXd::Zero(l.size(), params.n_modes);
    MatrixXd tmp(t.size(), params.n_modes);
    for (int i = 0; i < params.n_modes; ++i) {
        const bool left = i < half;
        for (Index j = 0; j < l.size(); ++j) {
            // The denser left segment carries three times the wavenumber.
            if (left && l(j) <= mid) truth(j, i) = std::sin(3.0 * params.k(i) * l(j));
            // Measured from the far end so the fixed boundary at l = L holds.
            if (!left && l(j) > mid) truth(j, i) = std::sin(params.k(i) * (L - l(j)));
        }
        const double w = left ? params.omega(i) : params.omega(i) / 3.0;
        tmp.col(i) = temporal(t, params.alpha(i), w, params.a(i), params.b(i));
    }
    return assemble(grid, params, std::move(truth), std::move(tmp));
}

Dataset generate(const Grid& grid, const GeneratorParams& params) {
    switch (params.kind) {
        case DatasetKind::homogeneous: return gen_homogeneous(grid, params);
        case DatasetKind::inhomogeneous: return gen_inhomogeneous(grid, params);
        case DatasetKind::traveling: return gen_traveling(grid, params);
        case DatasetKind::segmented: return gen_segmented(grid, params);
    }
    throw InvalidArgument("unknown dataset kind");
}

std::uint64_t noise_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 1; }

Dataset add_noise(const Dataset& data, double snr_db, std::uint64_t seed) {
    Dataset out = data;
    out.snr_db = snr_db;
    if (std::isinf(snr_db) && snr_db > 0) return out;
    if (std::isnan(snr_db)) throw InvalidArgument("SNR must not be NaN");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd eta(data.Y.rows(), data.Y.cols());
    for (Index c = 0; c < eta.cols(); ++c)
        for (Index r = 0; r < eta.rows(); ++r) eta(r, c) = normal(rng);

    const double signal = data.Y.squaredNorm();
    const double noise = eta.squaredNorm();
    if (!(noise > 0.0)) return out;
    const double ratio = std::pow(10.0, snr_db / 10.0);
    out.Y = data.Y + eta * std::sqrt(signal / (noise * ratio));
    return out;
}

LambdaRule lambda_rule(const MatrixXd& Y, Index N) {
    if (N < 1) throw InvalidArgument("lambda rule needs N >= 1");
    if (Y.size() == 0) throw InvalidDimension("empty data matrix");
    Eigen::BDCSVD<MatrixXd> svd(Y);
    const VectorXd& s = svd.singularValues();
    const double tol = s(0) * static_cast<double>(std::max(Y.rows(), Y.cols())) *
                       std::numeric_limits<double>::epsilon();
    Index rank = 0;
    while (rank < s.size() && s(rank) > tol) ++rank;
    LambdaRule r;
    r.rank = rank;
    if (rank >= N) {
        r.value = 0.75 * s(N - 1);
    } else {
        r.rank_deficient = true;
        r.value = rank > 0 ? 0.75 * s(rank - 1) : 0.0;
    }
    return r;
}

double gamma_rule(Index M, double delta) {
    if (M < 1) throw InvalidArgument("gamma rule needs M >= 1");
    if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
    const double m = static_cast<double>(M);
    return delta * m * m / (pi * pi);
}

}  // namespace wimf
