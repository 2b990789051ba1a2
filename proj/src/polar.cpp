#include "wimf/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wimf/errors.hpp"

namespace wimf {

namespace {

double top_eigenvalue(const MatrixXd& S) {
    if (S.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("symmetric eigensolver failed in line search");
    return std::max(es.eigenvalues()(es.eigenvalues().size() - 1), 0.0);
}

struct Sample {
    double k;
    double v;
};

// Strictly better, or equal and further left.
bool better(const Sample& a, const Sample& b) { return a.v > b.v || (a.v == b.v && a.k < b.k); }

}  // namespace

void LineSearchConfig::validate() const {
    if (coarse_points < 2) throw InvalidArgument("coarse_points must be >= 2");
    if (refine_points < 2) throw InvalidArgument("refine_points must be >= 2");
    if (!(lo >= 0.0 && hi <= 4.0 && lo < hi)) throw InvalidArgument("line-search domain must be inside [0, 4]");
    if (refine_radius && !(*refine_radius > 0.0 && *refine_radius <= hi - lo))
        throw InvalidArgument("refine_radius must be positive and at most the domain width");
    if (refine_levels < 0) throw InvalidArgument("refine_levels must be >= 0");
    if (candidates < 1) throw InvalidArgument("candidates must be >= 1");
}

double spectral_norm(const MatrixXd& Z) {
    if (Z.size() == 0) return 0.0;
    Eigen::BDCSVD<MatrixXd> svd(Z);
    return svd.singularValues()(0);
}

LineSearchObjective::LineSearchObjective(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z)
    : basis_(basis), gamma_(gamma_reg) {
    if (Z.rows() != basis.size()) throw InvalidDimension("polar: Z row count must match the basis");
    if (!(gamma_reg >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
    W_ = basis.gamma.transpose() * Z;
    use_row_gram_ = W_.rows() <= W_.cols();
    if (use_row_gram_) gram_ = W_ * W_.transpose();
    z_norm_ = std::sqrt(top_eigenvalue(use_row_gram_ ? gram_ : MatrixXd(W_.transpose() * W_)));
}

VectorXd LineSearchObjective::coefficients(double k_bar) const {
    return (1.0 + gamma_ * (basis_.lambda.array() + k_bar).square()).rsqrt().matrix();
}

double LineSearchObjective::operator()(double k_bar) const {
    const VectorXd f = coefficients(k_bar);
    if (use_row_gram_) {
        const MatrixXd S = f.asDiagonal() * gram_ * f.asDiagonal();
        return std::sqrt(top_eigenvalue(S));
    }
    const MatrixXd FW = f.asDiagonal() * W_;
    return std::sqrt(top_eigenvalue(FW.transpose() * FW));
}

PolarSolution LineSearchObjective::maximiser(double k_bar) const {
    const Index n = W_.rows();
    const Index m = W_.cols();
    PolarSolution sol;
    sol.k_bar_star = k_bar;
    sol.d_star = VectorXd::Zero(n);
    sol.x_star = VectorXd::Zero(m);

    const VectorXd f = coefficients(k_bar);
    const MatrixXd FW = f.asDiagonal() * W_;
    VectorXd u;  // top left singular vector of FW, in spectral coordinates
    double sigma = 0.0;
    if (use_row_gram_) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.asDiagonal() * gram_ * f.asDiagonal());
        if (es.info() != Eigen::Success) throw NumericalFailure("polar eigensolver failed");
        sigma = std::sqrt(std::max(es.eigenvalues()(n - 1), 0.0));
        u = es.eigenvectors().col(n - 1);
    } else {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(FW.transpose() * FW);
        if (es.info() != Eigen::Success) throw NumericalFailure("polar eigensolver failed");
        sigma = std::sqrt(std::max(es.eigenvalues()(m - 1), 0.0));
        if (sigma > 0.0) u = (FW * es.eigenvectors().col(m - 1)) / sigma;
    }
    sol.value = sigma;
    if (!(sigma > 0.0)) {
        sol.degenerate = true;
        return sol;
    }
    u.normalize();
    VectorXd x = FW.transpose() * u / sigma;
    VectorXd d = basis_.gamma * f.cwiseProduct(u);

    Index imax = 0;
    d.cwiseAbs().maxCoeff(&imax);
    if (d(imax) < 0.0) {
        d = -d;
        x = -x;
    }
    sol.d_star = d;
    sol.x_star = x.normalized();
    return sol;
}

double line_search_objective(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z, double k_bar) {
    FilterSpec{k_bar, gamma_reg}.validate();
    return LineSearchObjective(basis, gamma_reg, Z)(k_bar);
}

PolarSolution solve_polar(const SpectralBasis& basis, double gamma_reg, const MatrixXd& Z,
                          const LineSearchConfig& cfg) {
    cfg.validate();
    const LineSearchObjective f(basis, gamma_reg, Z);
    if (!(f.z_norm() > 0.0)) {
        PolarSolution sol;
        sol.d_star = VectorXd::Zero(Z.rows());
        sol.x_star = VectorXd::Zero(Z.cols());
        sol.degenerate = true;
        return sol;
    }

    std::vector<double> ks;
    ks.reserve(cfg.coarse_points + basis.size());
    const double h = cfg.coarse_step();
    for (int i = 0; i < cfg.coarse_points; ++i) ks.push_back(i + 1 == cfg.coarse_points ? cfg.hi : cfg.lo + i * h);
    if (cfg.eigenvalue_anchors) {
        for (Index i = 0; i < basis.size(); ++i) {
            const double a = -basis.lambda(i);
            if (a >= cfg.lo && a <= cfg.hi) ks.push_back(a);
        }
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    int evals = 0;
    std::vector<Sample> coarse;
    coarse.reserve(ks.size());
    for (double k : ks) {
        coarse.push_back({k, f(k)});
        ++evals;
    }

    double grid_max = 0.0;
    for (const auto& s : coarse) grid_max = std::max(grid_max, s.v);

    // Local maxima of the coarse profile, best first.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const bool left = i == 0 || coarse[i].v >= coarse[i - 1].v;
        const bool right = i + 1 == coarse.size() || coarse[i].v >= coarse[i + 1].v;
        if (left && right) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](std::size_t a, std::size_t b) { return better(coarse[a], coarse[b]); });
    if (peaks.size() > static_cast<std::size_t>(cfg.candidates)) peaks.resize(cfg.candidates);

    Sample best = coarse[peaks.front()];
    const double radius0 = cfg.refine_radius.value_or(h);
    for (std::size_t p : peaks) {
        Sample local = coarse[p];
        double radius = radius0;
        for (int level = 0; level < cfg.refine_levels; ++level) {
            const double a = std::max(cfg.lo, local.k - radius);
            const double b = std::min(cfg.hi, local.k + radius);
            const double step = (b - a) / static_cast<double>(cfg.refine_points - 1);
            Sample lvl = local;
            for (int j = 0; j < cfg.refine_points; ++j) {
                const double k = j + 1 == cfg.refine_points ? b : a + j * step;
                const Sample s{k, f(k)};
                ++evals;
                if (better(s, lvl)) lvl = s;
            }
            local = lvl;
            radius = step;
        }
        if (better(local, best)) best = local;
    }

    PolarSolution sol = f.maximiser(best.k);
    sol.evaluations = evals + 1;
    sol.upper_bound = std::max(sol.value, grid_max + lipschitz_constant(gamma_reg, f.z_norm()) * h / 2.0);
    return sol;
}

double lipschitz_constant(double gamma_reg, double z_spectral_norm) {
    if (!(gamma_reg >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
    if (gamma_reg >= 1.0 / 32.0) return 2.0 / (3.0 * std::sqrt(3.0)) * std::sqrt(gamma_reg) * z_spectral_norm;
    return 4.0 * gamma_reg * std::pow(1.0 + 16.0 * gamma_reg, -1.5) * z_spectral_norm;
}

double lipschitz_bound(double gamma_reg, const MatrixXd& Z) { return lipschitz_constant(gamma_reg, spectral_norm(Z)); }

OptimalityGap optimality_gap(double polar_value, double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    OptimalityGap g;
    g.gap = polar_value - 1.0;
    g.verdict = polar_value <= 1.0 + epsilon ? GapVerdict::optimal : GapVerdict::continue_search;
    g.undershoot = polar_value < 1.0 - epsilon;
    return g;
}

}  // namespace wimf
