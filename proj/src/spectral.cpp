#include "wimf/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "wimf/errors.hpp"

namespace wimf {

void FilterSpec::validate() const {
    if (!(k_bar >= 0.0 && k_bar <= 4.0))
        throw InvalidArgument("k_bar must lie in [0, 4], got " + std::to_string(k_bar));
    if (!(gamma_reg >= 0.0) || !std::isfinite(gamma_reg))
        throw InvalidArgument("gamma must be finite and nonnegative");
}

Laplacian build_laplacian(Index n) {
    if (n < 1) throw InvalidDimension("Laplacian needs n >= 1");
    Laplacian lap;
    lap.n = n;
    lap.matrix = MatrixXd::Zero(n, n);
    lap.matrix.diagonal().setConstant(-2.0);
    if (n > 1) {
        lap.matrix.diagonal(1).setOnes();
        lap.matrix.diagonal(-1).setOnes();
    }
    return lap;
}

MatrixXd laplacian_apply(const MatrixXd& D) {
    const Index n = D.rows();
    MatrixXd out = -2.0 * D;
    if (n > 1) {
        out.topRows(n - 1) += D.bottomRows(n - 1);
        out.bottomRows(n - 1) += D.topRows(n - 1);
    }
    return out;
}

VectorXd laplacian_apply(const VectorXd& d) {
    return laplacian_apply(MatrixXd(d)).col(0);
}

double dirichlet_eigenvalue(Index i, Index n) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(i) / (2.0 * static_cast<double>(n + 1)));
    return -4.0 * s * s;
}

SpectralBasis eigendecompose(const Laplacian& lap) {
    const Index n = lap.n;
    if (n < 1 || lap.matrix.rows() != n || lap.matrix.cols() != n)
        throw InvalidDimension("malformed Laplacian");

    VectorXd diag = lap.matrix.diagonal();
    VectorXd sub = n > 1 ? VectorXd(lap.matrix.diagonal(-1)) : VectorXd(0);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("tridiagonal eigensolver did not converge", std::numeric_limits<double>::infinity());
    }

    SpectralBasis basis;
    basis.lambda = es.eigenvalues();
    basis.gamma = es.eigenvectors();

    // First entry that is clearly nonzero gets a positive sign.
    for (Index j = 0; j < n; ++j) {
        auto v = basis.gamma.col(j);
        const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
        for (Index i = 0; i < n; ++i) {
            if (std::abs(v(i)) > tol) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
    }

    const MatrixXd recon = basis.gamma * basis.lambda.asDiagonal() * basis.gamma.transpose();
    const double resid = (recon - lap.matrix).norm();
    if (!(resid <= 1e-10 * lap.matrix.norm())) {
        throw NumericalFailure("eigendecomposition residual too large: " + std::to_string(resid), resid);
    }
    return basis;
}

VectorXd filter_coefficients(const SpectralBasis& basis, const FilterSpec& spec) {
    spec.validate();
    const VectorXd shifted = basis.lambda.array() + spec.k_bar;
    return (1.0 + spec.gamma_reg * shifted.array().square()).rsqrt().matrix();
}

MatrixXd apply_A_inv_half(const SpectralBasis& basis, const FilterSpec& spec, const MatrixXd& Z) {
    if (Z.rows() != basis.size()) throw InvalidDimension("apply_A_inv_half: row count mismatch");
    const VectorXd c = filter_coefficients(basis, spec);
    return basis.gamma * (c.asDiagonal() * (basis.gamma.transpose() * Z));
}

VectorXd apply_A(const SpectralBasis& basis, const FilterSpec& spec, const VectorXd& d) {
    if (d.size() != basis.size()) throw InvalidDimension("apply_A: length mismatch");
    spec.validate();
    const VectorXd w = (1.0 + spec.gamma_reg * (basis.lambda.array() + spec.k_bar).square()).matrix();
    return basis.gamma * (w.asDiagonal() * (basis.gamma.transpose() * d));
}

VectorXd apply_A(const Laplacian& lap, const FilterSpec& spec, const VectorXd& d) {
    if (d.size() != lap.n) throw InvalidDimension("apply_A: length mismatch");
    spec.validate();
    const VectorXd h = laplacian_apply(d) + spec.k_bar * d;
    const VectorXd hh = laplacian_apply(h) + spec.k_bar * h;
    return d + spec.gamma_reg * hh;
}

VectorXd spectrum(const SpectralBasis& basis, const VectorXd& y) {
    if (y.size() != basis.size()) throw InvalidDimension("spectrum: length mismatch");
    return basis.gamma.transpose() * y;
}

}  // namespace wimf
