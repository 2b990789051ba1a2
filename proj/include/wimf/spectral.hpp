#pragma once

#include <Eigen/Dense>

namespace wimf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Second-difference operator with fixed (Dirichlet) ends, unit spacing.
struct Laplacian {
    Index n = 0;
    MatrixXd matrix;
    double delta_l = 1.0;
};

// Eigenpairs of the Laplacian: columns of `gamma` are orthonormal
// eigenvectors, `lambda` holds eigenvalues in ascending order.
struct SpectralBasis {
    MatrixXd gamma;
    VectorXd lambda;

    Index size() const { return lambda.size(); }
};

// k_bar is the squared wavenumber in (rad/sample)^2, restricted to [0, 4].
struct FilterSpec {
    double k_bar = 0.0;
    double gamma_reg = 0.0;

    void validate() const;
};

Laplacian build_laplacian(Index n);

// O(n) products with the tridiagonal operator; no matrix is formed.
VectorXd laplacian_apply(const VectorXd& d);
MatrixXd laplacian_apply(const MatrixXd& D);

SpectralBasis eigendecompose(const Laplacian& lap);

// Closed-form eigenvalue -4 sin^2(pi i / (2(n+1))), i = 1..n.
double dirichlet_eigenvalue(Index i, Index n);

// 1 / sqrt(1 + gamma (k_bar + Lambda_ii)^2): a first-order Butterworth
// response centred at Lambda = -k_bar.
VectorXd filter_coefficients(const SpectralBasis& basis, const FilterSpec& spec);

// Gamma diag(coefficients) Gamma^T Z.
MatrixXd apply_A_inv_half(const SpectralBasis& basis, const FilterSpec& spec, const MatrixXd& Z);

// d + gamma (L + k_bar I)^2 d.
VectorXd apply_A(const SpectralBasis& basis, const FilterSpec& spec, const VectorXd& d);
VectorXd apply_A(const Laplacian& lap, const FilterSpec& spec, const VectorXd& d);

// Gamma^T y.
VectorXd spectrum(const SpectralBasis& basis, const VectorXd& y);

}  // namespace wimf
