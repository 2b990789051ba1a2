#include "wimf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wimf/errors.hpp"

namespace wimf {

namespace {

// (L + k I) applied to each column of D with its own k.
MatrixXd shifted_laplacian(const MatrixXd& D, const VectorXd& k) {
    MatrixXd out = laplacian_apply(D);
    out += D * k.asDiagonal();
    return out;
}

double helmholtz_penalty(const VectorXd& d, double k_bar) {
    return (laplacian_apply(d) + k_bar * d).squaredNorm();
}

bool all_finite(const FactorModel& m) {
    return m.D.allFinite() && m.X.allFinite() && m.k_bar.allFinite();
}

void update_k(FactorModel& m) {
    for (Index i = 0; i < m.modes(); ++i) m.k_bar(i) = optimal_k_bar(m.D.col(i));
}

}  // namespace

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::certificate: return "certificate";
        case StopReason::mode_cap: return "mode_cap";
        case StopReason::max_outer_iters: return "max_outer_iters";
        case StopReason::zero_data: return "zero_data";
    }
    return "unknown";
}

FactorModel FactorModel::empty(Index n, Index m, double lambda_reg, double gamma_reg) {
    FactorModel f;
    f.D = MatrixXd::Zero(n, 0);
    f.X = MatrixXd::Zero(m, 0);
    f.k_bar = VectorXd::Zero(0);
    f.lambda_reg = lambda_reg;
    f.gamma_reg = gamma_reg;
    return f;
}

void FactorModel::validate(Index n, Index m) const {
    if (D.rows() != n || X.rows() != m) throw InvalidDimension("factor model does not match the data shape");
    if (D.cols() != X.cols() || D.cols() != k_bar.size())
        throw InvalidDimension("D, X and k_bar must share the column count");
    for (Index i = 0; i < k_bar.size(); ++i)
        if (!(k_bar(i) >= 0.0 && k_bar(i) <= 4.0)) throw InvalidArgument("k_bar entries must lie in [0, 4]");
    if (!(lambda_reg > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!(gamma_reg >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
}

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (max_outer_iters < 1 || max_inner_iters < 1) throw InvalidArgument("iteration caps must be positive");
    if (step_size && !(*step_size > 0.0)) throw InvalidArgument("step size must be positive");
    if (stationarity_tol && !(*stationarity_tol > 0.0)) throw InvalidArgument("stationarity tolerance must be positive");
    if (max_modes && *max_modes < 1) throw InvalidArgument("max_modes must be positive");
    line_search.validate();
}

double objective(const FactorModel& model, const MatrixXd& Y) {
    model.validate(Y.rows(), Y.cols());
    const double fit = 0.5 * (Y - model.D * model.X.transpose()).squaredNorm();
    double reg = model.X.squaredNorm();
    for (Index i = 0; i < model.modes(); ++i) {
        const VectorXd d = model.D.col(i);
        reg += d.squaredNorm() + model.gamma_reg * helmholtz_penalty(d, model.k_bar(i));
    }
    return fit + 0.5 * model.lambda_reg * reg;
}

double optimal_k_bar(const VectorXd& d) {
    const double nn = d.squaredNorm();
    if (!(nn > 0.0)) return 0.0;
    return std::clamp(-d.dot(laplacian_apply(d)) / nn, 0.0, 4.0);
}

double theta_bar(const VectorXd& d, const VectorXd& x, double gamma_reg) {
    if (!(gamma_reg >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
    if (!(d.squaredNorm() > 0.0)) return x.squaredNorm();
    return x.squaredNorm() + d.squaredNorm() + gamma_reg * helmholtz_penalty(d, optimal_k_bar(d));
}

Gradients gradients(const FactorModel& model, const MatrixXd& Y) {
    model.validate(Y.rows(), Y.cols());
    const double lam = model.lambda_reg;
    const MatrixXd R = model.D * model.X.transpose() - Y;
    Gradients g;
    const MatrixXd M = shifted_laplacian(model.D, model.k_bar);
    g.dD = R * model.X + lam * model.D + lam * model.gamma_reg * shifted_laplacian(M, model.k_bar);
    g.dX = R.transpose() * model.D + lam * model.X;
    return g;
}

double stationarity(const FactorModel& model, const MatrixXd& Y) {
    if (model.modes() == 0) return 0.0;
    const Gradients g = gradients(model, Y);
    return std::max(g.dD.cwiseAbs().maxCoeff(), g.dX.cwiseAbs().maxCoeff());
}

FactorModel block_descent_pass(const FactorModel& model, const MatrixXd& Y, double step_size) {
    if (model.modes() < 1) throw PreconditionViolation("block_descent_pass needs at least one mode");
    if (!(step_size > 0.0)) throw InvalidArgument("step size must be positive");
    model.validate(Y.rows(), Y.cols());
    const double lam = model.lambda_reg;
    FactorModel next = model;

    const MatrixXd M = shifted_laplacian(model.D, model.k_bar);
    const MatrixXd gD = (model.D * model.X.transpose() - Y) * model.X + lam * model.D +
                        lam * model.gamma_reg * shifted_laplacian(M, model.k_bar);
    next.D = model.D - step_size * gD;

    const MatrixXd gX = (next.D * model.X.transpose() - Y).transpose() * next.D + lam * model.X;
    next.X = model.X - step_size * gX;

    if (!next.D.allFinite() || !next.X.allFinite())
        throw DivergedStep("non-finite iterate; reduce the step size");
    update_k(next);
    return next;
}

FactorModel exact_block_pass(const FactorModel& model, const MatrixXd& Y, const SpectralBasis& basis) {
    model.validate(Y.rows(), Y.cols());
    if (basis.size() != Y.rows()) throw InvalidDimension("basis does not match the data");
    const double lam = model.lambda_reg;
    FactorModel next = model;
    MatrixXd R = Y - next.D * next.X.transpose();

    for (Index i = 0; i < next.modes(); ++i) {
        R.noalias() += next.D.col(i) * next.X.col(i).transpose();
        const VectorXd rhs = basis.gamma.transpose() * (R * next.X.col(i));
        const VectorXd denom =
            (next.X.col(i).squaredNorm() +
             lam * (1.0 + next.gamma_reg * (basis.lambda.array() + next.k_bar(i)).square()))
                .matrix();
        next.D.col(i) = basis.gamma * rhs.cwiseQuotient(denom);
        R.noalias() -= next.D.col(i) * next.X.col(i).transpose();
    }
    for (Index i = 0; i < next.modes(); ++i) {
        R.noalias() += next.D.col(i) * next.X.col(i).transpose();
        next.X.col(i) = R.transpose() * next.D.col(i) / (next.D.col(i).squaredNorm() + lam);
        R.noalias() -= next.D.col(i) * next.X.col(i).transpose();
    }
    if (!all_finite(next)) throw NumericalFailure("non-finite iterate in exact block pass");
    update_k(next);
    return next;
}

DescentResult descend_to_stationary(const FactorModel& model, const MatrixXd& Y, const SolverConfig& cfg,
                                    const SpectralBasis& basis) {
    cfg.validate();
    const double tol = cfg.stationarity_tol.value_or(1e-6 * Y.norm());
    DescentResult res{model, 0, false};
    if (model.modes() == 0) {
        res.converged = true;
        return res;
    }
    const double alpha0 = cfg.step_size.value_or(
        1.0 / (std::pow(spectral_norm(Y), 2) + model.lambda_reg * (1.0 + 16.0 * model.gamma_reg)));

    double f = objective(res.model, Y);
    for (int it = 0; it < cfg.max_inner_iters; ++it) {
        if (stationarity(res.model, Y) < tol) {
            res.converged = true;
            return res;
        }
        std::optional<FactorModel> accepted;
        double fn = f;
        if (cfg.descent == DescentMethod::exact_block) {
            FactorModel cand = exact_block_pass(res.model, Y, basis);
            fn = objective(cand, Y);
            // Each block step is an exact minimiser; allow rounding noise in the re-evaluated objective.
            if (fn <= f + 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f)) accepted = std::move(cand);
        } else {
            double alpha = alpha0;
            for (int halving = 0; halving <= 50; ++halving, alpha *= 0.5) {
                try {
                    FactorModel cand = block_descent_pass(res.model, Y, alpha);
                    fn = objective(cand, Y);
                    if (fn < f) {
                        accepted = std::move(cand);
                        break;
                    }
                } catch (const DivergedStep&) {
                }
            }
        }
        if (!accepted) return res;  // no further decrease at working precision
        res.model = std::move(*accepted);
        res.iterations = it + 1;
        f = fn;
    }
    res.converged = stationarity(res.model, Y) < tol;
    return res;
}

double optimal_tau(double residual_inner, double lambda_reg, const VectorXd& d_star, const VectorXd& x_star) {
    if (!(residual_inner >= lambda_reg)) {
        std::ostringstream os;
        os << "optimal_tau: residual inner product " << residual_inner << " is below lambda " << lambda_reg;
        throw PreconditionViolation(os.str());
    }
    const double scale = d_star.norm() * x_star.norm();
    if (!(scale > 0.0)) throw PreconditionViolation("optimal_tau: zero direction");
    return std::sqrt(residual_inner - lambda_reg) / scale;
}

FactorModel append_mode(const FactorModel& model, const PolarSolution& sol, double tau) {
    if (!(tau >= 0.0)) throw InvalidArgument("tau must be nonnegative");
    if (sol.d_star.size() != model.D.rows() || sol.x_star.size() != model.X.rows())
        throw InvalidDimension("polar solution does not match the model");
    FactorModel next = model;
    const Index N = model.modes();
    next.D.conservativeResize(Eigen::NoChange, N + 1);
    next.X.conservativeResize(Eigen::NoChange, N + 1);
    next.k_bar.conservativeResize(N + 1);
    next.D.col(N) = tau * sol.d_star;
    next.X.col(N) = tau * sol.x_star;
    next.k_bar(N) = sol.k_bar_star;
    return next;
}

FactorModel prune_columns(const FactorModel& model, double threshold) {
    std::vector<Index> keep;
    for (Index i = 0; i < model.modes(); ++i)
        if (model.D.col(i).norm() * model.X.col(i).norm() >= threshold) keep.push_back(i);
    if (static_cast<Index>(keep.size()) == model.modes()) return model;
    FactorModel next = FactorModel::empty(model.D.rows(), model.X.rows(), model.lambda_reg, model.gamma_reg);
    const Index K = static_cast<Index>(keep.size());
    next.D.resize(model.D.rows(), K);
    next.X.resize(model.X.rows(), K);
    next.k_bar.resize(K);
    for (Index j = 0; j < K; ++j) {
        next.D.col(j) = model.D.col(keep[j]);
        next.X.col(j) = model.X.col(keep[j]);
        next.k_bar(j) = model.k_bar(keep[j]);
    }
    return next;
}

FactorizeResult factorize(const MatrixXd& Y, const SolverConfig& cfg, double lambda_reg, double gamma_reg,
                          const std::optional<FactorModel>& init) {
    cfg.validate();
    if (Y.size() == 0) throw InvalidDimension("empty data matrix");
    if (!Y.allFinite()) throw InvalidArgument("data matrix has non-finite entries");
    if (!(lambda_reg > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!(gamma_reg >= 0.0)) throw InvalidArgument("gamma must be nonnegative");

    const SpectralBasis basis = eigendecompose(build_laplacian(Y.rows()));
    FactorizeResult out;
    out.model = init ? *init : FactorModel::empty(Y.rows(), Y.cols(), lambda_reg, gamma_reg);
    out.model.lambda_reg = lambda_reg;
    out.model.gamma_reg = gamma_reg;
    out.model.validate(Y.rows(), Y.cols());

    const double y_norm = Y.norm();
    const double prune_threshold = 1e-12 * y_norm;

    for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
        TraceRecord rec;
        rec.outer = outer;
        if (out.model.modes() > 0) {
            DescentResult dr = descend_to_stationary(out.model, Y, cfg, basis);
            rec.inner_iters = dr.iterations;
            rec.inner_converged = dr.converged;
            out.model = prune_columns(dr.model, prune_threshold);
            if (!dr.converged) {
                out.warnings.push_back("outer iteration " + std::to_string(outer) +
                                       ": inner descent stopped before reaching the stationarity tolerance");
            }
        }
        rec.modes = out.model.modes();
        rec.objective = objective(out.model, Y);
        rec.objective_after = rec.objective;
        if (!std::isfinite(rec.objective)) {
            out.trace.records.push_back(rec);
            if (cfg.on_record) cfg.on_record(rec);
            throw NumericalFailure("objective is not finite at outer iteration " + std::to_string(outer));
        }

        const MatrixXd R = Y - out.model.D * out.model.X.transpose();
        const PolarSolution sol = solve_polar(basis, gamma_reg, R / lambda_reg, cfg.line_search);
        rec.polar = sol.value;
        rec.polar_k_bar = sol.k_bar_star;
        const OptimalityGap gap = optimality_gap(sol.value, cfg.epsilon);

        if (gap.verdict == GapVerdict::optimal) {
            out.trace.records.push_back(rec);
            if (cfg.on_record) cfg.on_record(rec);
            out.reason = y_norm > 0.0 ? StopReason::certificate : StopReason::zero_data;
            if (gap.undershoot && y_norm > 0.0)
                out.warnings.push_back("polar value " + std::to_string(sol.value) +
                                       " is below 1 - epsilon at a stationary point");
            return out;
        }
        if (cfg.max_modes && out.model.modes() >= *cfg.max_modes) {
            out.trace.records.push_back(rec);
            if (cfg.on_record) cfg.on_record(rec);
            out.reason = StopReason::mode_cap;
            return out;
        }

        const double inner = sol.d_star.dot(R * sol.x_star);
        rec.tau = optimal_tau(inner, lambda_reg, sol.d_star, sol.x_star);
        out.model = append_mode(out.model, sol, rec.tau);
        rec.appended = true;
        rec.objective_after = objective(out.model, Y);
        out.trace.records.push_back(rec);
        if (cfg.on_record) cfg.on_record(rec);
        if (!all_finite(out.model) || !std::isfinite(rec.objective_after))
            throw NumericalFailure("non-finite model after append");
    }
    out.reason = StopReason::max_outer_iters;
    return out;
}

}  // namespace wimf
