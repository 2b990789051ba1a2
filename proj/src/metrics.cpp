#include "wimf/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <numeric>
#include <thread>

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "wimf/errors.hpp"

namespace wimf {

namespace {

// Columns scaled to unit norm; columns at or below `floor_rel` times the
// largest norm become exact zeros.
MatrixXd unit_columns(const MatrixXd& A, std::vector<bool>& zero, double floor_rel = 1e-12) {
    MatrixXd U = A;
    zero.assign(A.cols(), false);
    const double top = A.cols() > 0 ? A.colwise().norm().maxCoeff() : 0.0;
    for (Index j = 0; j < A.cols(); ++j) {
        const double nrm = A.col(j).norm();
        if (!(nrm > floor_rel * top) || !(nrm > 0.0)) {
            U.col(j).setZero();
            zero[j] = true;
        } else {
            U.col(j) /= nrm;
        }
    }
    return U;
}

template <class PairError>
std::vector<double> pair_errors(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match,
                                PairError&& err) {
    if (recovered.rows() != truth.rows()) throw InvalidDimension("recovered and truth modes differ in length");
    if (static_cast<Index>(match.truth_index.size()) != recovered.cols())
        throw InvalidDimension("match does not cover the recovered modes");
    std::vector<double> out;
    for (Index i = 0; i < recovered.cols(); ++i) {
        const Index j = match.truth_index[i];
        if (j < 0) continue;
        if (j >= truth.cols()) throw InvalidDimension("match refers to a missing truth mode");
        out.push_back(err(i, j, match.signs[i]));
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ModeMatch match_modes(const MatrixXd& recovered, const MatrixXd& truth) {
    if (recovered.rows() != truth.rows()) throw InvalidDimension("recovered and truth modes differ in length");
    std::vector<bool> rz, tz;
    const MatrixXd R = unit_columns(recovered, rz, 0.0);
    const MatrixXd T = unit_columns(truth, tz);
    const MatrixXd C = R.transpose() * T;

    const Index N = recovered.cols();
    ModeMatch m;
    m.truth_index.assign(N, -1);
    m.signs.assign(N, 1);
    m.degenerate.assign(N, false);
    m.order.resize(N);
    std::iota(m.order.begin(), m.order.end(), Index{0});
    const VectorXd norms = recovered.colwise().norm().transpose();
    std::stable_sort(m.order.begin(), m.order.end(), [&](Index a, Index b) { return norms(a) > norms(b); });

    std::vector<bool> used(truth.cols(), false);
    for (Index i : m.order) {
        Index best = -1;
        double best_abs = -1.0;
        for (Index j = 0; j < truth.cols(); ++j) {
            if (used[j]) continue;
            const double a = std::abs(C(i, j));
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < 0) continue;
        used[best] = true;
        m.truth_index[i] = best;
        m.signs[i] = C(i, best) < 0.0 ? -1 : 1;
        m.degenerate[i] = rz[i] || tz[best];
    }
    return m;
}

std::vector<double> mode_errors(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match) {
    std::vector<bool> rz, tz;
    const MatrixXd R = unit_columns(recovered, rz, 0.0);
    const MatrixXd T = unit_columns(truth, tz);
    return pair_errors(recovered, truth, match,
                       [&](Index i, Index j, int c) { return (R.col(i) - c * T.col(j)).squaredNorm(); });
}

double mode_mse(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match) {
    return mean_of(mode_errors(recovered, truth, match));
}

VectorXd magnitude_spectrum(const VectorXd& v, int pad_factor) {
    if (pad_factor < 1) throw InvalidArgument("pad factor must be >= 1");
    const Index n = v.size() * pad_factor;
    std::vector<double> in(n, 0.0);
    for (Index i = 0; i < v.size(); ++i) in[i] = v(i);
    std::vector<std::complex<double>> out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    VectorXd mag(n);
    for (Index i = 0; i < n; ++i) mag(i) = std::abs(out[i]);
    return mag;
}

std::vector<double> fourier_errors(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match,
                                   int pad_factor) {
    auto spectra = [&](const MatrixXd& A) {
        MatrixXd S(A.rows() * pad_factor, A.cols());
        for (Index j = 0; j < A.cols(); ++j) S.col(j) = magnitude_spectrum(A.col(j), pad_factor);
        return S;
    };
    std::vector<bool> rz, tz;
    const MatrixXd R = unit_columns(spectra(recovered), rz, 0.0);
    const MatrixXd T = unit_columns(spectra(truth), tz);
    return pair_errors(recovered, truth, match,
                       [&](Index i, Index j, int) { return (R.col(i) - T.col(j)).squaredNorm(); });
}

double fourier_mse(const MatrixXd& recovered, const MatrixXd& truth, const ModeMatch& match, int pad_factor) {
    return mean_of(fourier_errors(recovered, truth, match, pad_factor));
}

MatrixXd pca_baseline(const MatrixXd& Y, Index N, bool* padded) {
    if (N < 1) throw InvalidArgument("PCA needs N >= 1");
    Eigen::BDCSVD<MatrixXd> svd(Y, Eigen::ComputeThinU);
    const VectorXd& s = svd.singularValues();
    const double tol = s.size() ? s(0) * static_cast<double>(std::max(Y.rows(), Y.cols())) *
                                      std::numeric_limits<double>::epsilon()
                                : 0.0;
    MatrixXd U = MatrixXd::Zero(Y.rows(), N);
    bool pad = false;
    for (Index j = 0; j < N; ++j) {
        if (j >= s.size() || !(s(j) > tol)) {
            pad = true;
            continue;
        }
        U.col(j) = svd.matrixU().col(j);
        for (Index i = 0; i < U.rows(); ++i) {
            if (std::abs(U(i, j)) > 1e-12) {
                if (U(i, j) < 0.0) U.col(j) = -U.col(j);
                break;
            }
        }
    }
    if (padded) *padded = pad;
    return U;
}

EvalReport evaluate(const MatrixXd& recovered, const MatrixXd& truth, int pad_factor) {
    EvalReport r;
    r.match = match_modes(recovered, truth);
    r.per_mode = mode_errors(recovered, truth, r.match);
    r.per_mode_fourier = fourier_errors(recovered, truth, r.match, pad_factor);
    r.mse = mean_of(r.per_mode);
    r.fourier_mse = mean_of(r.per_mode_fourier);
    return r;
}

Stats summarize(const std::vector<double>& xs) {
    Stats s;
    if (xs.empty()) return s;
    s.mean = mean_of(xs);
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return s;
}

TrialRecord run_trial(const MonteCarloTask& task, std::uint64_t seed) {
    TrialRecord rec;
    rec.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        GeneratorParams params = table_params(task.kind, seed);
        if (task.delta) params.delta = *task.delta;
        const Dataset clean = generate(task.grid, params);
        const Dataset data = add_noise(clean, task.snr_db, noise_seed(seed));

        const Index cap = std::min({clean.target_modes(), data.Y.rows(), data.Y.cols()});
        const Index N = task.max_modes ? std::min<Index>(*task.max_modes, cap) : cap;
        rec.lambda_reg = task.lambda_reg.value_or(lambda_rule(data.Y, N).value);
        rec.gamma_reg = task.gamma_reg.value_or(gamma_rule(data.Y.rows(), params.delta));

        SolverConfig cfg = task.solver;
        cfg.max_modes = static_cast<int>(N);
        rec.fit = factorize(data.Y, cfg, rec.lambda_reg, rec.gamma_reg);
        rec.wimf = evaluate(rec.fit.model.D, clean.truth, task.pad_factor);
        rec.pca = evaluate(pca_baseline(data.Y, N), clean.truth, task.pad_factor);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

MonteCarloReport monte_carlo(const MonteCarloTask& task) {
    if (task.trials < 1) throw InvalidArgument("trials must be >= 1");
    MonteCarloReport rep;
    rep.kind = task.kind;
    rep.snr_db = task.snr_db;
    rep.trials = task.trials;
    rep.records.resize(task.trials);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < task.trials; i = next++)
            rep.records[i] = run_trial(task, task.base_seed + static_cast<std::uint64_t>(i));
    };
    const int nthreads = std::clamp(task.threads, 1, task.trials);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> wm, wf, pm, pf;
    for (const auto& r : rep.records) {
        if (!r.ok) {
            ++rep.failures;
            continue;
        }
        wm.push_back(r.wimf.mse);
        wf.push_back(r.wimf.fourier_mse);
        pm.push_back(r.pca.mse);
        pf.push_back(r.pca.fourier_mse);
    }
    if (rep.failures > 0 && !task.exclude_failures) {
        for (const auto& r : rep.records)
            if (!r.ok) throw NumericalFailure("trial with seed " + std::to_string(r.seed) + " failed: " + r.error);
    }
    rep.wimf_mse = summarize(wm);
    rep.wimf_fmse = summarize(wf);
    rep.pca_mse = summarize(pm);
    rep.pca_fmse = summarize(pf);
    return rep;
}

}  // namespace wimf
