#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "adascore/dataset.hpp"
#include "adascore/errors.hpp"
#include "adascore/rng.hpp"
#include "adascore/stein.hpp"

namespace adascore {

struct KrrConfig {
    std::vector<double> ridge_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    double bandwidth = kMedianHeuristic;
    int folds = 5;

    void validate() const {
        if (ridge_grid.empty()) throw ConfigError("empty ridge grid");
        for (double r : ridge_grid)
            if (r <= 0.0) throw ConfigError("ridge values must be positive");
        if (folds < 2) throw ConfigError("need at least two folds");
    }
};

/// Seeded shuffle split into near-equal disjoint folds, shared across all
/// regressions of one discovery run so delta comparisons stay paired.
struct FoldPlan {
    std::vector<int> order;    // shuffled sample indices
    std::vector<int> fold_of;  // per sample

    FoldPlan() = default;
    FoldPlan(int n, int folds, uint64_t seed) {
        order.resize(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        Rng rng(derive_seed(seed, 0x666f6c64ULL));
        rng.shuffle(order);
        fold_of.assign(n, 0);
        for (int t = 0; t < n; ++t) fold_of[order[t]] = t % folds;
    }

    int n() const { return static_cast<int>(fold_of.size()); }
};

namespace detail {

inline Matrix cross_rbf(const Matrix& a, const Matrix& b, double sigma) {
    Matrix d2 = (-2.0 * a * b.transpose());
    d2.colwise() += a.rowwise().squaredNorm();
    d2.rowwise() += b.rowwise().squaredNorm().transpose();
    return (d2.cwiseMax(0.0) / (-2.0 * sigma * sigma)).array().exp();
}

}  // namespace detail

/// Out-of-fold kernel ridge predictions: each fold is predicted by a model
/// fit on the remaining folds, with the ridge chosen from the grid by total
/// out-of-fold squared error. With no regressors the prediction falls back
/// to the training-fold mean.
inline Vector krr_out_of_fold(const Matrix& x, const Vector& y, const KrrConfig& cfg,
                              const FoldPlan& plan) {
    cfg.validate();
    int n = static_cast<int>(y.size());
    if (plan.n() != n) throw ConfigError("fold plan size mismatch");
    if (n < 2 * cfg.folds) throw InsufficientSamples("need n >= 2 * folds");

    int folds = cfg.folds;
    if (x.cols() == 0) {
        Vector pred(n);
        for (int f = 0; f < folds; ++f) {
            double sum = 0.0;
            int cnt = 0;
            for (int i = 0; i < n; ++i)
                if (plan.fold_of[i] != f) {
                    sum += y(i);
                    ++cnt;
                }
            double mean = sum / cnt;
            for (int i = 0; i < n; ++i)
                if (plan.fold_of[i] == f) pred(i) = mean;
        }
        return pred;
    }

    Matrix preds(n, cfg.ridge_grid.size());
    for (int f = 0; f < folds; ++f) {
        std::vector<int> tr, te;
        for (int i = 0; i < n; ++i) (plan.fold_of[i] == f ? te : tr).push_back(i);
        Matrix xtr(tr.size(), x.cols()), xte(te.size(), x.cols());
        Vector ytr(tr.size());
        for (size_t i = 0; i < tr.size(); ++i) {
            xtr.row(i) = x.row(tr[i]);
            ytr(i) = y(tr[i]);
        }
        for (size_t i = 0; i < te.size(); ++i) xte.row(i) = x.row(te[i]);

        double sigma = resolve_bandwidth(xtr, cfg.bandwidth);
        Matrix k = detail::cross_rbf(xtr, xtr, sigma);
        Matrix kte = detail::cross_rbf(xte, xtr, sigma);
        for (size_t g = 0; g < cfg.ridge_grid.size(); ++g) {
            Matrix a = k + cfg.ridge_grid[g] * Matrix::Identity(k.rows(), k.cols());
            Eigen::LDLT<Matrix> ldlt(a);
            if (ldlt.info() != Eigen::Success)
                throw SingularSystem("kernel ridge solve failed");
            Vector alpha = ldlt.solve(ytr);
            Vector p = kte * alpha;
            if (!p.allFinite()) throw SingularSystem("kernel ridge prediction not finite");
            for (size_t i = 0; i < te.size(); ++i) preds(te[i], g) = p(i);
        }
    }
    size_t best = 0;
    double best_mse = std::numeric_limits<double>::infinity();
    for (size_t g = 0; g < cfg.ridge_grid.size(); ++g) {
        double mse = (preds.col(g) - y).squaredNorm() / n;
        if (mse < best_mse) {
            best_mse = mse;
            best = g;
        }
    }
    return preds.col(best);
}

struct ResidualVector {
    int target = -1;
    std::vector<int> subset;
    Vector values;  // out-of-fold residuals
};

/// R_j over the subset Z: column j minus its out-of-fold prediction from the
/// other columns of Z.
inline ResidualVector residual(const Dataset& data, int j, const std::vector<int>& subset,
                               const KrrConfig& cfg, const FoldPlan& plan) {
    bool has_j = false;
    std::vector<int> others;
    for (int c : subset) {
        if (c == j)
            has_j = true;
        else
            others.push_back(c);
    }
    if (!has_j) throw ConfigError("target must belong to the subset");
    Vector y = data.values.col(j);
    Matrix x = data.columns(others);
    ResidualVector rv;
    rv.target = j;
    rv.subset = subset;
    rv.values = y - krr_out_of_fold(x, y, cfg, plan);
    return rv;
}

struct DeltaEstimate {
    int target = -1;
    std::vector<int> subset;
    Vector per_sample_sq_errors;
    ResidualVector residual;
    double mean = 0.0;
};

/// delta_j(V_Z): out-of-fold squared errors of predicting the j-th score
/// column from R_j(V_Z).
inline DeltaEstimate delta(const Dataset& data, const ScoreTable& scores, int j,
                           const std::vector<int>& subset, const KrrConfig& cfg,
                           const FoldPlan& plan) {
    if (scores.subset != subset) throw ConfigError("score table subset mismatch");
    int ji = -1;
    for (size_t k = 0; k < subset.size(); ++k)
        if (subset[k] == j) ji = static_cast<int>(k);
    if (ji < 0) throw ConfigError("target must belong to the subset");

    DeltaEstimate est;
    est.target = j;
    est.subset = subset;
    est.residual = residual(data, j, subset, cfg, plan);
    Vector score_col = scores.first.col(ji);
    Matrix reg(est.residual.values.size(), 1);
    reg.col(0) = est.residual.values;
    Vector pred = krr_out_of_fold(reg, score_col, cfg, plan);
    est.per_sample_sq_errors = (pred - score_col).array().square();
    est.mean = est.per_sample_sq_errors.mean();
    return est;
}

}  // namespace adascore
