#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "adascore/dataset.hpp"
#include "adascore/errors.hpp"

namespace adascore {

constexpr double kMedianHeuristic = -1.0;

struct SteinConfig {
    double eta = 1e-3;
    double bandwidth = kMedianHeuristic;

    void validate() const {
        if (eta <= 0.0) throw ConfigError("eta must be positive");
        if (bandwidth != kMedianHeuristic && bandwidth <= 0.0)
            throw ConfigError("bandwidth must be positive");
    }
};

inline Matrix pairwise_sqdist(const Matrix& x) {
    Vector sq = x.rowwise().squaredNorm();
    Matrix d2 = (-2.0 * x * x.transpose());
    d2.colwise() += sq;
    d2.rowwise() += sq.transpose();
    return d2.cwiseMax(0.0);
}

/// Median pairwise Euclidean distance.
inline double median_bandwidth(const Matrix& x) {
    int n = static_cast<int>(x.rows());
    if (n < 2) throw DegenerateData("need at least two rows for the median heuristic");
    Matrix d2 = pairwise_sqdist(x);
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) vals.push_back(d2(i, j));
    size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    double med = vals[mid];
    if (med <= 0.0) throw DegenerateData("all pairwise distances are zero");
    return std::sqrt(med);
}

inline double resolve_bandwidth(const Matrix& x, double bandwidth) {
    return bandwidth == kMedianHeuristic ? median_bandwidth(x) : bandwidth;
}

/// K_ij = exp(-|v_i - v_j|^2 / (2 sigma^2))
inline Matrix rbf_gram(const Matrix& x, double bandwidth) {
    double sigma = resolve_bandwidth(x, bandwidth);
    Matrix d2 = pairwise_sqdist(x);
    return (-d2 / (2.0 * sigma * sigma)).array().exp();
}

/// Per-sample score table over a chosen column subset: first derivatives
/// from the Stein estimator, cross partials from differentiating its
/// out-of-sample predictor, symmetrized.
struct ScoreTable {
    Matrix first;               // n x m
    std::vector<Matrix> cross;  // m x m mean layout: cross[i] is n x m, entry (l, j) = H_l(i, j)
    std::vector<int> subset;
    double sigma = 0.0;

    double cross_entry(int sample, int i, int j) const { return cross[i](sample, j); }

    Vector cross_column(int i, int j) const { return cross[i].col(j); }
};

namespace detail {

struct SteinSolve {
    Matrix K;
    Matrix G;       // n x m score estimates
    Vector rowsum;  // K * 1
    double sigma;
};

inline SteinSolve stein_solve(const Matrix& x, const SteinConfig& cfg) {
    cfg.validate();
    int n = static_cast<int>(x.rows());
    if (n < 2) throw InsufficientSamples("need at least two samples");
    SteinSolve s;
    s.sigma = resolve_bandwidth(x, cfg.bandwidth);
    Matrix d2 = pairwise_sqdist(x);
    s.K = (-d2 / (2.0 * s.sigma * s.sigma)).array().exp();
    s.rowsum = s.K.rowwise().sum();
    // <grad, K>_ij = sum_k dK(v_i, v_k)/d v_k_j = (rowsum_i * x_ij - (K x)_ij) / sigma^2
    Matrix B = (s.rowsum.asDiagonal() * x - s.K * x) / (s.sigma * s.sigma);
    Matrix A = s.K + cfg.eta * Matrix::Identity(n, n);
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("regularized Gram solve failed");
    s.G = -ldlt.solve(B);
    if (!s.G.allFinite()) throw SingularSystem("score estimate is not finite");
    return s;
}

}  // namespace detail

/// Stein gradient estimator: G = -(K + eta I)^{-1} <grad, K>.
inline Matrix stein_score(const Matrix& x, const SteinConfig& cfg) {
    return detail::stein_solve(x, cfg).G;
}

inline ScoreTable stein_score_table(const Matrix& data, const std::vector<int>& subset,
                                    const SteinConfig& cfg) {
    if (subset.empty()) throw ConfigError("empty column subset");
    Matrix x(data.rows(), subset.size());
    for (size_t k = 0; k < subset.size(); ++k) x.col(k) = data.col(subset[k]);

    detail::SteinSolve s = detail::stein_solve(x, cfg);
    int n = static_cast<int>(x.rows());
    int m = static_cast<int>(subset.size());
    double s2 = s.sigma * s.sigma;
    double s4 = s2 * s2;

    // The fitted score extends off-sample as
    //   g_j(z) = -(1/eta) [ sum_k K(z, v_k) G_kj + sum_k dK(z, v_k)/dv_k_j ],
    // and H(l, i, j) is its derivative in z_i evaluated at sample l.
    std::vector<Matrix> H(m, Matrix(n, m));
    Matrix Di(n, n);  // Di(l, k) = x(l, i) - x(k, i)
    for (int i = 0; i < m; ++i) {
        Di = x.col(i).replicate(1, n);
        Di.rowwise() -= x.col(i).transpose();
        Matrix KDi = s.K.cwiseProduct(Di);
        Vector kdi_rowsum = KDi.rowwise().sum();
        Matrix t1 = KDi * s.G / s2;  // (l, j)
        for (int j = 0; j < m; ++j) {
            Vector t2 = (x.col(j).cwiseProduct(kdi_rowsum) - KDi * x.col(j)) / s4;
            Vector t3 = (i == j) ? Vector(s.rowsum / s2) : Vector(Vector::Zero(n));
            H[i].col(j) = -(1.0 / cfg.eta) * (-t1.col(j) - t2 + t3);
        }
    }
    ScoreTable table;
    table.first = s.G;
    table.subset = subset;
    table.sigma = s.sigma;
    table.cross.assign(m, Matrix(n, m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) table.cross[i].col(j) = 0.5 * (H[i].col(j) + H[j].col(i));
    return table;
}

/// Mean cross-partial estimates over disjoint row blocks. Blocks are cut
/// from the supplied row order, each gets an independent Stein fit; the
/// resulting per-block means behave like independent replicates for the
/// zero-mean test.
inline std::vector<Matrix> batched_cross_means(const Matrix& data, const std::vector<int>& subset,
                                               const SteinConfig& cfg,
                                               const std::vector<int>& row_order, int batches) {
    int n = static_cast<int>(data.rows());
    if (batches < 2) throw ConfigError("need at least two batches");
    if (n / batches < 3) throw InsufficientSamples("too few samples per batch");
    std::vector<Matrix> means;
    means.reserve(batches);
    for (int b = 0; b < batches; ++b) {
        int lo = static_cast<int>(static_cast<long>(n) * b / batches);
        int hi = static_cast<int>(static_cast<long>(n) * (b + 1) / batches);
        Matrix block(hi - lo, data.cols());
        for (int r = lo; r < hi; ++r) block.row(r - lo) = data.row(row_order[r]);
        ScoreTable t = stein_score_table(block, subset, cfg);
        int m = static_cast<int>(subset.size());
        Matrix mean(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) mean(i, j) = t.cross[i].col(j).mean();
        means.push_back(mean);
    }
    return means;
}

}  // namespace adascore
