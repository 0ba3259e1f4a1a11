#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "adascore/dataset.hpp"
#include "adascore/errors.hpp"
#include "adascore/rng.hpp"

namespace adascore {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool rejected = false;
};

/// Two-sided one-sample t-test of zero mean. Zero-variance samples resolve
/// by the sign of the mean: exactly zero gives p = 1, anything else p = 0.
inline TestResult t_test_zero_mean(const Vector& samples, double level) {
    long n = samples.size();
    if (n < 2) throw TooFewSamples("t-test needs at least two samples");
    double mean = samples.mean();
    double var = (samples.array() - mean).square().sum() / (n - 1);
    TestResult res;
    if (var <= 0.0) {
        res.statistic = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        res.p_value = mean == 0.0 ? 1.0 : 0.0;
    } else {
        double t = mean / std::sqrt(var / n);
        boost::math::students_t dist(static_cast<double>(n - 1));
        res.statistic = t;
        res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    res.rejected = res.p_value < level;
    return res;
}

namespace detail {

inline Matrix rbf_gram_rows(const Matrix& x, double sigma) {
    Matrix d2 = (-2.0 * x * x.transpose());
    Vector sq = x.rowwise().squaredNorm();
    d2.colwise() += sq;
    d2.rowwise() += sq.transpose();
    return (d2.cwiseMax(0.0) / (-2.0 * sigma * sigma)).array().exp();
}

// sigma^2 = half the median pairwise squared distance; 0 when degenerate
inline double hsic_bandwidth(const Matrix& x) {
    int n = static_cast<int>(x.rows());
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) vals.push_back((x.row(i) - x.row(j)).squaredNorm());
    size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    double med = vals[mid];
    return med > 0.0 ? std::sqrt(0.5 * med) : 0.0;
}

struct HsicParts {
    double statistic;  // (1/m) tr(Kc Lc)
    Matrix kc, lc;
};

inline HsicParts hsic_statistic(const Matrix& x, const Matrix& y) {
    int m = static_cast<int>(x.rows());
    double sx = hsic_bandwidth(x);
    double sy = hsic_bandwidth(y);
    if (sx <= 0.0 || sy <= 0.0)
        return {0.0, Matrix(), Matrix()};  // constant input, flagged by caller
    Matrix k = rbf_gram_rows(x, sx);
    Matrix l = rbf_gram_rows(y, sy);
    auto center = [m](const Matrix& g) {
        Vector rm = g.rowwise().mean();
        double tm = rm.mean();
        Matrix c = g;
        c.colwise() -= rm;
        c.rowwise() -= rm.transpose();
        c.array() += tm;
        return c;
    };
    HsicParts parts;
    parts.kc = center(k);
    parts.lc = center(l);
    parts.statistic = parts.kc.cwiseProduct(parts.lc).sum() / m;
    return parts;
}

}  // namespace detail

/// HSIC independence test with RBF kernels at median-heuristic bandwidths
/// and a two-moment gamma null. Constant inputs count as independent of
/// everything (p = 1).
inline TestResult kernel_independence_test(const Vector& x, const Matrix& y, double level) {
    int m = static_cast<int>(x.size());
    if (y.rows() != m) throw ConfigError("length mismatch");
    if (m < 20) throw TooFewSamples("independence test needs at least 20 samples");

    Matrix xm(m, 1);
    xm.col(0) = x;
    detail::HsicParts parts = detail::hsic_statistic(xm, y);
    TestResult res;
    if (parts.kc.size() == 0) {  // degenerate input
        res.p_value = 1.0;
        res.rejected = false;
        return res;
    }
    res.statistic = parts.statistic;

    Matrix k = detail::rbf_gram_rows(xm, detail::hsic_bandwidth(xm));
    Matrix l = detail::rbf_gram_rows(y, detail::hsic_bandwidth(y));
    double mu_x = (k.sum() - k.trace()) / (static_cast<double>(m) * (m - 1));
    double mu_y = (l.sum() - l.trace()) / (static_cast<double>(m) * (m - 1));
    double mean_h = (1.0 + mu_x * mu_y - mu_x - mu_y) / m;

    Matrix prod = parts.kc.cwiseProduct(parts.lc) / 6.0;
    Matrix sq = prod.array().square();
    double var_h = (sq.sum() - sq.trace()) / (static_cast<double>(m) * (m - 1));
    var_h *= 72.0 * (m - 4.0) * (m - 5.0) / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));

    if (mean_h <= 0.0 || var_h <= 0.0) {
        res.p_value = res.statistic > 0.0 ? 0.0 : 1.0;
    } else {
        double alpha = mean_h * mean_h / var_h;
        double beta = var_h * m / mean_h;
        boost::math::gamma_distribution<double> dist(alpha, beta);
        res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
    }
    res.rejected = res.p_value < level;
    return res;
}

/// Permutation-null HSIC; the slow reference for the gamma approximation.
inline TestResult kernel_independence_test_permutation(const Vector& x, const Matrix& y,
                                                       double level, int shuffles,
                                                       uint64_t seed) {
    int m = static_cast<int>(x.size());
    if (y.rows() != m) throw ConfigError("length mismatch");
    if (m < 20) throw TooFewSamples("independence test needs at least 20 samples");
    Matrix xm(m, 1);
    xm.col(0) = x;
    detail::HsicParts parts = detail::hsic_statistic(xm, y);
    TestResult res;
    if (parts.kc.size() == 0) {
        res.p_value = 1.0;
        res.rejected = false;
        return res;
    }
    res.statistic = parts.statistic;
    Rng rng(derive_seed(seed, 0x68736963ULL));
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    int exceed = 0;
    for (int s = 0; s < shuffles; ++s) {
        rng.shuffle(perm);
        double stat = 0.0;
        for (int i = 0; i < m; ++i) {
            const double* krow = parts.kc.data() + static_cast<long>(i) * m;
            const double* lrow = parts.lc.data() + static_cast<long>(perm[i]) * m;
            for (int j = 0; j < m; ++j) stat += krow[j] * lrow[perm[j]];
        }
        if (stat / m >= res.statistic) ++exceed;
    }
    res.p_value = (1.0 + exceed) / (1.0 + shuffles);
    res.rejected = res.p_value < level;
    return res;
}

/// One-sided exact Mann-Whitney: p-value of the alternative that xs is
/// stochastically smaller than ys, conditional on the pooled values (ties
/// handled with midranks).
inline double mann_whitney_less_p(const std::vector<double>& xs, const std::vector<double>& ys) {
    int nx = static_cast<int>(xs.size());
    int ny = static_cast<int>(ys.size());
    if (nx < 1 || ny < 1) throw TooFewSamples("both groups must be non-empty");
    int n = nx + ny;
    std::vector<double> pooled(xs);
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return pooled[a] < pooled[b]; });

    // doubled midranks stay integral under ties
    std::vector<long> rank2(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && pooled[idx[j]] == pooled[idx[i]]) ++j;
        long sum2 = 0;
        for (int t = i; t < j; ++t) sum2 += 2 * (t + 1);
        long mid2 = sum2 / (j - i);
        for (int t = i; t < j; ++t) rank2[idx[t]] = mid2;
        i = j;
    }
    long w_obs = 0;
    for (int t = 0; t < nx; ++t) w_obs += rank2[t];

    // distribution of the doubled rank-sum over all nx-subsets
    long max_sum = 0;
    std::vector<long> sorted2(rank2);
    std::sort(sorted2.begin(), sorted2.end());
    for (int t = n - nx; t < n; ++t) max_sum += sorted2[t];
    std::vector<std::vector<double>> dp(nx + 1, std::vector<double>(max_sum + 1, 0.0));
    dp[0][0] = 1.0;
    for (int item = 0; item < n; ++item) {
        long r = rank2[item];
        for (int c = std::min(item + 1, nx); c >= 1; --c)
            for (long s = max_sum; s >= r; --s)
                if (dp[c - 1][s - r] > 0) dp[c][s] += dp[c - 1][s - r];
    }
    double total = 0.0, at_most = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
        total += dp[nx][s];
        if (s <= w_obs) at_most += dp[nx][s];
    }
    return at_most / total;
}

}  // namespace adascore
