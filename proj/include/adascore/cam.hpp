#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <map>
#include <set>
#include <vector>

#include "adascore/dataset.hpp"
#include "adascore/errors.hpp"

namespace adascore {

namespace detail {

// Univariate kernel smoother realized as a ridge fit on RBF features placed
// at decile centers, plus a linear term.
struct SmoothBasis {
    Vector centers;
    double sigma = 1.0;

    Matrix features(const Vector& x) const {
        int n = static_cast<int>(x.size());
        int k = static_cast<int>(centers.size());
        Matrix f(n, k + 1);
        f.col(0) = x;
        for (int c = 0; c < k; ++c)
            f.col(c + 1) =
                (-(x.array() - centers(c)).square() / (2.0 * sigma * sigma)).exp();
        return f;
    }

    static SmoothBasis from_column(const Vector& x, int k = 10) {
        SmoothBasis b;
        std::vector<double> sorted(x.data(), x.data() + x.size());
        std::sort(sorted.begin(), sorted.end());
        b.centers.resize(k);
        for (int c = 0; c < k; ++c) {
            double q = (c + 0.5) / k;
            b.centers(c) = sorted[static_cast<size_t>(q * (sorted.size() - 1))];
        }
        double lo = sorted.front(), hi = sorted.back();
        b.sigma = std::max((hi - lo) / k, 1e-6);
        return b;
    }
};

// Additive fit by backfitting the per-parent components, at most `sweeps`
// rounds. Returns the residual sum of squares.
inline double backfit_rss(const Vector& y, const std::vector<Matrix>& features, int sweeps,
                          double ridge = 1e-6) {
    int n = static_cast<int>(y.size());
    int p = static_cast<int>(features.size());
    Vector y_c = y.array() - y.mean();
    if (p == 0) return y_c.squaredNorm();
    std::vector<Vector> comp(p, Vector::Zero(n));
    std::vector<Eigen::LDLT<Matrix>> solvers;
    solvers.reserve(p);
    for (int j = 0; j < p; ++j) {
        const Matrix& f = features[j];
        Matrix a = f.transpose() * f + ridge * Matrix::Identity(f.cols(), f.cols());
        solvers.emplace_back(a);
    }
    Vector fit = Vector::Zero(n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int j = 0; j < p; ++j) {
            Vector partial = y_c - (fit - comp[j]);
            Vector beta = solvers[j].solve(features[j].transpose() * partial);
            Vector updated = features[j] * beta;
            updated.array() -= updated.mean();
            fit += updated - comp[j];
            comp[j] = updated;
        }
    }
    return (y_c - fit).squaredNorm();
}

}  // namespace detail

/// CAM-style significance pruning of directed edges: for each child, fit an
/// additive model over its parents with per-parent univariate kernel
/// smoothers combined by backfitting, then drop parents whose component
/// fails an F-test comparing residual sums with and without it.
inline std::map<int, std::set<int>> cam_prune(const Dataset& data,
                                              const std::map<int, std::set<int>>& parent_sets,
                                              double prune_alpha, int sweeps = 10) {
    std::map<int, std::set<int>> kept;
    int n = data.n();
    for (const auto& [child, parents] : parent_sets) {
        if (parents.empty()) {
            kept[child] = {};
            continue;
        }
        std::vector<int> pa(parents.begin(), parents.end());
        int p = static_cast<int>(pa.size());
        std::vector<Matrix> features;
        features.reserve(p);
        for (int j : pa)
            features.push_back(
                detail::SmoothBasis::from_column(data.values.col(j)).features(data.values.col(j)));
        int df_comp = static_cast<int>(features[0].cols());
        int df_resid = n - df_comp * p - 1;
        if (df_resid < 2) {
            kept[child] = parents;  // not enough samples to test, keep everything
            continue;
        }
        Vector y = data.values.col(child);
        double rss_full = detail::backfit_rss(y, features, sweeps);
        std::set<int> survivors;
        boost::math::fisher_f fdist(df_comp, df_resid);
        for (int drop = 0; drop < p; ++drop) {
            std::vector<Matrix> reduced;
            for (int j = 0; j < p; ++j)
                if (j != drop) reduced.push_back(features[j]);
            double rss_red = detail::backfit_rss(y, reduced, sweeps);
            double f_stat = ((rss_red - rss_full) / df_comp) / (rss_full / df_resid);
            if (f_stat < 0.0) f_stat = 0.0;
            double pval = boost::math::cdf(boost::math::complement(fdist, f_stat));
            if (pval < prune_alpha) survivors.insert(pa[drop]);
        }
        kept[child] = survivors;
    }
    return kept;
}

}  // namespace adascore
