#define EIGEN_DONT_PARALLELIZE
#include "famviz/dimred.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "famviz/kernels.hpp"

namespace famviz::dimred {

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

Projection pca_2d(const double* data, std::size_t n, std::size_t d) {
    if (n < 2 || d < 2) throw InsufficientDataError("pca_2d: need n >= 2 and d >= 2");
    for (std::size_t i = 0; i < n * d; ++i)
        if (!std::isfinite(data[i])) throw MalformedInputError("pca_2d: non-finite input");

    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> X(data, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::RowVectorXd mean = X.colwise().mean();
    Mat Xc = X.rowwise() - mean;

    Eigen::MatrixXd cov = (Xc.transpose() * Xc) / static_cast<double>(n - 1);
    const double total_var = cov.trace();
    if (total_var <= 1e-300)
        throw DegenerateInputError("pca_2d: zero-variance data (all rows identical)");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw Error("pca_2d: eigendecomposition failed");
    // eigenvalues ascending; take the last two
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::MatrixXd comp(2, di);
    double lambda[2];
    for (int c = 0; c < 2; ++c) {
        comp.row(c) = es.eigenvectors().col(di - 1 - c).transpose();
        lambda[c] = std::max(0.0, ev(di - 1 - c));
        // fix sign: largest-magnitude loading positive
        Eigen::Index imax = 0;
        comp.row(c).cwiseAbs().maxCoeff(&imax);
        if (comp(c, imax) < 0.0) comp.row(c) = -comp.row(c);
    }

    Mat Y = Xc * comp.transpose();

    Projection proj;
    proj.method = Method::PCA;
    proj.coords.assign(Y.data(), Y.data() + Y.size());
    proj.explained_variance_ratio[0] = lambda[0] / total_var;
    proj.explained_variance_ratio[1] = lambda[1] / total_var;
    // comp is column-major; re-pack row-major (2 x d)
    proj.components.assign(2 * d, 0.0);
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < d; ++j)
            proj.components[static_cast<std::size_t>(c) * d + j] =
                comp(c, static_cast<Eigen::Index>(j));
    return proj;
}

Projection pca_2d(const std::vector<double>& data, std::size_t n, std::size_t d) {
    if (data.size() != n * d) throw MalformedInputError("pca_2d: data size mismatch");
    return pca_2d(data.data(), n, d);
}

// ---------------------------------------------------------------------------
// t-SNE
// ---------------------------------------------------------------------------

namespace {

// Row of conditional affinities for a given precision; returns entropy (nats).
double affinity_row(const double* dist_row, std::size_t n, std::size_t i, double beta,
                    double* p_row) {
    double sum_p = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        p_row[j] = (j == i) ? 0.0 : std::exp(-beta * dist_row[j]);
        sum_p += p_row[j];
    }
    if (sum_p <= 0.0) {
        // all mass collapsed; spread uniformly over the other points
        for (std::size_t j = 0; j < n; ++j) p_row[j] = (j == i) ? 0.0 : 1.0 / (n - 1);
        return std::log(static_cast<double>(n - 1));
    }
    double h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        h += beta * dist_row[j] * p_row[j];
        p_row[j] /= sum_p;
    }
    return std::log(sum_p) + h / sum_p;
}

}  // namespace

std::vector<double> tsne_affinities(const double* data, std::size_t n, std::size_t d,
                                    double perplexity, std::vector<double>* betas) {
    std::vector<double> dist(n * n);
    kernels::pairwise_sq_dists(data, n, d, dist.data());

    const double target = std::log(perplexity);
    std::vector<double> cond(n * n, 0.0);
    if (betas) betas->assign(n, 1.0);

#pragma omp parallel for schedule(static)
    for (long long li = 0; li < static_cast<long long>(n); ++li) {
        const std::size_t i = static_cast<std::size_t>(li);
        double beta = 1.0, lo = 1e-12, hi = 1e12;
        bool lo_set = false, hi_set = false;
        double* p_row = cond.data() + i * n;
        for (int iter = 0; iter < 50; ++iter) {
            const double h = affinity_row(dist.data() + i * n, n, i, beta, p_row);
            const double diff = h - target;
            if (std::fabs(diff) < 1e-5) break;
            if (diff > 0.0) {  // entropy too high -> sharpen
                lo = beta;
                lo_set = true;
                beta = hi_set ? 0.5 * (beta + hi) : std::min(beta * 2.0, 1e12);
            } else {
                hi = beta;
                hi_set = true;
                beta = lo_set ? 0.5 * (beta + lo) : std::max(beta / 2.0, 1e-12);
            }
        }
        if (betas) (*betas)[i] = beta;
    }

    // symmetrize, normalize to a joint distribution
    std::vector<double> p(n * n, 0.0);
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / denom;
    return p;
}

double tsne_kl_and_grad(const std::vector<double>& p, const std::vector<double>& y, std::size_t n,
                        std::vector<double>* grad) {
    std::vector<double> num(n * n), row_sums(n);
    kernels::tsne_kernel(y.data(), n, num.data(), row_sums.data());
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += row_sums[i];
    z = std::max(z, 1e-300);

    if (grad) {
        grad->assign(n * 2, 0.0);
        kernels::tsne_grad(p.data(), num.data(), z, y.data(), n, grad->data());
    }

    double kl = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        if (p[i] > 0.0) {
            const double q = std::max(num[i] / z, 1e-300);
            kl += p[i] * std::log(p[i] / q);
        }
    }
    return kl;
}

Projection tsne_2d(const double* data, std::size_t n, std::size_t d, TsneParams params,
                   std::uint64_t seed) {
    if (n < 4) throw InsufficientDataError("tsne_2d: need at least 4 points");

    const double max_perp = static_cast<double>(n - 1) / 3.0;
    double perp = params.perplexity;
    if (perp >= max_perp) {
        perp = std::max(2.0, max_perp);
        std::cerr << "tsne_2d: perplexity " << params.perplexity << " clamped to " << perp
                  << " for n = " << n << "\n";
    }

    std::vector<double> p = tsne_affinities(data, n, d, perp);

    // PCA init scaled to std 1e-4 on the first component
    std::vector<double> y(n * 2);
    bool pca_ok = true;
    try {
        Projection init = pca_2d(data, n, d);
        double m = 0.0, var = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += init.coords[i * 2];
        m /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            double dd = init.coords[i * 2] - m;
            var += dd * dd;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd <= 0.0) {
            pca_ok = false;
        } else {
            for (std::size_t i = 0; i < n * 2; ++i) y[i] = init.coords[i] / sd * 1e-4;
        }
    } catch (const DegenerateInputError&) {
        pca_ok = false;
    }
    if (!pca_ok) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd(0.0, 1e-4);
        for (std::size_t i = 0; i < n * 2; ++i) y[i] = nd(rng);
    }

    // exaggerated affinities for the early phase
    std::vector<double> p_ex(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) p_ex[i] = p[i] * params.early_exaggeration;

    std::vector<double> vel(n * 2, 0.0), grad(n * 2), num(n * n), row_sums(n);
    Projection proj;
    proj.method = Method::TSNE;
    proj.seed = seed;
    proj.params = params;
    proj.params.perplexity = perp;
    proj.effective_perplexity = perp;

    for (std::size_t it = 0; it < params.n_iters; ++it) {
        const bool early = it < params.exaggeration_iters;
        const double momentum = early ? params.momentum_initial : params.momentum_final;
        const std::vector<double>& pp = early ? p_ex : p;

        kernels::tsne_kernel(y.data(), n, num.data(), row_sums.data());
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) z += row_sums[i];
        z = std::max(z, 1e-300);
        kernels::tsne_grad(pp.data(), num.data(), z, y.data(), n, grad.data());

        for (std::size_t i = 0; i < n * 2; ++i) {
            vel[i] = momentum * vel[i] - params.learning_rate * grad[i];
            y[i] += vel[i];
        }
        // recenter
        double m0 = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m0 += y[i * 2];
            m1 += y[i * 2 + 1];
        }
        m0 /= static_cast<double>(n);
        m1 /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i * 2] -= m0;
            y[i * 2 + 1] -= m1;
        }

        if (it + 1 == params.exaggeration_iters)
            proj.kl_post_exaggeration = tsne_kl_and_grad(p, y, n, nullptr);
    }

    proj.kl_divergence = tsne_kl_and_grad(p, y, n, nullptr);
    proj.iters_run = params.n_iters;
    proj.coords = std::move(y);
    return proj;
}

Projection tsne_2d(const std::vector<double>& data, std::size_t n, std::size_t d,
                   TsneParams params, std::uint64_t seed) {
    if (data.size() != n * d) throw MalformedInputError("tsne_2d: data size mismatch");
    return tsne_2d(data.data(), n, d, params, seed);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void write_projection_csv(std::ostream& out, const Projection& proj,
                          const std::vector<std::string>& family_ids,
                          const std::vector<double>& window_starts) {
    out << "family_id,window_start,x,y\n";
    char buf[128];
    for (std::size_t i = 0; i < proj.n(); ++i) {
        std::snprintf(buf, sizeof buf, "%s,%.9g,%.17g,%.17g\n",
                      i < family_ids.size() ? family_ids[i].c_str() : "",
                      i < window_starts.size() ? window_starts[i] : 0.0, proj.coords[i * 2],
                      proj.coords[i * 2 + 1]);
        out << buf;
    }
}

std::string projection_sidecar_json(const Projection& proj) {
    std::ostringstream os;
    char buf[64];
    os << "{\n  \"method\": \"" << (proj.method == Method::PCA ? "PCA" : "TSNE") << "\",\n";
    os << "  \"seed\": " << proj.seed << ",\n";
    if (proj.method == Method::PCA) {
        std::snprintf(buf, sizeof buf, "%.17g", proj.explained_variance_ratio[0]);
        os << "  \"explained_variance_ratio\": [" << buf;
        std::snprintf(buf, sizeof buf, "%.17g", proj.explained_variance_ratio[1]);
        os << ", " << buf << "]\n";
    } else {
        const TsneParams& p = proj.params;
        os << "  \"params\": {\"perplexity\": " << p.perplexity
           << ", \"n_iters\": " << p.n_iters << ", \"early_exaggeration\": " << p.early_exaggeration
           << ", \"exaggeration_iters\": " << p.exaggeration_iters
           << ", \"learning_rate\": " << p.learning_rate << ", \"init\": \"" << p.init
           << "\"},\n";
        std::snprintf(buf, sizeof buf, "%.17g", proj.kl_divergence);
        os << "  \"kl_divergence\": " << buf << ",\n";
        std::snprintf(buf, sizeof buf, "%.17g", proj.kl_post_exaggeration);
        os << "  \"kl_post_exaggeration\": " << buf << ",\n";
        os << "  \"iters_run\": " << proj.iters_run << "\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace famviz::dimred
