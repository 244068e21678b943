#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "famviz/types.hpp"

namespace famviz::dimred {

enum class Method { PCA, TSNE };

struct TsneParams {
    double perplexity = 30.0;
    std::size_t n_iters = 1000;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iters = 250;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    std::string init = "pca";
};

/// 2-D embedding with provenance.
struct Projection {
    Method method = Method::PCA;
    std::vector<double> coords;  // n x 2
    std::uint64_t seed = 0;
    TsneParams params;           // meaningful for TSNE
    // diagnostics
    double explained_variance_ratio[2] = {0.0, 0.0};  // PCA
    std::vector<double> components;                   // PCA, 2 x d
    double kl_divergence = 0.0;                       // TSNE, final
    double kl_post_exaggeration = 0.0;                // TSNE, at exaggeration end
    std::size_t iters_run = 0;
    double effective_perplexity = 0.0;
    std::size_t n() const { return coords.size() / 2; }
};

/// Mean-center and project onto the top-2 principal directions. Component
/// sign is fixed so each component's largest-magnitude loading is positive.
Projection pca_2d(const double* data, std::size_t n, std::size_t d);
Projection pca_2d(const std::vector<double>& data, std::size_t n, std::size_t d);

/// Exact (dense) t-SNE with PCA initialization. Per-point bandwidths are
/// found by binary search to match the target perplexity within 1e-5 in log
/// space; perplexity above (n-1)/3 is clamped with a warning on stderr.
Projection tsne_2d(const double* data, std::size_t n, std::size_t d, TsneParams params = {},
                   std::uint64_t seed = 0);
Projection tsne_2d(const std::vector<double>& data, std::size_t n, std::size_t d,
                   TsneParams params = {}, std::uint64_t seed = 0);

/// Symmetric, normalized t-SNE affinities (n x n). Exposed for testing.
std::vector<double> tsne_affinities(const double* data, std::size_t n, std::size_t d,
                                    double perplexity, std::vector<double>* betas = nullptr);

/// KL(P || Q) and its gradient at y (n x 2). Exposed so the gradient can be
/// checked against finite differences.
double tsne_kl_and_grad(const std::vector<double>& p, const std::vector<double>& y,
                        std::size_t n, std::vector<double>* grad);

// CSV `family_id,window_start,x,y` plus a JSON sidecar of params/diagnostics.
void write_projection_csv(std::ostream& out, const Projection& proj,
                          const std::vector<std::string>& family_ids,
                          const std::vector<double>& window_starts);
std::string projection_sidecar_json(const Projection& proj);

}  // namespace famviz::dimred
