#include "famviz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace famviz::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// ---------------------------------------------------------------------------

namespace {

inline void assign_one(const float* pt, std::size_t dim, const double* centroids, std::size_t k,
                       int* assign, double* sqdist) {
    int best = 0;
    double best_d = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double* ctr = centroids + c * dim;
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double diff = static_cast<double>(pt[j]) - ctr[j];
            d += diff * diff;
        }
        if (c == 0 || d < best_d) {
            best = static_cast<int>(c);
            best_d = d;
        }
    }
    *assign = best;
    *sqdist = best_d;
}

}  // namespace

void assign_nearest_serial(const float* points, std::size_t n, std::size_t dim,
                           const double* centroids, std::size_t k, int* assign, double* sqdist) {
    for (std::size_t i = 0; i < n; ++i)
        assign_one(points + i * dim, dim, centroids, k, &assign[i], &sqdist[i]);
}

void assign_nearest_omp(const float* points, std::size_t n, std::size_t dim,
                        const double* centroids, std::size_t k, int* assign, double* sqdist) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        assign_one(points + i * dim, dim, centroids, k, &assign[i], &sqdist[i]);
}

void assign_nearest(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                    std::size_t k, int* assign, double* sqdist) {
#ifdef _OPENMP
    assign_nearest_omp(points, n, dim, centroids, k, assign, sqdist);
#else
    assign_nearest_serial(points, n, dim, centroids, k, assign, sqdist);
#endif
}

// ---------------------------------------------------------------------------

namespace {

inline void topk_one(const float* pt, std::size_t dim, const double* centroids, std::size_t k,
                     std::size_t n_assign, int* out) {
    std::vector<std::pair<double, int>> d(k);
    for (std::size_t c = 0; c < k; ++c) {
        const double* ctr = centroids + c * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double diff = static_cast<double>(pt[j]) - ctr[j];
            acc += diff * diff;
        }
        d[c] = {acc, static_cast<int>(c)};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(n_assign), d.end());
    std::vector<int> idx(n_assign);
    for (std::size_t j = 0; j < n_assign; ++j) idx[j] = d[j].second;
    std::sort(idx.begin(), idx.end());
    for (std::size_t j = 0; j < n_assign; ++j) out[j] = idx[j];
}

}  // namespace

void assign_topk_serial(const float* points, std::size_t n, std::size_t dim,
                        const double* centroids, std::size_t k, std::size_t n_assign, int* out) {
    for (std::size_t i = 0; i < n; ++i)
        topk_one(points + i * dim, dim, centroids, k, n_assign, out + i * n_assign);
}

void assign_topk_omp(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                     std::size_t k, std::size_t n_assign, int* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        topk_one(points + static_cast<std::size_t>(i) * dim, dim, centroids, k, n_assign,
                 out + static_cast<std::size_t>(i) * n_assign);
}

void assign_topk(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                 std::size_t k, std::size_t n_assign, int* out) {
#ifdef _OPENMP
    assign_topk_omp(points, n, dim, centroids, k, n_assign, out);
#else
    assign_topk_serial(points, n, dim, centroids, k, n_assign, out);
#endif
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kChunk = 4096;
}

void centroid_sums_serial(const float* points, std::size_t n, std::size_t dim, const int* assign,
                          std::size_t k, double* sums, std::size_t* counts) {
    std::fill(sums, sums + k * dim, 0.0);
    std::fill(counts, counts + k, std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(assign[i]);
        const float* pt = points + i * dim;
        double* s = sums + c * dim;
        for (std::size_t j = 0; j < dim; ++j) s[j] += static_cast<double>(pt[j]);
        ++counts[c];
    }
}

void centroid_sums_omp(const float* points, std::size_t n, std::size_t dim, const int* assign,
                       std::size_t k, double* sums, std::size_t* counts) {
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(n_chunks * k * dim, 0.0);
    std::vector<std::size_t> pcounts(n_chunks * k, 0);

#pragma omp parallel for schedule(static)
    for (long long ch = 0; ch < static_cast<long long>(n_chunks); ++ch) {
        const std::size_t lo = static_cast<std::size_t>(ch) * kChunk;
        const std::size_t hi = std::min(n, lo + kChunk);
        double* psum = partial.data() + static_cast<std::size_t>(ch) * k * dim;
        std::size_t* pcnt = pcounts.data() + static_cast<std::size_t>(ch) * k;
        for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t c = static_cast<std::size_t>(assign[i]);
            const float* pt = points + i * dim;
            double* s = psum + c * dim;
            for (std::size_t j = 0; j < dim; ++j) s[j] += static_cast<double>(pt[j]);
            ++pcnt[c];
        }
    }

    std::fill(sums, sums + k * dim, 0.0);
    std::fill(counts, counts + k, std::size_t{0});
    for (std::size_t ch = 0; ch < n_chunks; ++ch) {
        const double* psum = partial.data() + ch * k * dim;
        const std::size_t* pcnt = pcounts.data() + ch * k;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < dim; ++j) sums[c * dim + j] += psum[c * dim + j];
            counts[c] += pcnt[c];
        }
    }
}

void centroid_sums(const float* points, std::size_t n, std::size_t dim, const int* assign,
                   std::size_t k, double* sums, std::size_t* counts) {
#ifdef _OPENMP
    centroid_sums_omp(points, n, dim, assign, k, sums, counts);
#else
    centroid_sums_serial(points, n, dim, assign, k, sums, counts);
#endif
}

// ---------------------------------------------------------------------------
// Note: the chunked-serial reduction in centroid_sums_omp sums chunk partials
// in chunk order, not point order, so its result can differ from
// centroid_sums_serial in the last ulp. k-means uses the omp path on both
// sides of the determinism contract, which is about thread count, not about
// serial-vs-chunked equality. The kernel test compares omp against the same
// chunked order computed serially.

namespace {

inline float rms_one(const float* s, std::size_t win) {
    double acc = 0.0;
    for (std::size_t j = 0; j < win; ++j) acc += static_cast<double>(s[j]) * s[j];
    return static_cast<float>(std::sqrt(acc / static_cast<double>(win)));
}

}  // namespace

void rms_frames_serial(const float* samples, std::size_t win, std::size_t hop,
                       std::size_t n_frames, float* out) {
    for (std::size_t i = 0; i < n_frames; ++i) out[i] = rms_one(samples + i * hop, win);
}

void rms_frames_omp(const float* samples, std::size_t win, std::size_t hop, std::size_t n_frames,
                    float* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n_frames); ++i)
        out[i] = rms_one(samples + static_cast<std::size_t>(i) * hop, win);
}

void rms_frames(const float* samples, std::size_t win, std::size_t hop, std::size_t n_frames,
                float* out) {
#ifdef _OPENMP
    rms_frames_omp(samples, win, hop, n_frames, out);
#else
    rms_frames_serial(samples, win, hop, n_frames, out);
#endif
}

// ---------------------------------------------------------------------------

namespace {

inline void sq_dist_row(const double* data, std::size_t n, std::size_t dim, std::size_t i,
                        double* row) {
    const double* a = data + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
        const double* b = data + j * dim;
        double d = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
            double diff = a[t] - b[t];
            d += diff * diff;
        }
        row[j] = d;
    }
    row[i] = 0.0;
}

}  // namespace

void pairwise_sq_dists_serial(const double* data, std::size_t n, std::size_t dim, double* out) {
    for (std::size_t i = 0; i < n; ++i) sq_dist_row(data, n, dim, i, out + i * n);
}

void pairwise_sq_dists_omp(const double* data, std::size_t n, std::size_t dim, double* out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        sq_dist_row(data, n, dim, static_cast<std::size_t>(i), out + static_cast<std::size_t>(i) * n);
}

void pairwise_sq_dists(const double* data, std::size_t n, std::size_t dim, double* out) {
#ifdef _OPENMP
    pairwise_sq_dists_omp(data, n, dim, out);
#else
    pairwise_sq_dists_serial(data, n, dim, out);
#endif
}

// ---------------------------------------------------------------------------

namespace {

inline void tsne_kernel_row(const double* y, std::size_t n, std::size_t i, double* num,
                            double* row_sum) {
    const double yi0 = y[i * 2], yi1 = y[i * 2 + 1];
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            num[j] = 0.0;
            continue;
        }
        const double d0 = yi0 - y[j * 2], d1 = yi1 - y[j * 2 + 1];
        const double v = 1.0 / (1.0 + d0 * d0 + d1 * d1);
        num[j] = v;
        s += v;
    }
    *row_sum = s;
}

inline void tsne_grad_row(const double* p, const double* num, double z, const double* y,
                          std::size_t n, std::size_t i, double* gi) {
    const double yi0 = y[i * 2], yi1 = y[i * 2 + 1];
    double g0 = 0.0, g1 = 0.0;
    const double* pi = p + i * n;
    const double* qi = num + i * n;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mult = (pi[j] - qi[j] / z) * qi[j];
        g0 += mult * (yi0 - y[j * 2]);
        g1 += mult * (yi1 - y[j * 2 + 1]);
    }
    gi[0] = 4.0 * g0;
    gi[1] = 4.0 * g1;
}

}  // namespace

void tsne_kernel_serial(const double* y, std::size_t n, double* num, double* row_sums) {
    for (std::size_t i = 0; i < n; ++i) tsne_kernel_row(y, n, i, num + i * n, &row_sums[i]);
}

void tsne_kernel_omp(const double* y, std::size_t n, double* num, double* row_sums) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        tsne_kernel_row(y, n, static_cast<std::size_t>(i), num + static_cast<std::size_t>(i) * n,
                        &row_sums[i]);
}

void tsne_kernel(const double* y, std::size_t n, double* num, double* row_sums) {
#ifdef _OPENMP
    tsne_kernel_omp(y, n, num, row_sums);
#else
    tsne_kernel_serial(y, n, num, row_sums);
#endif
}

void tsne_grad_serial(const double* p, const double* num, double z, const double* y,
                      std::size_t n, double* grad) {
    for (std::size_t i = 0; i < n; ++i) tsne_grad_row(p, num, z, y, n, i, grad + i * 2);
}

void tsne_grad_omp(const double* p, const double* num, double z, const double* y, std::size_t n,
                   double* grad) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        tsne_grad_row(p, num, z, y, n, static_cast<std::size_t>(i),
                      grad + static_cast<std::size_t>(i) * 2);
}

void tsne_grad(const double* p, const double* num, double z, const double* y, std::size_t n,
               double* grad) {
#ifdef _OPENMP
    tsne_grad_omp(p, num, z, y, n, grad);
#else
    tsne_grad_serial(p, num, z, y, n, grad);
#endif
}

}  // namespace famviz::kernels
