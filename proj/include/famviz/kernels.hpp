#pragma once

#include <cstddef>
#include <vector>

// Data-parallel inner loops, each in a serial reference version and an OpenMP
// version. Every parallel loop writes disjoint output elements (or reduces
// over fixed-size chunks in fixed order), so results are bit-identical to the
// serial version at any thread count. The unsuffixed entry points dispatch to
// the OpenMP version when compiled with OpenMP.

namespace famviz::kernels {

/// Number of OpenMP threads in use (1 without OpenMP).
int max_threads();
void set_threads(int n);

// --- nearest-centroid assignment (k-means / soft assign inner loop) --------
// points: n x dim (float), centroids: k x dim (double)
// out: assign[i] = index of nearest centroid (ties to lower index),
//      sqdist[i] = squared Euclidean distance to it.

void assign_nearest_serial(const float* points, std::size_t n, std::size_t dim,
                           const double* centroids, std::size_t k, int* assign, double* sqdist);
void assign_nearest_omp(const float* points, std::size_t n, std::size_t dim,
                        const double* centroids, std::size_t k, int* assign, double* sqdist);
void assign_nearest(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                    std::size_t k, int* assign, double* sqdist);

// --- k nearest centroids (soft assignment inner loop) -----------------------
// out: n x n_assign centroid indices, each row sorted ascending by index.
// Ties in distance go to the lower index.

void assign_topk_serial(const float* points, std::size_t n, std::size_t dim,
                        const double* centroids, std::size_t k, std::size_t n_assign, int* out);
void assign_topk_omp(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                     std::size_t k, std::size_t n_assign, int* out);
void assign_topk(const float* points, std::size_t n, std::size_t dim, const double* centroids,
                 std::size_t k, std::size_t n_assign, int* out);

// --- centroid accumulation --------------------------------------------------
// sums: k x dim (zeroed by callee), counts: k (zeroed by callee).
// Chunked fixed-order reduction; chunk size is constant so the summation
// order does not depend on the thread count.

void centroid_sums_serial(const float* points, std::size_t n, std::size_t dim, const int* assign,
                          std::size_t k, double* sums, std::size_t* counts);
void centroid_sums_omp(const float* points, std::size_t n, std::size_t dim, const int* assign,
                       std::size_t k, double* sums, std::size_t* counts);
void centroid_sums(const float* points, std::size_t n, std::size_t dim, const int* assign,
                   std::size_t k, double* sums, std::size_t* counts);

// --- windowed RMS -----------------------------------------------------------

void rms_frames_serial(const float* samples, std::size_t win, std::size_t hop,
                       std::size_t n_frames, float* out);
void rms_frames_omp(const float* samples, std::size_t win, std::size_t hop, std::size_t n_frames,
                    float* out);
void rms_frames(const float* samples, std::size_t win, std::size_t hop, std::size_t n_frames,
                float* out);

// --- pairwise squared Euclidean distances ----------------------------------
// data: n x dim (double), out: n x n, diagonal zero.

void pairwise_sq_dists_serial(const double* data, std::size_t n, std::size_t dim, double* out);
void pairwise_sq_dists_omp(const double* data, std::size_t n, std::size_t dim, double* out);
void pairwise_sq_dists(const double* data, std::size_t n, std::size_t dim, double* out);

// --- t-SNE kernel matrix and gradient --------------------------------------
// Student-t numerators num[i*n+j] = 1/(1 + ||y_i - y_j||^2), zero diagonal;
// row_sums[i] = sum_j num[i*n+j]. Z = sum of row_sums taken serially in row
// order by the caller.

void tsne_kernel_serial(const double* y, std::size_t n, double* num, double* row_sums);
void tsne_kernel_omp(const double* y, std::size_t n, double* num, double* row_sums);
void tsne_kernel(const double* y, std::size_t n, double* num, double* row_sums);

// grad: n x 2; grad_i = 4 * sum_j (p_ij - num_ij / z) * num_ij * (y_i - y_j)

void tsne_grad_serial(const double* p, const double* num, double z, const double* y,
                      std::size_t n, double* grad);
void tsne_grad_omp(const double* p, const double* num, double z, const double* y, std::size_t n,
                   double* grad);
void tsne_grad(const double* p, const double* num, double z, const double* y, std::size_t n,
               double* grad);

}  // namespace famviz::kernels
