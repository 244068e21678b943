// Benchmark the serial reference kernels against their OpenMP versions.
// Each kernel runs a few warm-up passes, then reports the best of `reps`
// timed passes and the speedup, after asserting both versions agree.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "famviz/kernels.hpp"

using namespace famviz;
using clock_type = std::chrono::steady_clock;

namespace {

std::vector<float> random_f(std::size_t n, std::uint64_t seed) {
    std::vector<float> v(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (auto& x : v) x = nd(rng);
    return v;
}

std::vector<double> random_d(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (auto& x : v) x = nd(rng);
    return v;
}

double time_best(const std::function<void()>& fn, int reps = 5) {
    fn();
    fn();  // warm-up
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        fn();
        const auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double omp_ms, bool equal) {
    std::printf("%-18s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name, serial_ms,
                omp_ms, serial_ms / omp_ms, equal ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", kernels::max_threads());

    {
        const std::size_t n = 200000, dim = 16, k = 50;
        auto pts = random_f(n * dim, 1);
        auto ctr = random_d(k * dim, 2);
        std::vector<int> a1(n), a2(n);
        std::vector<double> d1(n), d2(n);
        const double ts = time_best([&] {
            kernels::assign_nearest_serial(pts.data(), n, dim, ctr.data(), k, a1.data(), d1.data());
        });
        const double tp = time_best([&] {
            kernels::assign_nearest_omp(pts.data(), n, dim, ctr.data(), k, a2.data(), d2.data());
        });
        report("assign_nearest", ts, tp, a1 == a2 && d1 == d2);
    }
    {
        const std::size_t n = 200000, dim = 16, k = 50, na = 5;
        auto pts = random_f(n * dim, 3);
        auto ctr = random_d(k * dim, 4);
        std::vector<int> w1(n * na), w2(n * na);
        const double ts = time_best([&] {
            kernels::assign_topk_serial(pts.data(), n, dim, ctr.data(), k, na, w1.data());
        });
        const double tp = time_best(
            [&] { kernels::assign_topk_omp(pts.data(), n, dim, ctr.data(), k, na, w2.data()); });
        report("assign_topk", ts, tp, w1 == w2);
    }
    {
        const std::size_t n = 500000, dim = 16, k = 50;
        auto pts = random_f(n * dim, 5);
        std::vector<int> assign(n);
        std::mt19937_64 rng(6);
        for (auto& a : assign) a = static_cast<int>(rng() % k);
        std::vector<double> s1(k * dim), s2(k * dim);
        std::vector<std::size_t> c1(k), c2(k);
        const double ts = time_best([&] {
            kernels::centroid_sums_serial(pts.data(), n, dim, assign.data(), k, s1.data(),
                                          c1.data());
        });
        const double tp = time_best([&] {
            kernels::centroid_sums_omp(pts.data(), n, dim, assign.data(), k, s2.data(), c2.data());
        });
        report("centroid_sums", ts, tp, s1 == s2 && c1 == c2);
    }
    {
        const std::size_t win = 32000, hop = 3200, n_frames = 4000;
        auto samples = random_f(win + hop * (n_frames - 1), 7);
        std::vector<float> r1(n_frames), r2(n_frames);
        const double ts = time_best(
            [&] { kernels::rms_frames_serial(samples.data(), win, hop, n_frames, r1.data()); });
        const double tp = time_best(
            [&] { kernels::rms_frames_omp(samples.data(), win, hop, n_frames, r2.data()); });
        report("rms_frames", ts, tp, r1 == r2);
    }
    {
        const std::size_t n = 2000, dim = 50;
        auto x = random_d(n * dim, 8);
        std::vector<double> d1(n * n), d2(n * n);
        const double ts =
            time_best([&] { kernels::pairwise_sq_dists_serial(x.data(), n, dim, d1.data()); });
        const double tp =
            time_best([&] { kernels::pairwise_sq_dists_omp(x.data(), n, dim, d2.data()); });
        report("pairwise_sq_dists", ts, tp, d1 == d2);
    }
    {
        const std::size_t n = 2000;
        auto y = random_d(n * 2, 9);
        auto p = random_d(n * n, 10);
        for (auto& v : p) v = std::abs(v);
        std::vector<double> num1(n * n), num2(n * n), rs1(n), rs2(n);
        const double ts =
            time_best([&] { kernels::tsne_kernel_serial(y.data(), n, num1.data(), rs1.data()); });
        const double tp =
            time_best([&] { kernels::tsne_kernel_omp(y.data(), n, num2.data(), rs2.data()); });
        report("tsne_kernel", ts, tp, num1 == num2 && rs1 == rs2);

        double z = 0.0;
        for (double v : rs1) z += v;
        std::vector<double> g1(n * 2), g2(n * 2);
        const double tgs = time_best(
            [&] { kernels::tsne_grad_serial(p.data(), num1.data(), z, y.data(), n, g1.data()); });
        const double tgp = time_best(
            [&] { kernels::tsne_grad_omp(p.data(), num1.data(), z, y.data(), n, g2.data()); });
        report("tsne_grad", tgs, tgp, g1 == g2);
    }
    return 0;
}
