#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "famviz/boaw.hpp"

using namespace famviz;
using namespace famviz::boaw;

namespace {

// Exhaustive-partition oracle: globally optimal k-means inertia for tiny
// instances, independent of Lloyd's algorithm.
double brute_force_inertia(const std::vector<float>& pts, std::size_t n, std::size_t dim,
                           std::size_t k) {
    std::vector<std::size_t> assign(n, 0);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t total = static_cast<std::size_t>(std::pow(k, n));
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = c % k;
            c /= k;
        }
        std::vector<double> sums(k * dim, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j) sums[assign[i] * dim + j] += pts[i * dim + j];
            ++counts[assign[i]];
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (counts[assign[i]] == 0) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                double diff = pts[i * dim + j] - sums[assign[i] * dim + j] /
                                                    static_cast<double>(counts[assign[i]]);
                inertia += diff * diff;
            }
        }
        best = std::min(best, inertia);
    }
    return best;
}

double best_of_seeds(const std::vector<float>& pts, std::size_t n, std::size_t dim,
                     std::size_t k, int n_seeds = 10) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_seeds; ++s)
        best = std::min(best, kmeans_fit(pts.data(), n, dim, k, static_cast<std::uint64_t>(s)).inertia);
    return best;
}

FrameSequence make_frames(std::size_t n, std::size_t dim, std::uint64_t seed,
                          const std::string& fam = "f0") {
    FrameSequence f;
    f.grid = FrameGrid{2.0, 0.2, n};
    f.dim = dim;
    f.family_id = fam;
    f.vectors.resize(n * dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (auto& v : f.vectors) v = nd(rng);
    f.energy.assign(n, std::numeric_limits<float>::quiet_NaN());
    return f;
}

}  // namespace

TEST_CASE("kmeans_fit: n == k puts a centroid on every point") {
    std::vector<float> pts{0.0f, 1.0f, 5.0f, 9.0f};
    auto cb = kmeans_fit(pts.data(), 4, 1, 4, 42);
    CHECK(cb.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans_fit: two clear 1-D clusters") {
    std::vector<float> pts{0.0f, 1.0f, 10.0f, 11.0f};
    auto cb = kmeans_fit(pts.data(), 4, 1, 2, 1);
    CHECK(cb.inertia == doctest::Approx(1.0));
    std::vector<double> cs{cb.centroids[0], cb.centroids[1]};
    std::sort(cs.begin(), cs.end());
    CHECK(cs[0] == doctest::Approx(0.5));
    CHECK(cs[1] == doctest::Approx(10.5));
}

TEST_CASE("kmeans_fit: all points identical with k=2") {
    std::vector<float> pts(8, 3.0f);  // 4 points, dim 2
    auto cb = kmeans_fit(pts.data(), 4, 2, 2, 0);
    CHECK(cb.inertia == doctest::Approx(0.0));
    for (double c : cb.centroids) CHECK(c == doctest::Approx(3.0));
}

TEST_CASE("kmeans_fit: n < k rejected") {
    std::vector<float> pts{0.0f, 1.0f};
    CHECK_THROWS_AS(kmeans_fit(pts.data(), 2, 1, 3, 0), InsufficientDataError);
}

TEST_CASE("kmeans_fit: per-iteration inertia never increases") {
    std::mt19937_64 rng(5);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    std::vector<float> pts(200 * 3);
    for (auto& v : pts) v = nd(rng);
    std::vector<double> trace;
    kmeans_fit(pts.data(), 200, 3, 8, 17, 300, 1e-12, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
}

TEST_CASE("kmeans_fit: best-of-10-seeds matches the exhaustive optimum on tiny instances") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> nn(2, 8), kk(1, 3), dd(1, 2);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = nn(rng), k = kk(rng), dim = dd(rng);
        if (n < k) n = k;
        std::vector<float> pts(n * dim);
        for (auto& v : pts) v = u(rng);
        const double opt = brute_force_inertia(pts, n, dim, k);
        const double got = best_of_seeds(pts, n, dim, k);
        CHECK(got == doctest::Approx(opt).epsilon(1e-9));
    }
}

TEST_CASE("kmeans_fit: identical inputs and seed give identical codebooks") {
    std::mt19937_64 rng(2);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    std::vector<float> pts(500 * 4);
    for (auto& v : pts) v = nd(rng);
    auto a = kmeans_fit(pts.data(), 500, 4, 10, 123);
    auto b = kmeans_fit(pts.data(), 500, 4, 10, 123);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
    CHECK(a.n_iters_run == b.n_iters_run);
}

TEST_CASE("soft_assign: exact centroid match is selected") {
    std::mt19937_64 rng(8);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    std::vector<float> pts(100 * 2);
    for (auto& v : pts) v = nd(rng);
    auto cb = kmeans_fit(pts.data(), 100, 2, 50, 0);
    std::vector<float> probe{static_cast<float>(cb.centroid(3)[0]),
                             static_cast<float>(cb.centroid(3)[1])};
    auto words = soft_assign(probe.data(), cb, 5);
    CHECK(std::find(words.begin(), words.end(), 3) != words.end());
}

TEST_CASE("soft_assign: k == n_assign selects every word") {
    Codebook cb;
    cb.k = 5;
    cb.dim = 1;
    cb.centroids = {0, 1, 2, 3, 4};
    float v = 2.5f;
    auto words = soft_assign(&v, cb, 5);
    CHECK(words == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("soft_assign: nearest five by hand") {
    Codebook cb;
    cb.k = 7;
    cb.dim = 1;
    cb.centroids = {0, 1, 2, 3, 4, 5, 6};
    float v = 0.1f;
    auto words = soft_assign(&v, cb, 5);
    CHECK(words == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("soft_assign: permuting codebook rows permutes the selection") {
    Codebook cb;
    cb.k = 6;
    cb.dim = 1;
    cb.centroids = {0, 10, 20, 30, 40, 50};
    float v = 12.0f;
    auto base = soft_assign(&v, cb, 3);
    Codebook rev = cb;
    std::reverse(rev.centroids.begin(), rev.centroids.end());
    auto flipped = soft_assign(&v, rev, 3);
    for (int w : base)
        CHECK(std::find(flipped.begin(), flipped.end(), static_cast<int>(cb.k) - 1 - w) !=
              flipped.end());
    CHECK(base.size() == 3);
    CHECK(flipped.size() == 3);
}

TEST_CASE("window_histograms: single frame with k = n_assign = 5 is uniform") {
    auto frames = make_frames(1, 2, 4);
    Codebook cb;
    cb.k = 5;
    cb.dim = 2;
    cb.centroids.assign(10, 0.0);
    for (std::size_t i = 0; i < 5; ++i) cb.centroids[i * 2] = static_cast<double>(i);
    auto hists = window_histograms(frames, cb);
    REQUIRE(hists.size() == 1);
    for (double v : hists[0].tf) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("window_histograms: constant frames concentrate on five words") {
    auto frames = make_frames(150, 2, 0);
    for (std::size_t i = 0; i < 150; ++i) {
        frames.vectors[i * 2] = 7.0f;
        frames.vectors[i * 2 + 1] = -3.0f;
    }
    std::mt19937_64 rng(10);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    std::vector<float> corpus(400 * 2);
    for (auto& v : corpus) v = nd(rng);
    auto cb = kmeans_fit(corpus.data(), 400, 2, 50, 3);
    auto hists = window_histograms(frames, cb);
    REQUIRE(hists.size() == 1);
    int nonzero = 0;
    for (double v : hists[0].tf) {
        if (v > 0.0) {
            ++nonzero;
            CHECK(v == doctest::Approx(0.2));
        }
    }
    CHECK(nonzero == 5);
}

TEST_CASE("window_histograms: window count and normalization") {
    auto frames = make_frames(400, 3, 6);
    std::vector<float> corpus(300 * 3);
    std::mt19937_64 rng(12);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (auto& v : corpus) v = nd(rng);
    auto cb = kmeans_fit(corpus.data(), 300, 3, 20, 5);
    auto hists = window_histograms(frames, cb);
    // 400 frames, 150 per window -> 2 full + 1 partial
    CHECK(hists.size() == 3);
    std::size_t full = 400 * 1 / 150;
    CHECK(full == 2);
    for (const auto& h : hists) {
        double sum = 0.0;
        for (double v : h.tf) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(hists[1].window_start == doctest::Approx(30.0));
}

TEST_CASE("window_histograms: dimension mismatch rejected") {
    auto frames = make_frames(10, 3, 1);
    Codebook cb;
    cb.k = 5;
    cb.dim = 2;
    cb.centroids.assign(10, 0.0);
    CHECK_THROWS_AS(window_histograms(frames, cb), DimensionMismatchError);
}

TEST_CASE("window_histograms: composition from a timeline") {
    auto frames = make_frames(150, 2, 13);
    std::vector<float> corpus(200 * 2);
    std::mt19937_64 rng(14);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    for (auto& v : corpus) v = nd(rng);
    auto cb = kmeans_fit(corpus.data(), 200, 2, 10, 5);
    std::vector<LabelSpan> spans{{0.0, 15.0, SpeakerTier::CHN, VocalClass::BAB}};
    auto hists = window_histograms(frames, cb, 30.0, &spans);
    REQUIRE(hists.size() == 1);
    CHECK(hists[0].total_voc_fraction == doctest::Approx(0.5));
    CHECK(hists[0].composition[static_cast<std::size_t>(
              tier_class_index(SpeakerTier::CHN, VocalClass::BAB))] == doctest::Approx(0.5));
}

TEST_CASE("frame file: bit-exact round trip") {
    auto frames = make_frames(37, 5, 21);
    frames.energy[3] = 0.75f;
    frames.probs.assign(37, std::nullopt);
    FrameProbs p;
    p.sd = {0.1f, 0.6f, 0.1f, 0.1f, 0.1f};
    p.chn = {0.8f, 0.1f, 0.1f};
    p.fan = {0.25f, 0.25f, 0.25f, 0.25f};
    p.man = {0.7f, 0.1f, 0.1f, 0.1f};
    frames.probs[10] = p;

    std::stringstream ss1;
    write_frames(ss1, frames);
    const std::string bytes1 = ss1.str();
    std::stringstream in(bytes1);
    auto back = read_frames(in);
    std::stringstream ss2;
    write_frames(ss2, back);
    CHECK(ss2.str() == bytes1);
    CHECK(back.dim == frames.dim);
    CHECK(back.vectors == frames.vectors);
    CHECK(back.probs[10] == p);
    CHECK_FALSE(back.probs[11].has_value());
}

TEST_CASE("frame file: bad magic and truncation rejected") {
    std::stringstream ss("NOPExxxxxxxxxxxxxxxxxxxx");
    CHECK_THROWS_AS(read_frames(ss), FormatError);

    auto frames = make_frames(4, 2, 30);
    std::stringstream good;
    write_frames(good, frames);
    std::string cut = good.str().substr(0, good.str().size() - 3);
    std::stringstream bad(cut);
    CHECK_THROWS_AS(read_frames(bad), FormatError);
}

TEST_CASE("codebook and histogram CSV round trips") {
    std::mt19937_64 rng(31);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    std::vector<float> pts(60 * 2);
    for (auto& v : pts) v = nd(rng);
    auto cb = kmeans_fit(pts.data(), 60, 2, 8, 77);
    std::stringstream ss;
    write_codebook_csv(ss, cb);
    auto back = read_codebook_csv(ss);
    CHECK(back.k == cb.k);
    CHECK(back.dim == cb.dim);
    CHECK(back.seed == cb.seed);
    CHECK(back.centroids == cb.centroids);

    auto frames = make_frames(160, 2, 41, "famX");
    auto hists = window_histograms(frames, cb);
    std::stringstream hs;
    write_histograms_csv(hs, hists);
    auto hback = read_histograms_csv(hs);
    REQUIRE(hback.size() == hists.size());
    CHECK(hback[0].family_id == "famX");
    CHECK(hback[0].tf == hists[0].tf);
    CHECK(hback[0].composition == hists[0].composition);
}
