#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "famviz/timeline.hpp"
#include "famviz/types.hpp"

namespace famviz::boaw {

/// Classifier probabilities attached to one frame, stored single-precision to
/// match the frame file.
struct FrameProbs {
    std::array<float, 5> sd{};
    std::array<float, 3> chn{};
    std::array<float, 4> fan{};
    std::array<float, 4> man{};

    timeline::ProbRecord to_record() const;
    bool operator==(const FrameProbs&) const = default;
};

/// Embedding vectors (plus optional energy and tier probabilities) on the
/// overlapping analysis grid.
struct FrameSequence {
    FrameGrid grid;
    std::size_t dim = 0;
    std::vector<float> vectors;                     // n_frames x dim
    std::vector<float> energy;                      // n_frames, NaN = absent
    std::vector<std::optional<FrameProbs>> probs;   // empty = no probs at all
    std::string family_id;
    double source_offset = 0.0;

    std::size_t n_frames() const { return grid.n_frames; }
    const float* frame(std::size_t i) const { return vectors.data() + i * dim; }
    bool has_energy() const;
    bool has_probs() const { return !probs.empty(); }
    std::vector<timeline::ProbRecord> prob_records() const;
    void validate() const;
};

// Binary frame file, magic FVFR, version 1, little-endian.
FrameSequence read_frames(std::istream& in);
void write_frames(std::ostream& out, const FrameSequence& frames);

/// k-means codebook over embedding frames.
struct Codebook {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;  // k x dim
    std::uint64_t seed = 0;
    std::size_t n_iters_run = 0;
    double inertia = 0.0;

    const double* centroid(std::size_t c) const { return centroids.data() + c * dim; }
};

/// Lloyd's algorithm with k-means++ seeding. Stops when the relative inertia
/// improvement drops below `tol` or after `max_iters` updates. Empty clusters
/// are re-seeded to the point farthest from its assigned centroid. When
/// `inertia_trace` is given, the per-iteration inertia values are appended.
Codebook kmeans_fit(const float* vectors, std::size_t n, std::size_t dim, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters = 300, double tol = 1e-6,
                    std::vector<double>* inertia_trace = nullptr);

/// The `n_assign` nearest codewords by Euclidean distance, ties to the lower
/// index; every selected word carries weight 1.
std::vector<int> soft_assign(const float* vector, const Codebook& codebook,
                             std::size_t n_assign = 5);

/// One 30s window's normalized bag-of-audio-words vector.
struct WindowHistogram {
    std::string family_id;
    double window_start = 0.0;
    std::vector<double> tf;          // k entries, sums to 1
    std::vector<double> composition; // indexed by all_tier_classes()
    double total_voc_fraction = 0.0;
};

/// Partition frames into consecutive non-overlapping windows by frame start
/// time and accumulate normalized codeword histograms. Composition comes from
/// `spans` when given. Windows with no frames are omitted.
std::vector<WindowHistogram> window_histograms(const FrameSequence& frames,
                                               const Codebook& codebook,
                                               double window_len = 30.0,
                                               const std::vector<LabelSpan>* spans = nullptr,
                                               std::size_t n_assign = 5);

// CSV serialization for inspection.
void write_codebook_csv(std::ostream& out, const Codebook& cb);
Codebook read_codebook_csv(std::istream& in);
void write_histograms_csv(std::ostream& out, const std::vector<WindowHistogram>& hists);
std::vector<WindowHistogram> read_histograms_csv(std::istream& in);

}  // namespace famviz::boaw
