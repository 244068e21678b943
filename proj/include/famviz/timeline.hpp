#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "famviz/types.hpp"

namespace famviz::timeline {

/// Per-frame outcome of the majority-labeling rule. A discarded frame is kept
/// distinct from SIL so corpus statistics stay auditable.
struct MajorityFrame {
    SpeakerTier tier = SpeakerTier::SIL;
    std::optional<VocalClass> voc;
    bool discarded = false;

    bool operator==(const MajorityFrame&) const = default;
};

/// Resolve each grid frame to the (tier, class) covering strictly more than
/// half of it. Frames touched by two or more non-SIL tiers are discarded;
/// frames whose energy falls below `energy_threshold` become SIL; so do
/// frames where no label wins the strict majority.
std::vector<MajorityFrame> majority_label(const std::vector<LabelSpan>& spans,
                                          const FrameGrid& grid,
                                          const std::vector<float>* energy = nullptr,
                                          std::optional<double> energy_threshold = std::nullopt);

/// One frame of classifier output: a speaker distribution plus per-tier class
/// distributions. CXN has a single class, so it needs no distribution.
struct ProbRecord {
    std::array<double, 5> sd{};   // SIL, CHN, FAN, MAN, CXN
    std::array<double, 3> chn{};  // CRY, FUS, BAB
    std::array<double, 4> fan{};  // CDS, ADS, LAU, SNG
    std::array<double, 4> man{};  // CDS, ADS, LAU, SNG
};

/// Argmax decode with confidence and energy gating: a frame is forced to SIL
/// when the top speaker probability or the winning tier's top class
/// probability is below `conf_threshold`, or its energy is below
/// `energy_threshold`.
std::vector<FrameLabel> decode_machine_labels(const std::vector<ProbRecord>& frames,
                                              const FrameGrid& grid,
                                              double conf_threshold = 0.8,
                                              const std::vector<float>* energy = nullptr,
                                              std::optional<double> energy_threshold = std::nullopt);

/// Turn overlapping per-frame labels into a non-overlapping span timeline.
/// Identical consecutive labels merge; differing overlapping labels split at
/// the midpoint of their overlap. SIL runs place boundaries the same way but
/// produce no spans of their own.
std::vector<LabelSpan> resolve_conflicts(const std::vector<FrameLabel>& labels,
                                         const FrameGrid& grid);

/// Time-fraction composition of one window.
struct WindowComposition {
    std::vector<double> fractions;  // indexed by all_tier_classes()
    double total_voc_fraction = 0.0;
};

/// Fraction of `window_len` spent in each (tier, class) within
/// [window_start, window_start + window_len), plus the total non-SIL fraction.
WindowComposition window_composition(const std::vector<LabelSpan>& spans, double window_start,
                                     double window_len = 30.0);

/// Throws MalformedInputError on unordered/overlapping spans or bad pairs.
void validate_spans(const std::vector<LabelSpan>& spans);

// CSV format: header `onset_s,offset_s,tier,voc`; voc empty for SIL.
std::vector<LabelSpan> read_labels_csv(std::istream& in);
void write_labels_csv(std::ostream& out, const std::vector<LabelSpan>& spans);

}  // namespace famviz::timeline
