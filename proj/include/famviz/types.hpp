#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace famviz {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedInputError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct InsufficientDataError : Error {
    using Error::Error;
};
struct DimensionMismatchError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Speaker tiers and vocalization classes
// ---------------------------------------------------------------------------

enum class SpeakerTier : std::uint8_t { SIL = 0, CHN, FAN, MAN, CXN };

enum class VocalClass : std::uint8_t { CRY = 0, FUS, BAB, CDS, ADS, LAU, SNG, CXN };

inline const char* to_string(SpeakerTier t) {
    switch (t) {
        case SpeakerTier::SIL: return "SIL";
        case SpeakerTier::CHN: return "CHN";
        case SpeakerTier::FAN: return "FAN";
        case SpeakerTier::MAN: return "MAN";
        case SpeakerTier::CXN: return "CXN";
    }
    return "?";
}

inline const char* to_string(VocalClass v) {
    switch (v) {
        case VocalClass::CRY: return "CRY";
        case VocalClass::FUS: return "FUS";
        case VocalClass::BAB: return "BAB";
        case VocalClass::CDS: return "CDS";
        case VocalClass::ADS: return "ADS";
        case VocalClass::LAU: return "LAU";
        case VocalClass::SNG: return "SNG";
        case VocalClass::CXN: return "CXN";
    }
    return "?";
}

std::optional<SpeakerTier> parse_tier(const std::string& s);
std::optional<VocalClass> parse_voc(const std::string& s);

/// True when `voc` is a legal class for `tier`.
bool tier_class_valid(SpeakerTier tier, std::optional<VocalClass> voc);

/// A (tier, class) pair that can appear in a timeline or a rendering.
struct TierClass {
    SpeakerTier tier;
    VocalClass voc;

    bool operator==(const TierClass&) const = default;
    auto operator<=>(const TierClass&) const = default;
};

/// The 12 renderable (tier, class) combinations in fixed enumeration order:
/// CHN {CRY,FUS,BAB}, FAN {CDS,ADS,LAU,SNG}, MAN {CDS,ADS,LAU,SNG}, CXN {CXN}.
const std::vector<TierClass>& all_tier_classes();

/// Index of a pair in all_tier_classes(), or -1.
int tier_class_index(SpeakerTier tier, VocalClass voc);

/// Classes valid for one non-SIL tier, in enumeration order.
const std::vector<VocalClass>& tier_classes(SpeakerTier tier);

// ---------------------------------------------------------------------------
// Time structures
// ---------------------------------------------------------------------------

/// Non-overlapping labeled time interval. SIL spans carry no class.
struct LabelSpan {
    double onset = 0.0;   // seconds
    double offset = 0.0;  // seconds, > onset
    SpeakerTier tier = SpeakerTier::SIL;
    std::optional<VocalClass> voc;

    bool operator==(const LabelSpan&) const = default;
};

/// Overlapping analysis grid: frame i covers [i*hop, i*hop + window_len).
struct FrameGrid {
    double window_len = 2.0;
    double hop = 0.2;
    std::size_t n_frames = 0;

    double frame_start(std::size_t i) const { return static_cast<double>(i) * hop; }
    double frame_end(std::size_t i) const { return frame_start(i) + window_len; }

    void validate() const {
        if (window_len <= 0.0 || hop <= 0.0 || hop > window_len)
            throw MalformedInputError("FrameGrid: need window_len > 0, 0 < hop <= window_len");
    }
};

/// One frame's resolved label. SIL implies no class.
struct FrameLabel {
    std::size_t frame_index = 0;
    SpeakerTier tier = SpeakerTier::SIL;
    std::optional<VocalClass> voc;

    bool operator==(const FrameLabel&) const = default;
};

}  // namespace famviz
