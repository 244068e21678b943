#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "famviz/boaw.hpp"
#include "famviz/types.hpp"

namespace famviz::synth {

struct MixtureComponent {
    std::vector<double> mean;
    double stddev = 1.0;
    double weight = 1.0;
};

/// One entry of the repeating label script; SIL entries leave a gap.
struct ScriptEntry {
    SpeakerTier tier = SpeakerTier::SIL;
    std::optional<VocalClass> voc;
    double duration = 1.0;
};

/// Synthetic family recipe: an isotropic Gaussian mixture in embedding space
/// plus a cyclic label script.
struct RegimeSpec {
    std::string name;
    std::vector<MixtureComponent> mixture;
    std::vector<ScriptEntry> script;
    double duration = 600.0;  // seconds
    double window_len = 2.0;
    double hop = 0.2;

    void validate() const;
};

struct Family {
    boaw::FrameSequence frames;
    std::vector<LabelSpan> spans;
};

/// Frames drawn i.i.d. from the mixture on the analysis grid; timeline from
/// the cyclic script. Deterministic per seed.
Family generate_family(const RegimeSpec& spec, std::uint64_t seed);

/// Per-frame probability records whose argmax matches the frame's majority
/// label, except that with probability `confusion_rate` the argmax flips to a
/// random wrong tier. The peak class receives `peak_mass` (default
/// 1 - confusion_rate) and the rest is spread uniformly.
std::vector<boaw::FrameProbs> generate_probability_stream(
    const std::vector<LabelSpan>& spans, const FrameGrid& grid, double confusion_rate,
    std::uint64_t seed, std::optional<double> peak_mass = std::nullopt);

}  // namespace famviz::synth
