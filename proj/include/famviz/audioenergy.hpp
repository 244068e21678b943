#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "famviz/types.hpp"

namespace famviz::audio {

/// Mono PCM clip with amplitudes normalized to [-1, 1].
struct PcmClip {
    std::uint32_t sample_rate = 0;
    std::vector<float> samples;

    double duration() const {
        return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

/// Per-frame RMS energy on a FrameGrid.
struct EnergyTrack {
    FrameGrid grid;
    std::vector<float> values;
};

/// Parse a RIFF/WAVE container (PCM 16-bit or IEEE float 32-bit, mono or
/// stereo). Stereo is mixed down by averaging channels; 16-bit samples are
/// scaled by 1/32768.
PcmClip read_wav(std::span<const std::uint8_t> bytes);

/// RMS over each [i*hop, i*hop + window_len) window. Trailing partial
/// windows are dropped so the frame count lines up with embedding frames.
EnergyTrack frame_energy(const PcmClip& clip, double window_len = 2.0, double hop = 0.2);

/// Silence threshold: 0.99 x the minimum energy over the key-child frames.
double derive_energy_threshold(const EnergyTrack& energy,
                               const std::vector<std::size_t>& chn_frames);

}  // namespace famviz::audio
