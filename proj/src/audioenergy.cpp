#include "famviz/audioenergy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "famviz/kernels.hpp"

namespace famviz::audio {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

PcmClip read_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw FormatError("wav: missing RIFF/WAVE header");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    const std::uint8_t* data_ptr = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        char id[5] = {0};
        std::memcpy(id, bytes.data() + pos, 4);
        std::uint32_t len = read_u32(bytes.data() + pos + 4);
        pos += 8;
        if (pos + len > bytes.size())
            throw FormatError(std::string("wav: truncated '") + id + "' chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) throw FormatError("wav: truncated 'fmt ' chunk");
            format = read_u16(bytes.data() + pos);
            channels = read_u16(bytes.data() + pos + 2);
            sample_rate = read_u32(bytes.data() + pos + 4);
            bits = read_u16(bytes.data() + pos + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_ptr = bytes.data() + pos;
            data_len = len;
        }
        pos += len + (len & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw FormatError("wav: missing 'fmt ' chunk");
    if (!data_ptr) throw FormatError("wav: missing 'data' chunk");
    if (channels != 1 && channels != 2)
        throw FormatError("wav: unsupported channel count in 'fmt ' chunk");
    if (sample_rate == 0) throw FormatError("wav: zero sample rate in 'fmt ' chunk");

    const bool pcm16 = (format == 1 && bits == 16);
    const bool f32 = (format == 3 && bits == 32);
    if (!pcm16 && !f32)
        throw FormatError("wav: unsupported codec in 'fmt ' chunk (need PCM16 or float32)");

    const std::size_t bytes_per = (pcm16 ? 2u : 4u) * channels;
    const std::size_t n = data_len / bytes_per;

    PcmClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::uint8_t* sp = data_ptr + (i * channels + c) * (pcm16 ? 2u : 4u);
            if (pcm16) {
                std::int16_t v = static_cast<std::int16_t>(read_u16(sp));
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, sp, 4);
                acc += static_cast<double>(v);
            }
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }
    return clip;
}

EnergyTrack frame_energy(const PcmClip& clip, double window_len, double hop) {
    if (clip.samples.empty() || clip.sample_rate == 0)
        throw MalformedInputError("frame_energy: empty clip");
    FrameGrid grid{window_len, hop, 0};
    grid.validate();
    if (clip.duration() < window_len)
        throw MalformedInputError("frame_energy: clip shorter than one analysis window");

    const std::size_t win = static_cast<std::size_t>(std::llround(window_len * clip.sample_rate));
    const std::size_t hops = static_cast<std::size_t>(std::llround(hop * clip.sample_rate));
    const std::size_t n = clip.samples.size() >= win ? (clip.samples.size() - win) / hops + 1 : 0;

    EnergyTrack track;
    track.grid = grid;
    track.grid.n_frames = n;
    track.values.resize(n);
    kernels::rms_frames(clip.samples.data(), win, hops, n, track.values.data());
    return track;
}

double derive_energy_threshold(const EnergyTrack& energy,
                               const std::vector<std::size_t>& chn_frames) {
    if (chn_frames.empty())
        throw InsufficientDataError("derive_energy_threshold: no CHN frames");
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i : chn_frames) {
        if (i >= energy.values.size())
            throw MalformedInputError("derive_energy_threshold: frame index out of range");
        mn = std::min(mn, static_cast<double>(energy.values[i]));
    }
    return 0.99 * mn;
}

}  // namespace famviz::audio
