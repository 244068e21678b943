#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "famviz/audioenergy.hpp"

using namespace famviz;
using namespace famviz::audio;

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::vector<std::uint8_t> wav_pcm16(std::uint32_t rate, std::uint16_t channels,
                                    const std::vector<std::int16_t>& samples) {
    std::vector<std::uint8_t> b;
    const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    put_u32(b, 36 + data_len);
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    put_u32(b, 16);
    put_u16(b, 1);  // PCM
    put_u16(b, channels);
    put_u32(b, rate);
    put_u32(b, rate * channels * 2);
    put_u16(b, static_cast<std::uint16_t>(channels * 2));
    put_u16(b, 16);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    put_u32(b, data_len);
    for (std::int16_t s : samples) put_u16(b, static_cast<std::uint16_t>(s));
    return b;
}

PcmClip constant_clip(float amp, double seconds = 4.0, std::uint32_t rate = 100) {
    PcmClip c;
    c.sample_rate = rate;
    c.samples.assign(static_cast<std::size_t>(seconds * rate), amp);
    return c;
}

}  // namespace

TEST_CASE("read_wav: zeros stay zeros") {
    auto bytes = wav_pcm16(8000, 1, std::vector<std::int16_t>(16, 0));
    auto clip = read_wav(bytes);
    CHECK(clip.sample_rate == 8000);
    REQUIRE(clip.samples.size() == 16);
    for (float s : clip.samples) CHECK(s == 0.0f);
}

TEST_CASE("read_wav: full-scale negative maps to -1") {
    auto clip = read_wav(wav_pcm16(8000, 1, {-32768}));
    CHECK(clip.samples[0] == doctest::Approx(-1.0));
}

TEST_CASE("read_wav: stereo mixdown averages channels") {
    // L = 0.5, R = -0.5 -> 0
    auto clip = read_wav(wav_pcm16(8000, 2, {16384, -16384}));
    REQUIRE(clip.samples.size() == 1);
    CHECK(clip.samples[0] == doctest::Approx(0.0));
}

TEST_CASE("read_wav: float32 samples pass through") {
    std::vector<std::uint8_t> b;
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    put_u32(b, 36 + 8);
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    put_u32(b, 16);
    put_u16(b, 3);  // IEEE float
    put_u16(b, 1);
    put_u32(b, 44100);
    put_u32(b, 44100 * 4);
    put_u16(b, 4);
    put_u16(b, 32);
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    put_u32(b, 8);
    float vals[2] = {0.25f, -0.75f};
    const std::uint8_t* p = reinterpret_cast<const std::uint8_t*>(vals);
    b.insert(b.end(), p, p + 8);
    auto clip = read_wav(b);
    CHECK(clip.samples[0] == doctest::Approx(0.25));
    CHECK(clip.samples[1] == doctest::Approx(-0.75));
}

TEST_CASE("read_wav: format errors name the offending chunk") {
    std::vector<std::uint8_t> junk{'J', 'U', 'N', 'K'};
    CHECK_THROWS_AS(read_wav(junk), FormatError);

    auto good = wav_pcm16(8000, 1, {0, 0});
    auto truncated = good;
    truncated.resize(truncated.size() - 2);
    CHECK_THROWS_WITH_AS(read_wav(truncated), doctest::Contains("data"), FormatError);

    auto bad_codec = wav_pcm16(8000, 1, {0});
    bad_codec[20] = 7;  // mu-law
    CHECK_THROWS_WITH_AS(read_wav(bad_codec), doctest::Contains("fmt"), FormatError);

    // no fmt chunk at all
    std::vector<std::uint8_t> nofmt;
    nofmt.insert(nofmt.end(), {'R', 'I', 'F', 'F'});
    put_u32(nofmt, 12);
    nofmt.insert(nofmt.end(), {'W', 'A', 'V', 'E'});
    nofmt.insert(nofmt.end(), {'d', 'a', 't', 'a'});
    put_u32(nofmt, 0);
    CHECK_THROWS_WITH_AS(read_wav(nofmt), doctest::Contains("fmt"), FormatError);
}

TEST_CASE("frame_energy: constant amplitude gives constant RMS") {
    auto track = frame_energy(constant_clip(0.5f));
    REQUIRE(track.grid.n_frames == 11);  // (400 - 200) / 20 + 1
    for (float v : track.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("frame_energy: silence gives zero") {
    auto track = frame_energy(constant_clip(0.0f));
    for (float v : track.values) CHECK(v == 0.0f);
}

TEST_CASE("frame_energy: unit square wave has RMS 1") {
    PcmClip c;
    c.sample_rate = 100;
    for (int i = 0; i < 400; ++i) c.samples.push_back(i % 2 ? 1.0f : -1.0f);
    auto track = frame_energy(c);
    for (float v : track.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("frame_energy: trailing partial windows are dropped") {
    auto track = frame_energy(constant_clip(0.1f, 2.5));
    // 250 samples, window 200, hop 20 -> frames at 0..50
    CHECK(track.grid.n_frames == 3);
}

TEST_CASE("frame_energy: empty clip rejected") {
    PcmClip c;
    c.sample_rate = 100;
    CHECK_THROWS_AS(frame_energy(c), MalformedInputError);
}

TEST_CASE("frame_energy: sign flip invariance and homogeneity") {
    PcmClip c;
    c.sample_rate = 100;
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i)
        c.samples.push_back(static_cast<float>((rng() % 2000) / 1000.0 - 1.0));
    auto base = frame_energy(c);

    PcmClip flipped = c;
    for (float& s : flipped.samples) s = -s;
    auto ft = frame_energy(flipped);
    for (std::size_t i = 0; i < base.values.size(); ++i)
        CHECK(ft.values[i] == doctest::Approx(base.values[i]));

    PcmClip scaled = c;
    for (float& s : scaled.samples) s *= 0.25f;  // exact in binary float
    auto st = frame_energy(scaled);
    for (std::size_t i = 0; i < base.values.size(); ++i)
        CHECK(st.values[i] == doctest::Approx(0.25 * base.values[i]));
}

TEST_CASE("derive_energy_threshold") {
    EnergyTrack track;
    track.grid = FrameGrid{2.0, 0.2, 4};
    track.values = {0.2f, 0.5f, 0.9f, 1.0f};
    CHECK(derive_energy_threshold(track, {0, 1}) == doctest::Approx(0.198));
    CHECK(derive_energy_threshold(track, {3}) == doctest::Approx(0.99));
    CHECK_THROWS_AS(derive_energy_threshold(track, {}), InsufficientDataError);

    EnergyTrack zeros;
    zeros.grid = track.grid;
    zeros.values = {0.0f, 0.0f, 0.0f, 0.0f};
    CHECK(derive_energy_threshold(zeros, {0, 1, 2, 3}) == 0.0);

    // strictly below the minimum whenever it is positive
    CHECK(derive_energy_threshold(track, {1, 2}) < 0.5);
}
