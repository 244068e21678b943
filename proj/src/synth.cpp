#include "famviz/synth.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "famviz/timeline.hpp"

namespace famviz::synth {

void RegimeSpec::validate() const {
    if (mixture.empty()) throw MalformedInputError("RegimeSpec: empty mixture");
    const std::size_t dim = mixture.front().mean.size();
    double wsum = 0.0;
    for (const auto& mc : mixture) {
        if (mc.mean.size() != dim) throw MalformedInputError("RegimeSpec: mixture dim mismatch");
        if (mc.stddev <= 0.0) throw MalformedInputError("RegimeSpec: stddev must be > 0");
        wsum += mc.weight;
    }
    if (std::fabs(wsum - 1.0) > 1e-9)
        throw MalformedInputError("RegimeSpec: mixture weights must sum to 1");
    if (duration < 60.0) throw MalformedInputError("RegimeSpec: duration must be >= 60s");
    for (const auto& e : script)
        if (e.duration <= 0.0 || !tier_class_valid(e.tier, e.voc))
            throw MalformedInputError("RegimeSpec: bad script entry");
}

Family generate_family(const RegimeSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t dim = spec.mixture.front().mean.size();

    Family fam;
    fam.frames.grid = FrameGrid{spec.window_len, spec.hop, 0};
    fam.frames.grid.n_frames =
        static_cast<std::size_t>(std::floor((spec.duration - spec.window_len) / spec.hop + 1e-9)) +
        1;
    fam.frames.dim = dim;
    fam.frames.family_id = spec.name;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t n = fam.frames.grid.n_frames;
    fam.frames.vectors.resize(n * dim);
    fam.frames.energy.assign(n, std::numeric_limits<float>::quiet_NaN());
    for (std::size_t i = 0; i < n; ++i) {
        double r = unit(rng), acc = 0.0;
        const MixtureComponent* mc = &spec.mixture.back();
        for (const auto& c : spec.mixture) {
            acc += c.weight;
            if (r <= acc) {
                mc = &c;
                break;
            }
        }
        for (std::size_t j = 0; j < dim; ++j)
            fam.frames.vectors[i * dim + j] =
                static_cast<float>(mc->mean[j] + mc->stddev * gauss(rng));
    }

    if (!spec.script.empty()) {
        double t = 0.0;
        std::size_t si = 0;
        while (t < spec.duration) {
            const ScriptEntry& e = spec.script[si % spec.script.size()];
            const double end = std::min(t + e.duration, spec.duration);
            if (e.tier != SpeakerTier::SIL && end > t)
                fam.spans.push_back({t, end, e.tier, e.voc});
            t = end;
            ++si;
        }
    }
    return fam;
}

namespace {

// Peak class gets `peak`, the rest share the remainder; the last entry
// absorbs float rounding so the distribution sums to 1 exactly.
template <std::size_t N>
void fill_dist(std::array<float, N>& dist, std::size_t peak_idx, double peak) {
    const double rest = (N > 1) ? (1.0 - peak) / static_cast<double>(N - 1) : 0.0;
    float sum = 0.0f;
    for (std::size_t i = 0; i < N; ++i) {
        dist[i] = static_cast<float>(i == peak_idx ? peak : rest);
        if (i + 1 < N) sum += dist[i];
    }
    dist[N - 1] = 1.0f - sum;
}

}  // namespace

std::vector<boaw::FrameProbs> generate_probability_stream(const std::vector<LabelSpan>& spans,
                                                          const FrameGrid& grid,
                                                          double confusion_rate,
                                                          std::uint64_t seed,
                                                          std::optional<double> peak_mass) {
    if (confusion_rate < 0.0 || confusion_rate >= 1.0)
        throw MalformedInputError("generate_probability_stream: confusion_rate must be in [0, 1)");
    const double peak = peak_mass.value_or(1.0 - confusion_rate);

    auto truth = timeline::majority_label(spans, grid);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<boaw::FrameProbs> out(grid.n_frames);
    for (std::size_t i = 0; i < grid.n_frames; ++i) {
        SpeakerTier tier = truth[i].discarded ? SpeakerTier::SIL : truth[i].tier;
        std::optional<VocalClass> voc = truth[i].discarded ? std::nullopt : truth[i].voc;

        if (confusion_rate > 0.0 && unit(rng) < confusion_rate) {
            // flip to a uniformly random wrong tier
            const std::size_t shift = 1 + static_cast<std::size_t>(unit(rng) * 4.0) % 4;
            tier = static_cast<SpeakerTier>((static_cast<std::size_t>(tier) + shift) % 5);
            voc.reset();
        }

        boaw::FrameProbs& p = out[i];
        fill_dist(p.sd, static_cast<std::size_t>(tier), peak);

        auto class_peak = [&](SpeakerTier t) -> std::size_t {
            if (tier == t && voc) {
                const auto& classes = tier_classes(t);
                for (std::size_t c = 0; c < classes.size(); ++c)
                    if (classes[c] == *voc) return c;
            }
            return 0;
        };
        fill_dist(p.chn, class_peak(SpeakerTier::CHN), peak);
        fill_dist(p.fan, class_peak(SpeakerTier::FAN), peak);
        fill_dist(p.man, class_peak(SpeakerTier::MAN), peak);
    }
    return out;
}

}  // namespace famviz::synth
