#include "famviz/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace famviz::timeline {

namespace {

constexpr double kEps = 1e-12;

double overlap_len(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

void validate_spans(const std::vector<LabelSpan>& spans) {
    double prev_onset = -1.0;
    for (const auto& s : spans) {
        if (!(s.offset > s.onset) || s.onset < 0.0)
            throw MalformedInputError("LabelSpan: need 0 <= onset < offset, got [" +
                                      std::to_string(s.onset) + ", " + std::to_string(s.offset) + ")");
        if (!tier_class_valid(s.tier, s.voc))
            throw MalformedInputError(std::string("LabelSpan: invalid (tier, class) pair ") +
                                      to_string(s.tier));
        if (s.onset < prev_onset)
            throw MalformedInputError("LabelSpan timeline not sorted by onset");
        prev_onset = s.onset;
    }
    // non-overlap within each tier
    std::map<SpeakerTier, double> last_offset;
    for (const auto& s : spans) {
        auto it = last_offset.find(s.tier);
        if (it != last_offset.end() && s.onset < it->second - kEps)
            throw MalformedInputError(std::string("overlapping spans within tier ") +
                                      to_string(s.tier));
        last_offset[s.tier] = std::max(it == last_offset.end() ? 0.0 : it->second, s.offset);
    }
}

std::vector<MajorityFrame> majority_label(const std::vector<LabelSpan>& spans,
                                          const FrameGrid& grid,
                                          const std::vector<float>* energy,
                                          std::optional<double> energy_threshold) {
    grid.validate();
    validate_spans(spans);
    if (energy && energy->size() != grid.n_frames)
        throw MalformedInputError("energy track length does not match grid");

    std::vector<MajorityFrame> out(grid.n_frames);
    // spans are sorted by onset; advance a cursor as frames move forward
    std::size_t first_span = 0;
    for (std::size_t i = 0; i < grid.n_frames; ++i) {
        const double fs = grid.frame_start(i), fe = grid.frame_end(i);
        while (first_span < spans.size() && spans[first_span].offset <= fs + kEps) ++first_span;

        // coverage per (tier, class); SIL spans count toward no label
        std::map<std::pair<SpeakerTier, int>, double> cover;
        std::vector<SpeakerTier> tiers_seen;
        for (std::size_t j = first_span; j < spans.size() && spans[j].onset < fe - kEps; ++j) {
            const auto& sp = spans[j];
            double ov = overlap_len(fs, fe, sp.onset, sp.offset);
            if (ov <= kEps) continue;
            if (sp.tier != SpeakerTier::SIL) {
                if (std::find(tiers_seen.begin(), tiers_seen.end(), sp.tier) == tiers_seen.end())
                    tiers_seen.push_back(sp.tier);
                cover[{sp.tier, sp.voc ? static_cast<int>(*sp.voc) : -1}] += ov;
            }
        }

        MajorityFrame& mf = out[i];
        if (tiers_seen.size() >= 2) {
            mf.discarded = true;
            continue;
        }
        if (energy && energy_threshold && static_cast<double>((*energy)[i]) < *energy_threshold) {
            continue;  // SIL
        }
        const double need = 0.5 * grid.window_len;
        for (const auto& [key, ov] : cover) {
            if (ov > need + 0.0) {  // strict majority; exact 50/50 stays SIL
                mf.tier = key.first;
                if (key.second >= 0) mf.voc = static_cast<VocalClass>(key.second);
                break;
            }
        }
    }
    return out;
}

namespace {

void check_dist(const double* p, std::size_t n, const char* name) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    if (std::fabs(s - 1.0) > 1e-6)
        throw MalformedInputError(std::string("probability distribution '") + name +
                                  "' does not sum to 1");
}

template <std::size_t N>
std::pair<int, double> argmax(const std::array<double, N>& p) {
    int best = 0;
    for (std::size_t i = 1; i < N; ++i)
        if (p[i] > p[best]) best = static_cast<int>(i);
    return {best, p[best]};
}

}  // namespace

std::vector<FrameLabel> decode_machine_labels(const std::vector<ProbRecord>& frames,
                                              const FrameGrid& grid, double conf_threshold,
                                              const std::vector<float>* energy,
                                              std::optional<double> energy_threshold) {
    grid.validate();
    if (energy && energy->size() != frames.size())
        throw MalformedInputError("energy track length does not match probability stream");

    std::vector<FrameLabel> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const ProbRecord& r = frames[i];
        check_dist(r.sd.data(), r.sd.size(), "SD");
        check_dist(r.chn.data(), r.chn.size(), "CHN");
        check_dist(r.fan.data(), r.fan.size(), "FAN");
        check_dist(r.man.data(), r.man.size(), "MAN");

        FrameLabel fl;
        fl.frame_index = i;
        auto [sd_idx, sd_max] = argmax(r.sd);
        SpeakerTier tier = static_cast<SpeakerTier>(sd_idx);

        bool sil = (tier == SpeakerTier::SIL);
        if (!sil && sd_max < conf_threshold) sil = true;
        if (!sil && energy && energy_threshold &&
            static_cast<double>((*energy)[i]) < *energy_threshold)
            sil = true;
        if (!sil) {
            int cls = 0;
            double cls_max = 1.0;  // CXN has a single class
            switch (tier) {
                case SpeakerTier::CHN: std::tie(cls, cls_max) = argmax(r.chn); break;
                case SpeakerTier::FAN: std::tie(cls, cls_max) = argmax(r.fan); break;
                case SpeakerTier::MAN: std::tie(cls, cls_max) = argmax(r.man); break;
                default: break;
            }
            if (cls_max < conf_threshold) {
                sil = true;
            } else {
                fl.tier = tier;
                fl.voc = tier_classes(tier)[static_cast<std::size_t>(cls)];
            }
        }
        out.push_back(fl);
    }
    return out;
}

std::vector<LabelSpan> resolve_conflicts(const std::vector<FrameLabel>& labels,
                                         const FrameGrid& grid) {
    grid.validate();
    // SIL frames participate as runs so label-to-silence boundaries land at
    // the overlap midpoint too; their spans are dropped at the end.
    std::vector<LabelSpan> out;
    std::optional<LabelSpan> cur;
    for (const FrameLabel& fl : labels) {
        const double s = grid.frame_start(fl.frame_index);
        const double e = grid.frame_end(fl.frame_index);
        if (!cur) {
            cur = LabelSpan{s, e, fl.tier, fl.voc};
            continue;
        }
        const bool same = (cur->tier == fl.tier && cur->voc == fl.voc);
        if (same && s <= cur->offset + kEps) {
            cur->offset = std::max(cur->offset, e);
        } else if (s < cur->offset - kEps) {
            // conflicting overlap: split at the midpoint of the overlap region
            const double mid = 0.5 * (s + cur->offset);
            cur->offset = mid;
            out.push_back(*cur);
            cur = LabelSpan{mid, e, fl.tier, fl.voc};
        } else {
            out.push_back(*cur);
            cur = LabelSpan{s, e, fl.tier, fl.voc};
        }
    }
    if (cur) out.push_back(*cur);
    std::erase_if(out, [](const LabelSpan& sp) { return sp.tier == SpeakerTier::SIL; });
    return out;
}

WindowComposition window_composition(const std::vector<LabelSpan>& spans, double window_start,
                                     double window_len) {
    WindowComposition wc;
    wc.fractions.assign(all_tier_classes().size(), 0.0);
    const double w0 = window_start, w1 = window_start + window_len;
    for (const auto& sp : spans) {
        if (sp.tier == SpeakerTier::SIL || !sp.voc) continue;
        double ov = overlap_len(w0, w1, sp.onset, sp.offset);
        if (ov <= 0.0) continue;
        int idx = tier_class_index(sp.tier, *sp.voc);
        if (idx >= 0) wc.fractions[static_cast<std::size_t>(idx)] += ov / window_len;
    }
    for (double f : wc.fractions) wc.total_voc_fraction += f;
    return wc;
}

std::vector<LabelSpan> read_labels_csv(std::istream& in) {
    std::vector<LabelSpan> spans;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("onset_s", 0) == 0) continue;
        std::stringstream ss(line);
        std::string f0, f1, f2, f3;
        std::getline(ss, f0, ',');
        std::getline(ss, f1, ',');
        std::getline(ss, f2, ',');
        std::getline(ss, f3, ',');
        LabelSpan sp;
        try {
            sp.onset = std::stod(f0);
            sp.offset = std::stod(f1);
        } catch (const std::exception&) {
            throw FormatError("labels CSV line " + std::to_string(lineno) + ": bad number");
        }
        auto tier = parse_tier(f2);
        if (!tier) throw FormatError("labels CSV line " + std::to_string(lineno) + ": bad tier '" + f2 + "'");
        sp.tier = *tier;
        if (!f3.empty()) {
            auto voc = parse_voc(f3);
            if (!voc)
                throw FormatError("labels CSV line " + std::to_string(lineno) + ": bad class '" + f3 + "'");
            sp.voc = voc;
        }
        if (!tier_class_valid(sp.tier, sp.voc))
            throw FormatError("labels CSV line " + std::to_string(lineno) + ": invalid (tier, class)");
        spans.push_back(sp);
    }
    return spans;
}

void write_labels_csv(std::ostream& out, const std::vector<LabelSpan>& spans) {
    out << "onset_s,offset_s,tier,voc\n";
    char buf[128];
    for (const auto& sp : spans) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%s,%s\n", sp.onset, sp.offset,
                      to_string(sp.tier), sp.voc ? to_string(*sp.voc) : "");
        out << buf;
    }
}

}  // namespace famviz::timeline
