#include "famviz/types.hpp"

namespace famviz {

std::optional<SpeakerTier> parse_tier(const std::string& s) {
    if (s == "SIL") return SpeakerTier::SIL;
    if (s == "CHN") return SpeakerTier::CHN;
    if (s == "FAN") return SpeakerTier::FAN;
    if (s == "MAN") return SpeakerTier::MAN;
    if (s == "CXN") return SpeakerTier::CXN;
    return std::nullopt;
}

std::optional<VocalClass> parse_voc(const std::string& s) {
    if (s == "CRY") return VocalClass::CRY;
    if (s == "FUS") return VocalClass::FUS;
    if (s == "BAB") return VocalClass::BAB;
    if (s == "CDS") return VocalClass::CDS;
    if (s == "ADS") return VocalClass::ADS;
    if (s == "LAU") return VocalClass::LAU;
    if (s == "SNG") return VocalClass::SNG;
    if (s == "CXN") return VocalClass::CXN;
    return std::nullopt;
}

const std::vector<VocalClass>& tier_classes(SpeakerTier tier) {
    static const std::vector<VocalClass> chn{VocalClass::CRY, VocalClass::FUS, VocalClass::BAB};
    static const std::vector<VocalClass> adult{VocalClass::CDS, VocalClass::ADS, VocalClass::LAU,
                                               VocalClass::SNG};
    static const std::vector<VocalClass> cxn{VocalClass::CXN};
    static const std::vector<VocalClass> none{};
    switch (tier) {
        case SpeakerTier::CHN: return chn;
        case SpeakerTier::FAN: return adult;
        case SpeakerTier::MAN: return adult;
        case SpeakerTier::CXN: return cxn;
        case SpeakerTier::SIL: return none;
    }
    return none;
}

bool tier_class_valid(SpeakerTier tier, std::optional<VocalClass> voc) {
    if (tier == SpeakerTier::SIL) return !voc.has_value();
    if (!voc.has_value()) return false;
    for (VocalClass c : tier_classes(tier))
        if (c == *voc) return true;
    return false;
}

const std::vector<TierClass>& all_tier_classes() {
    static const std::vector<TierClass> all = [] {
        std::vector<TierClass> v;
        for (SpeakerTier t : {SpeakerTier::CHN, SpeakerTier::FAN, SpeakerTier::MAN, SpeakerTier::CXN})
            for (VocalClass c : tier_classes(t)) v.push_back({t, c});
        return v;
    }();
    return all;
}

int tier_class_index(SpeakerTier tier, VocalClass voc) {
    const auto& all = all_tier_classes();
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].tier == tier && all[i].voc == voc) return static_cast<int>(i);
    return -1;
}

}  // namespace famviz
