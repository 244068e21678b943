#include "famviz/viz.hpp"

#include "famviz/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace famviz::viz {

std::map<TierClass, std::string> default_palette() {
    using T = SpeakerTier;
    using V = VocalClass;
    return {
        {{T::CHN, V::CRY}, "#08306b"}, {{T::CHN, V::FUS}, "#2171b5"},
        {{T::CHN, V::BAB}, "#6baed6"}, {{T::FAN, V::CDS}, "#67000d"},
        {{T::FAN, V::ADS}, "#cb181d"}, {{T::FAN, V::LAU}, "#fb6a4a"},
        {{T::FAN, V::SNG}, "#fcae91"}, {{T::MAN, V::CDS}, "#00441b"},
        {{T::MAN, V::ADS}, "#238b45"}, {{T::MAN, V::LAU}, "#74c476"},
        {{T::MAN, V::SNG}, "#bae4b3"}, {{T::CXN, V::CXN}, "#e6550d"},
    };
}

void RenderSpec::validate() const {
    if (!(max_radius > min_radius) || min_radius < 0.0)
        throw MalformedInputError("RenderSpec: need max_radius > min_radius >= 0");
    if (width <= 2.0 * margin || height <= 2.0 * margin)
        throw MalformedInputError("RenderSpec: margin leaves no drawing area");
    for (const auto& tc : all_tier_classes())
        if (palette.find(tc) == palette.end())
            throw MalformedInputError(std::string("RenderSpec: palette missing ") +
                                      to_string(tc.tier) + "/" + to_string(tc.voc));
}

PiePoint make_pie_point(double x, double y, const std::vector<double>& composition,
                        double total_fraction) {
    PiePoint pt;
    pt.x = x;
    pt.y = y;
    pt.total_fraction = total_fraction;
    const auto& all = all_tier_classes();
    for (std::size_t i = 0; i < all.size() && i < composition.size(); ++i)
        if (composition[i] > 0.0) pt.slices.emplace_back(all[i], composition[i]);
    return pt;
}

std::vector<double> slice_angles(const PiePoint& pt) {
    std::vector<double> angles;
    if (pt.total_fraction <= 0.0) return angles;
    for (const auto& [tc, frac] : pt.slices) angles.push_back(360.0 * frac / pt.total_fraction);
    return angles;
}

std::vector<std::size_t> cluster_subsample(const std::vector<boaw::WindowHistogram>& histograms,
                                           std::size_t n_clusters, std::size_t per_cluster,
                                           std::uint64_t seed) {
    const std::size_t n = histograms.size();
    std::vector<std::size_t> out;
    if (n < n_clusters) {
        std::cerr << "cluster_subsample: only " << n << " histograms for " << n_clusters
                  << " clusters; passing all through\n";
        out.resize(n);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    const std::size_t k = histograms.front().tf.size();
    std::vector<float> data(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        if (histograms[i].tf.size() != k)
            throw MalformedInputError("cluster_subsample: inconsistent histogram sizes");
        for (std::size_t j = 0; j < k; ++j) data[i * k + j] = static_cast<float>(histograms[i].tf[j]);
    }
    boaw::Codebook cb = boaw::kmeans_fit(data.data(), n, k, n_clusters, seed);
    std::vector<int> assign(n);
    std::vector<double> sqd(n);
    kernels::assign_nearest(data.data(), n, k, cb.centroids.data(), n_clusters, assign.data(),
                            sqd.data());

    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < n_clusters; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i)
            if (static_cast<std::size_t>(assign[i]) == c) members.push_back(i);
        if (members.size() > per_cluster) {
            std::shuffle(members.begin(), members.end(), rng);
            members.resize(per_cluster);
            std::sort(members.begin(), members.end());
        }
        out.insert(out.end(), members.begin(), members.end());
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::string render_svg(const std::vector<PiePoint>& points, const RenderSpec& spec) {
    spec.validate();
    if (points.empty()) throw DegenerateInputError("render_svg: empty point set");
    for (const auto& p : points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw MalformedInputError("render_svg: non-finite coordinates");

    double xmin = points[0].x, xmax = points[0].x, ymin = points[0].y, ymax = points[0].y;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double avail_w = spec.width - 2.0 * spec.margin;
    const double avail_h = spec.height - 2.0 * spec.margin;
    const double rx = xmax - xmin, ry = ymax - ymin;
    double scale = 0.0;
    if (rx > 0.0 && ry > 0.0)
        scale = std::min(avail_w / rx, avail_h / ry);
    else if (rx > 0.0)
        scale = avail_w / rx;
    else if (ry > 0.0)
        scale = avail_h / ry;
    const double cx0 = 0.5 * (xmin + xmax), cy0 = 0.5 * (ymin + ymax);

    auto px = [&](double x) { return 0.5 * spec.width + (x - cx0) * scale; };
    auto py = [&](double y) { return 0.5 * spec.height - (y - cy0) * scale; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(spec.width)
        << "\" height=\"" << fmt(spec.height) << "\" viewBox=\"0 0 " << fmt(spec.width) << " "
        << fmt(spec.height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const double span = spec.max_radius - spec.min_radius;
    const double deg2rad = 3.14159265358979323846 / 180.0;

    for (const auto& p : points) {
        const double cx = px(p.x), cy = py(p.y);
        const double tf = std::clamp(p.total_fraction, 0.0, 1.0);
        const double r = spec.min_radius + span * std::sqrt(tf);
        if (p.total_fraction <= 0.0 || p.slices.empty()) {
            svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\""
                << fmt(spec.min_radius) << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"0.6\"/>\n";
            continue;
        }
        double angle = -90.0;  // 12 o'clock, sweeping clockwise
        for (const auto& [tc, frac] : p.slices) {
            const double sweep = 360.0 * frac / p.total_fraction;
            auto it = spec.palette.find(tc);
            const std::string& color = it->second;
            if (sweep >= 360.0 - 1e-9) {
                // full disc as a single path of two half arcs
                svg << "<path d=\"M " << fmt(cx) << " " << fmt(cy - r) << " A " << fmt(r) << " "
                    << fmt(r) << " 0 1 1 " << fmt(cx) << " " << fmt(cy + r) << " A " << fmt(r)
                    << " " << fmt(r) << " 0 1 1 " << fmt(cx) << " " << fmt(cy - r)
                    << " Z\" fill=\"" << color << "\"/>\n";
                angle += sweep;
                continue;
            }
            const double a0 = angle * deg2rad, a1 = (angle + sweep) * deg2rad;
            const double x0 = cx + r * std::cos(a0), y0 = cy + r * std::sin(a0);
            const double x1 = cx + r * std::cos(a1), y1 = cy + r * std::sin(a1);
            const int large = sweep > 180.0 ? 1 : 0;
            svg << "<path d=\"M " << fmt(cx) << " " << fmt(cy) << " L " << fmt(x0) << " "
                << fmt(y0) << " A " << fmt(r) << " " << fmt(r) << " 0 " << large << " 1 "
                << fmt(x1) << " " << fmt(y1) << " Z\" fill=\"" << color << "\"/>\n";
            angle += sweep;
        }
    }

    if (spec.legend) {
        double ly = 16.0;
        for (const auto& tc : all_tier_classes()) {
            const std::string& color = spec.palette.at(tc);
            svg << "<rect x=\"8\" y=\"" << fmt(ly - 9.0)
                << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
            svg << "<text x=\"22\" y=\"" << fmt(ly) << "\" font-size=\"10\" font-family=\"sans-serif\">"
                << to_string(tc.tier) << " " << to_string(tc.voc) << "</text>\n";
            ly += 14.0;
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

void write_pie_points_csv(std::ostream& out, const std::vector<PiePoint>& points) {
    out << "x,y,total_fraction";
    for (const auto& tc : all_tier_classes())
        out << "," << to_string(tc.tier) << "_" << to_string(tc.voc);
    out << "\n";
    char buf[64];
    const auto put = [&](double v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, end - buf);
    };
    for (const auto& p : points) {
        put(p.x);
        out << ',';
        put(p.y);
        out << ',';
        put(p.total_fraction);
        for (const auto& tc : all_tier_classes()) {
            double frac = 0.0;
            for (const auto& [stc, f] : p.slices)
                if (stc == tc) frac = f;
            out << ',';
            put(frac);
        }
        out << "\n";
    }
}

}  // namespace famviz::viz
