#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "famviz/boaw.hpp"
#include "famviz/types.hpp"

namespace famviz::viz {

/// Rendering parameters. The palette must cover all 12 (tier, class) pairs.
struct RenderSpec {
    double width = 900.0;
    double height = 900.0;
    double margin = 40.0;
    double min_radius = 3.0;
    double max_radius = 14.0;
    std::map<TierClass, std::string> palette;
    bool legend = true;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fig. 2 hue families: blue CHN, red FAN, green MAN, orange CXN.
std::map<TierClass, std::string> default_palette();

/// One scatter point drawn as a pie chart.
struct PiePoint {
    double x = 0.0, y = 0.0;
    std::vector<std::pair<TierClass, double>> slices;  // fractions >= 0
    double total_fraction = 0.0;
};

PiePoint make_pie_point(double x, double y, const std::vector<double>& composition,
                        double total_fraction);

/// Slice angles in degrees, proportional to fraction / total_fraction, in
/// fixed (tier, class) order. Sums to 360 when total_fraction > 0.
std::vector<double> slice_angles(const PiePoint& pt);

/// Per-family subsampling: k-means over tf vectors into `n_clusters`, then a
/// uniform sample without replacement of up to `per_cluster` windows per
/// cluster. Returns indices into `histograms` ordered by (cluster, original
/// index). Fewer histograms than clusters degrades to a passthrough with a
/// warning on stderr.
std::vector<std::size_t> cluster_subsample(const std::vector<boaw::WindowHistogram>& histograms,
                                           std::size_t n_clusters = 8,
                                           std::size_t per_cluster = 100, std::uint64_t seed = 0);

/// Deterministic standalone SVG. Radius follows min + span * sqrt(total
/// fraction) so area tracks the vocalization time fraction; zero-fraction
/// points render as outline-only circles.
std::string render_svg(const std::vector<PiePoint>& points, const RenderSpec& spec);

// CSV dump of pie points for external plotting.
void write_pie_points_csv(std::ostream& out, const std::vector<PiePoint>& points);

}  // namespace famviz::viz
