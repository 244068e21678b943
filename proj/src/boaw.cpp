#include "famviz/boaw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "famviz/kernels.hpp"

namespace famviz::boaw {

// ---------------------------------------------------------------------------
// FrameSequence
// ---------------------------------------------------------------------------

timeline::ProbRecord FrameProbs::to_record() const {
    timeline::ProbRecord r;
    for (std::size_t i = 0; i < 5; ++i) r.sd[i] = sd[i];
    for (std::size_t i = 0; i < 3; ++i) r.chn[i] = chn[i];
    for (std::size_t i = 0; i < 4; ++i) r.fan[i] = fan[i];
    for (std::size_t i = 0; i < 4; ++i) r.man[i] = man[i];
    return r;
}

bool FrameSequence::has_energy() const {
    for (float e : energy)
        if (!std::isnan(e)) return true;
    return false;
}

std::vector<timeline::ProbRecord> FrameSequence::prob_records() const {
    std::vector<timeline::ProbRecord> out;
    out.reserve(probs.size());
    for (const auto& p : probs) {
        if (!p) throw MalformedInputError("frame without probabilities in probability stream");
        out.push_back(p->to_record());
    }
    return out;
}

void FrameSequence::validate() const {
    grid.validate();
    if (dim == 0) throw MalformedInputError("FrameSequence: dim must be >= 1");
    if (vectors.size() != grid.n_frames * dim)
        throw MalformedInputError("FrameSequence: vector storage does not match n_frames x dim");
    for (float v : vectors)
        if (!std::isfinite(v)) throw MalformedInputError("FrameSequence: non-finite embedding value");
    if (!energy.empty() && energy.size() != grid.n_frames)
        throw MalformedInputError("FrameSequence: energy length mismatch");
    if (!probs.empty() && probs.size() != grid.n_frames)
        throw MalformedInputError("FrameSequence: probs length mismatch");
}

// ---------------------------------------------------------------------------
// Frame file (magic FVFR, version 1, little-endian)
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw FormatError("frame file: truncated");
    return v;
}

}  // namespace

void write_frames(std::ostream& out, const FrameSequence& f) {
    out.write("FVFR", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.dim));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.n_frames));
    put<float>(out, static_cast<float>(f.grid.hop));
    put<float>(out, static_cast<float>(f.grid.window_len));
    const float nan = std::numeric_limits<float>::quiet_NaN();
    for (std::size_t i = 0; i < f.grid.n_frames; ++i) {
        out.write(reinterpret_cast<const char*>(f.frame(i)),
                  static_cast<std::streamsize>(f.dim * sizeof(float)));
        put<float>(out, f.energy.empty() ? nan : f.energy[i]);
        const bool hp = !f.probs.empty() && f.probs[i].has_value();
        put<std::uint8_t>(out, hp ? 1 : 0);
        if (hp) {
            const FrameProbs& p = *f.probs[i];
            out.write(reinterpret_cast<const char*>(p.sd.data()), 5 * sizeof(float));
            out.write(reinterpret_cast<const char*>(p.chn.data()), 3 * sizeof(float));
            out.write(reinterpret_cast<const char*>(p.fan.data()), 4 * sizeof(float));
            out.write(reinterpret_cast<const char*>(p.man.data()), 4 * sizeof(float));
        }
    }
}

FrameSequence read_frames(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FVFR", 4) != 0)
        throw FormatError("frame file: bad magic, expected FVFR");
    const auto version = get<std::uint32_t>(in);
    if (version != 1)
        throw FormatError("frame file: unsupported version " + std::to_string(version));
    FrameSequence f;
    f.dim = get<std::uint32_t>(in);
    const auto n = get<std::uint32_t>(in);
    f.grid.hop = get<float>(in);
    f.grid.window_len = get<float>(in);
    f.grid.n_frames = n;
    f.grid.validate();
    if (f.dim == 0) throw FormatError("frame file: zero dim");
    f.vectors.resize(static_cast<std::size_t>(n) * f.dim);
    f.energy.resize(n);
    bool any_probs = false;
    std::vector<std::optional<FrameProbs>> probs(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(f.vectors.data() + static_cast<std::size_t>(i) * f.dim),
                static_cast<std::streamsize>(f.dim * sizeof(float)));
        if (!in) throw FormatError("frame file: truncated record");
        f.energy[i] = get<float>(in);
        const auto hp = get<std::uint8_t>(in);
        if (hp) {
            FrameProbs p;
            in.read(reinterpret_cast<char*>(p.sd.data()), 5 * sizeof(float));
            in.read(reinterpret_cast<char*>(p.chn.data()), 3 * sizeof(float));
            in.read(reinterpret_cast<char*>(p.fan.data()), 4 * sizeof(float));
            in.read(reinterpret_cast<char*>(p.man.data()), 4 * sizeof(float));
            if (!in) throw FormatError("frame file: truncated probability record");
            probs[i] = p;
            any_probs = true;
        }
    }
    if (any_probs) f.probs = std::move(probs);
    return f;
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

namespace {

std::vector<double> kmeanspp_init(const float* vectors, std::size_t n, std::size_t dim,
                                  std::size_t k, std::mt19937_64& rng) {
    std::vector<double> centroids(k * dim);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t first = pick(rng);
    for (std::size_t j = 0; j < dim; ++j) centroids[j] = vectors[first * dim + j];

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        // distances to the newest centroid
        const double* latest = centroids.data() + (c - 1) * dim;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double diff = static_cast<double>(vectors[i * dim + j]) - latest[j];
                d += diff * diff;
            }
            d2[i] = std::min(d2[i], d);
            total += d2[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = pick(rng);
        } else {
            std::uniform_real_distribution<double> ur(0.0, total);
            double r = ur(rng), acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < dim; ++j)
            centroids[c * dim + j] = vectors[chosen * dim + j];
    }
    return centroids;
}

}  // namespace

Codebook kmeans_fit(const float* vectors, std::size_t n, std::size_t dim, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters, double tol,
                    std::vector<double>* inertia_trace) {
    if (k < 1) throw MalformedInputError("kmeans_fit: k must be >= 1");
    if (n < k)
        throw InsufficientDataError("kmeans_fit: need at least k points, got " +
                                    std::to_string(n) + " < " + std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<double> centroids = kmeanspp_init(vectors, n, dim, k, rng);

    std::vector<int> assign(n);
    std::vector<double> sqd(n);
    std::vector<double> sums(k * dim);
    std::vector<std::size_t> counts(k);

    Codebook cb;
    cb.k = k;
    cb.dim = dim;
    cb.seed = seed;

    double inertia = 0.0;
    std::size_t it = 0;
    const auto lloyd = [&] {
        double prev = std::numeric_limits<double>::infinity();
        for (;; ++it) {
            kernels::assign_nearest(vectors, n, dim, centroids.data(), k, assign.data(),
                                    sqd.data());
            inertia = 0.0;
            for (std::size_t i = 0; i < n; ++i) inertia += sqd[i];
            if (inertia_trace) inertia_trace->push_back(inertia);

            const bool converged =
                std::isfinite(prev) && (prev - inertia) < tol * std::max(prev, 1e-300);
            if (converged || it >= max_iters) return;
            prev = inertia;

            kernels::centroid_sums(vectors, n, dim, assign.data(), k, sums.data(), counts.data());
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] > 0) {
                    for (std::size_t j = 0; j < dim; ++j)
                        centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
                } else {
                    // re-seed to the point farthest from its assigned centroid
                    std::size_t far = 0;
                    for (std::size_t i = 1; i < n; ++i)
                        if (sqd[i] > sqd[far]) far = i;
                    for (std::size_t j = 0; j < dim; ++j)
                        centroids[c * dim + j] = vectors[far * dim + j];
                    sqd[far] = 0.0;  // keep later empties from grabbing the same point
                }
            }
        }
    };

    // Lloyd alone gets stuck in partition-boundary local minima that a
    // Hartigan-style single-point move escapes; alternate until both are stable.
    const auto sq_dist = [&](std::size_t i, std::size_t c) {
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double diff = static_cast<double>(vectors[i * dim + j]) - centroids[c * dim + j];
            d += diff * diff;
        }
        return d;
    };
    for (std::size_t round = 0; round <= max_iters; ++round) {
        lloyd();
        kernels::centroid_sums(vectors, n, dim, assign.data(), k, sums.data(), counts.data());
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = static_cast<std::size_t>(assign[i]);
            if (counts[a] <= 1) continue;
            const double gain = static_cast<double>(counts[a]) /
                                static_cast<double>(counts[a] - 1) * sq_dist(i, a);
            std::size_t best_c = a;
            double best_cost = gain;
            for (std::size_t c = 0; c < k; ++c) {
                if (c == a) continue;
                const double cost = static_cast<double>(counts[c]) /
                                    static_cast<double>(counts[c] + 1) * sq_dist(i, c);
                if (cost < best_cost * (1.0 - 1e-12)) {
                    best_cost = cost;
                    best_c = c;
                }
            }
            if (best_c == a) continue;
            moved = true;
            for (std::size_t j = 0; j < dim; ++j) {
                const double x = vectors[i * dim + j];
                sums[a * dim + j] -= x;
                sums[best_c * dim + j] += x;
            }
            --counts[a];
            ++counts[best_c];
            assign[i] = static_cast<int>(best_c);
            for (std::size_t j = 0; j < dim; ++j) {
                centroids[a * dim + j] = sums[a * dim + j] / static_cast<double>(counts[a]);
                centroids[best_c * dim + j] =
                    sums[best_c * dim + j] / static_cast<double>(counts[best_c]);
            }
        }
        if (!moved) break;
    }
    // final inertia against the refined centroids
    kernels::assign_nearest(vectors, n, dim, centroids.data(), k, assign.data(), sqd.data());
    inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sqd[i];
    if (inertia_trace && !inertia_trace->empty() && inertia < inertia_trace->back())
        inertia_trace->push_back(inertia);

    cb.centroids = std::move(centroids);
    cb.n_iters_run = it;
    cb.inertia = inertia;
    return cb;
}

std::vector<int> soft_assign(const float* vector, const Codebook& codebook, std::size_t n_assign) {
    if (n_assign > codebook.k)
        throw MalformedInputError("soft_assign: n_assign exceeds codebook size");
    std::vector<int> out(n_assign);
    kernels::assign_topk_serial(vector, 1, codebook.dim, codebook.centroids.data(), codebook.k,
                                n_assign, out.data());
    return out;
}

// ---------------------------------------------------------------------------
// Window histograms
// ---------------------------------------------------------------------------

std::vector<WindowHistogram> window_histograms(const FrameSequence& frames,
                                               const Codebook& codebook, double window_len,
                                               const std::vector<LabelSpan>* spans,
                                               std::size_t n_assign) {
    frames.validate();
    if (codebook.dim != frames.dim)
        throw DimensionMismatchError("window_histograms: codebook dim " +
                                     std::to_string(codebook.dim) + " != frame dim " +
                                     std::to_string(frames.dim));
    if (n_assign > codebook.k)
        throw MalformedInputError("window_histograms: n_assign exceeds codebook size");
    const double fpw_real = window_len / frames.grid.hop;
    const std::size_t fpw = static_cast<std::size_t>(std::llround(fpw_real));
    // relative tolerance: the grid hop may have passed through single precision
    if (fpw == 0 ||
        std::fabs(fpw_real - static_cast<double>(fpw)) > 1e-6 * std::max(1.0, fpw_real))
        throw MalformedInputError("window_histograms: window_len must be a multiple of hop");

    const std::size_t n = frames.n_frames();
    std::vector<int> words(n * n_assign);
    kernels::assign_topk(frames.vectors.data(), n, frames.dim, codebook.centroids.data(),
                         codebook.k, n_assign, words.data());

    std::vector<WindowHistogram> out;
    for (std::size_t lo = 0; lo < n; lo += fpw) {
        const std::size_t hi = std::min(n, lo + fpw);
        WindowHistogram h;
        h.family_id = frames.family_id;
        h.window_start = frames.source_offset + static_cast<double>(lo / fpw) * window_len;
        h.tf.assign(codebook.k, 0.0);
        double total = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t a = 0; a < n_assign; ++a) {
                h.tf[static_cast<std::size_t>(words[i * n_assign + a])] += 1.0;
                total += 1.0;
            }
        for (double& v : h.tf) v /= total;
        if (spans) {
            auto wc = timeline::window_composition(*spans, h.window_start, window_len);
            h.composition = std::move(wc.fractions);
            h.total_voc_fraction = wc.total_voc_fraction;
        } else {
            h.composition.assign(all_tier_classes().size(), 0.0);
        }
        out.push_back(std::move(h));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_codebook_csv(std::ostream& out, const Codebook& cb) {
    out << "# k=" << cb.k << " dim=" << cb.dim << " seed=" << cb.seed
        << " n_iters=" << cb.n_iters_run;
    char buf[64];
    std::snprintf(buf, sizeof buf, " inertia=%.17g\n", cb.inertia);
    out << buf;
    for (std::size_t c = 0; c < cb.k; ++c) {
        for (std::size_t j = 0; j < cb.dim; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", cb.centroid(c)[j]);
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

Codebook read_codebook_csv(std::istream& in) {
    Codebook cb;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# k=", 0) != 0)
        throw FormatError("codebook CSV: missing metadata header");
    unsigned long long k = 0, dim = 0, seed = 0, iters = 0;
    double inertia = 0.0;
    if (std::sscanf(line.c_str(), "# k=%llu dim=%llu seed=%llu n_iters=%llu inertia=%lg", &k,
                    &dim, &seed, &iters, &inertia) != 5)
        throw FormatError("codebook CSV: malformed metadata header");
    cb.k = k;
    cb.dim = dim;
    cb.seed = seed;
    cb.n_iters_run = iters;
    cb.inertia = inertia;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cb.centroids.push_back(std::stod(cell));
    }
    if (cb.centroids.size() != cb.k * cb.dim)
        throw FormatError("codebook CSV: centroid count does not match header");
    return cb;
}

void write_histograms_csv(std::ostream& out, const std::vector<WindowHistogram>& hists) {
    out << "family_id,window_start,total_voc_fraction";
    for (const auto& tc : all_tier_classes())
        out << ",comp_" << to_string(tc.tier) << "_" << to_string(tc.voc);
    const std::size_t k = hists.empty() ? 0 : hists.front().tf.size();
    for (std::size_t j = 0; j < k; ++j) out << ",tf_" << j;
    out << "\n";
    char buf[64];
    for (const auto& h : hists) {
        out << h.family_id;
        std::snprintf(buf, sizeof buf, ",%.9g", h.window_start);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", h.total_voc_fraction);
        out << buf;
        for (double c : h.composition) {
            std::snprintf(buf, sizeof buf, ",%.17g", c);
            out << buf;
        }
        for (double v : h.tf) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        out << "\n";
    }
}

std::vector<WindowHistogram> read_histograms_csv(std::istream& in) {
    std::vector<WindowHistogram> out;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("histograms CSV: empty file");
    const std::size_t n_comp = all_tier_classes().size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3 + n_comp) throw FormatError("histograms CSV: short row");
        WindowHistogram h;
        h.family_id = cells[0];
        h.window_start = std::stod(cells[1]);
        h.total_voc_fraction = std::stod(cells[2]);
        for (std::size_t i = 0; i < n_comp; ++i) h.composition.push_back(std::stod(cells[3 + i]));
        for (std::size_t i = 3 + n_comp; i < cells.size(); ++i) h.tf.push_back(std::stod(cells[i]));
        out.push_back(std::move(h));
    }
    return out;
}

}  // namespace famviz::boaw
