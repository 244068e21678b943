// famviz: bag-of-audio-words vocalization visualization pipeline.
//
// Subcommands mirror the pipeline stages; `pipeline` chains
// codebook -> histograms -> reduce -> sample -> render. Exit codes:
// 0 success, 1 validation error, 2 I/O error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "famviz/audioenergy.hpp"
#include "famviz/boaw.hpp"
#include "famviz/dimred.hpp"
#include "famviz/kernels.hpp"
#include "famviz/metrics.hpp"
#include "famviz/synth.hpp"
#include "famviz/timeline.hpp"
#include "famviz/types.hpp"
#include "famviz/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace famviz;

namespace {

// I/O failures get their own exit code; everything else is a validation error.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int log_level() {
    const char* v = std::getenv("FAMVIZ_LOG");
    return v ? std::atoi(v) : 0;
}

void logi(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "famviz: " << msg << "\n";
}

void print_config(const std::string& cmd, const json& eff) {
    std::cerr << "famviz " << cmd << " config " << eff.dump() << "\n";
}

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> slurp_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

boaw::FrameSequence load_frames(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frame file: " + path);
    try {
        auto f = boaw::read_frames(in);
        if (f.family_id.empty()) f.family_id = fs::path(path).stem().string();
        return f;
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void save_frames(const std::string& path, const boaw::FrameSequence& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write frame file: " + path);
    boaw::write_frames(out, frames);
    if (!out) throw IoError("write failed: " + path);
}

std::vector<LabelSpan> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open label file: " + path);
    try {
        return timeline::read_labels_csv(in);
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

boaw::Codebook load_codebook(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open codebook file: " + path);
    try {
        return boaw::read_codebook_csv(in);
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

std::vector<boaw::WindowHistogram> load_histograms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open histogram file: " + path);
    try {
        return boaw::read_histograms_csv(in);
    } catch (const Error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

// Silence threshold from the frames the human timeline marks as key-child.
std::optional<double> resolve_energy_threshold(const std::string& mode,
                                               const boaw::FrameSequence& frames,
                                               const std::vector<std::size_t>& chn_frames) {
    if (mode == "off") return std::nullopt;
    if (mode == "auto") {
        if (!frames.has_energy()) return std::nullopt;
        audio::EnergyTrack track{frames.grid, frames.energy};
        return audio::derive_energy_threshold(track, chn_frames);
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(mode.data(), mode.data() + mode.size(), v);
    if (ec != std::errc{} || p != mode.data() + mode.size())
        throw MalformedInputError("energy threshold must be 'auto', 'off', or a number, got '" +
                                  mode + "'");
    return v;
}

std::vector<std::size_t> chn_frames_from_majority(const std::vector<timeline::MajorityFrame>& mf) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mf.size(); ++i)
        if (!mf[i].discarded && mf[i].tier == SpeakerTier::CHN) out.push_back(i);
    return out;
}

std::vector<LabelSpan> decode_to_spans(const boaw::FrameSequence& frames, double confidence,
                                       const std::string& energy_mode) {
    if (!frames.has_probs())
        throw MalformedInputError("frame file for '" + frames.family_id +
                                  "' carries no probability records");
    const auto records = frames.prob_records();

    std::optional<double> threshold;
    const std::vector<float>* energy = nullptr;
    if (energy_mode != "off" && frames.has_energy()) {
        // bootstrap: find key-child frames from an energy-free decode
        auto first = timeline::decode_machine_labels(records, frames.grid, confidence);
        std::vector<std::size_t> chn;
        for (const auto& f : first)
            if (f.tier == SpeakerTier::CHN) chn.push_back(f.frame_index);
        threshold = resolve_energy_threshold(energy_mode, frames, chn);
        if (threshold) energy = &frames.energy;
    }
    auto labels = timeline::decode_machine_labels(records, frames.grid, confidence, energy,
                                                  threshold);
    return timeline::resolve_conflicts(labels, frames.grid);
}

json report_json(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                 const std::vector<std::string>& labels) {
    if (ref.empty()) return nullptr;
    auto cm = metrics::confusion(ref, hyp, labels);
    json rows = json::array();
    for (std::size_t i = 0; i < cm.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < cm.size(); ++j) row.push_back(cm.at(i, j));
        rows.push_back(row);
    }
    return json{{"labels", labels},
                {"confusion", rows},
                {"n_frames", ref.size()},
                {"accuracy", metrics::accuracy(cm)},
                {"macro_f1", metrics::macro_f1(cm)},
                {"kappa", metrics::cohen_kappa(cm)}};
}

FrameGrid grid_for_duration(double duration, double window_len, double hop) {
    FrameGrid grid{window_len, hop, 0};
    grid.validate();
    if (duration < window_len)
        throw MalformedInputError("duration " + fmt_double(duration) +
                                  "s is shorter than one analysis window");
    grid.n_frames =
        static_cast<std::size_t>(std::floor((duration - window_len) / hop + 1e-9)) + 1;
    return grid;
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

int run_energy(const std::string& wav_path, const std::string& frames_path,
               const std::string& out_path, double window_len, double hop) {
    print_config("energy", json{{"wav", wav_path},
                                {"frames", frames_path},
                                {"out", out_path},
                                {"window_len", window_len},
                                {"hop", hop}});
    auto bytes = slurp_bytes(wav_path);
    audio::PcmClip clip;
    try {
        clip = audio::read_wav(bytes);
    } catch (const Error& e) {
        throw FormatError(wav_path + ": " + e.what());
    }
    auto track = audio::frame_energy(clip, window_len, hop);
    logi("computed " + std::to_string(track.values.size()) + " energy frames");

    if (!frames_path.empty()) {
        auto frames = load_frames(frames_path);
        if (frames.grid.n_frames != track.grid.n_frames)
            throw MalformedInputError(frames_path + ": frame count " +
                                      std::to_string(frames.grid.n_frames) +
                                      " does not match energy track " +
                                      std::to_string(track.grid.n_frames));
        frames.energy = track.values;
        save_frames(out_path, frames);
        return 0;
    }
    std::ostringstream csv;
    csv << "frame,start_s,energy\n";
    for (std::size_t i = 0; i < track.values.size(); ++i)
        csv << i << "," << fmt_double(track.grid.frame_start(i)) << ","
            << fmt_double(track.values[i]) << "\n";
    write_text(out_path, csv.str());
    return 0;
}

// ---------------------------------------------------------------------------
// labels
// ---------------------------------------------------------------------------

int run_labels(const std::string& in_path, const std::string& frames_path,
               const std::string& out_path, double duration, const std::string& energy_mode,
               double window_len, double hop) {
    print_config("labels", json{{"in", in_path},
                                {"frames", frames_path},
                                {"out", out_path},
                                {"duration", duration},
                                {"energy", energy_mode},
                                {"window_len", window_len},
                                {"hop", hop}});
    auto spans = load_labels(in_path);
    timeline::validate_spans(spans);
    if (duration <= 0.0) {
        for (const auto& s : spans) duration = std::max(duration, s.offset);
    }
    FrameGrid grid = grid_for_duration(duration, window_len, hop);

    boaw::FrameSequence frames;
    const std::vector<float>* energy = nullptr;
    std::optional<double> threshold;
    if (!frames_path.empty()) {
        frames = load_frames(frames_path);
        if (frames.grid.n_frames != grid.n_frames)
            throw MalformedInputError(frames_path + ": frame count " +
                                      std::to_string(frames.grid.n_frames) +
                                      " does not match label grid " +
                                      std::to_string(grid.n_frames));
        if (energy_mode != "off" && frames.has_energy()) {
            auto plain = timeline::majority_label(spans, grid);
            threshold = resolve_energy_threshold(energy_mode, frames,
                                                 chn_frames_from_majority(plain));
            if (threshold) energy = &frames.energy;
        }
    }
    auto mf = timeline::majority_label(spans, grid, energy, threshold);

    std::ostringstream csv;
    csv << "frame,start_s,tier,voc,discarded\n";
    for (std::size_t i = 0; i < mf.size(); ++i) {
        csv << i << "," << fmt_double(grid.frame_start(i)) << "," << to_string(mf[i].tier) << ",";
        if (mf[i].voc) csv << to_string(*mf[i].voc);
        csv << "," << (mf[i].discarded ? 1 : 0) << "\n";
    }
    write_text(out_path, csv.str());
    return 0;
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

int run_decode(const std::string& frames_path, const std::string& out_path, double confidence,
               const std::string& energy_mode) {
    print_config("decode", json{{"frames", frames_path},
                                {"out", out_path},
                                {"confidence", confidence},
                                {"energy", energy_mode}});
    auto frames = load_frames(frames_path);
    auto spans = decode_to_spans(frames, confidence, energy_mode);
    std::ostringstream csv;
    timeline::write_labels_csv(csv, spans);
    write_text(out_path, csv.str());
    logi("decoded " + std::to_string(spans.size()) + " spans");
    return 0;
}

// ---------------------------------------------------------------------------
// codebook
// ---------------------------------------------------------------------------

int run_codebook(const std::vector<std::string>& frame_paths, const std::string& out_path,
                 std::size_t k, std::uint64_t seed, std::size_t max_iters, double tol) {
    print_config("codebook", json{{"frames", frame_paths},
                                  {"out", out_path},
                                  {"k", k},
                                  {"seed", seed},
                                  {"max_iters", max_iters},
                                  {"tol", tol}});
    std::vector<float> pool;
    std::size_t dim = 0;
    for (const auto& path : frame_paths) {
        auto f = load_frames(path);
        if (dim == 0) dim = f.dim;
        if (f.dim != dim)
            throw DimensionMismatchError(path + ": dim " + std::to_string(f.dim) +
                                         " != " + std::to_string(dim));
        pool.insert(pool.end(), f.vectors.begin(), f.vectors.end());
    }
    const std::size_t n = pool.size() / std::max<std::size_t>(dim, 1);
    auto cb = boaw::kmeans_fit(pool.data(), n, dim, k, seed, max_iters, tol);
    logi("codebook inertia " + fmt_double(cb.inertia) + " after " +
         std::to_string(cb.n_iters_run) + " iterations");
    std::ostringstream csv;
    boaw::write_codebook_csv(csv, cb);
    write_text(out_path, csv.str());
    return 0;
}

// ---------------------------------------------------------------------------
// histograms
// ---------------------------------------------------------------------------

int run_histograms(const std::vector<std::string>& frame_paths,
                   const std::vector<std::string>& label_paths, const std::string& codebook_path,
                   const std::string& out_path, double window_len, std::size_t n_assign) {
    print_config("histograms", json{{"frames", frame_paths},
                                    {"labels", label_paths},
                                    {"codebook", codebook_path},
                                    {"out", out_path},
                                    {"window_len", window_len},
                                    {"n_assign", n_assign}});
    if (!label_paths.empty() && label_paths.size() != frame_paths.size())
        throw MalformedInputError("--labels must be given once per --frames or not at all");
    auto cb = load_codebook(codebook_path);
    std::vector<boaw::WindowHistogram> all;
    for (std::size_t i = 0; i < frame_paths.size(); ++i) {
        auto frames = load_frames(frame_paths[i]);
        std::vector<LabelSpan> spans;
        const std::vector<LabelSpan>* spans_p = nullptr;
        if (!label_paths.empty()) {
            spans = load_labels(label_paths[i]);
            spans_p = &spans;
        }
        auto hists = boaw::window_histograms(frames, cb, window_len, spans_p, n_assign);
        all.insert(all.end(), hists.begin(), hists.end());
    }
    std::ostringstream csv;
    boaw::write_histograms_csv(csv, all);
    write_text(out_path, csv.str());
    logi(std::to_string(all.size()) + " windows");
    return 0;
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

dimred::Projection reduce_histograms(const std::vector<boaw::WindowHistogram>& hists,
                                     const std::string& method, std::uint64_t seed,
                                     const dimred::TsneParams& params) {
    if (hists.empty()) throw InsufficientDataError("no histogram windows to reduce");
    const std::size_t n = hists.size(), d = hists.front().tf.size();
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (hists[i].tf.size() != d)
            throw DimensionMismatchError("histogram rows disagree on codebook size");
        for (std::size_t j = 0; j < d; ++j) data[i * d + j] = hists[i].tf[j];
    }
    if (method == "pca") return dimred::pca_2d(data, n, d);
    if (method == "tsne") return dimred::tsne_2d(data, n, d, params, seed);
    throw MalformedInputError("reducer method must be 'pca' or 'tsne', got '" + method + "'");
}

int run_reduce(const std::vector<std::string>& hist_paths, const std::string& out_path,
               const std::string& method, std::uint64_t seed, const dimred::TsneParams& params) {
    print_config("reduce", json{{"histograms", hist_paths},
                                {"out", out_path},
                                {"method", method},
                                {"seed", seed},
                                {"perplexity", params.perplexity},
                                {"n_iters", params.n_iters},
                                {"learning_rate", params.learning_rate},
                                {"early_exaggeration", params.early_exaggeration},
                                {"exaggeration_iters", params.exaggeration_iters}});
    std::vector<boaw::WindowHistogram> hists;
    for (const auto& p : hist_paths) {
        auto h = load_histograms(p);
        hists.insert(hists.end(), h.begin(), h.end());
    }
    auto proj = reduce_histograms(hists, method, seed, params);

    std::vector<std::string> fams;
    std::vector<double> starts;
    for (const auto& h : hists) {
        fams.push_back(h.family_id);
        starts.push_back(h.window_start);
    }
    std::ostringstream csv;
    dimred::write_projection_csv(csv, proj, fams, starts);
    write_text(out_path, csv.str());
    write_text(fs::path(out_path).replace_extension(".json").string(),
               dimred::projection_sidecar_json(proj));
    return 0;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

// Per-family subsample; returns indices into `hists` (family order preserved).
std::vector<std::size_t> sample_indices(const std::vector<boaw::WindowHistogram>& hists,
                                        std::size_t n_clusters, std::size_t per_cluster,
                                        std::uint64_t seed) {
    std::vector<std::string> family_order;
    std::map<std::string, std::vector<std::size_t>> by_family;
    for (std::size_t i = 0; i < hists.size(); ++i) {
        auto& v = by_family[hists[i].family_id];
        if (v.empty()) family_order.push_back(hists[i].family_id);
        v.push_back(i);
    }
    std::vector<std::size_t> out;
    for (const auto& fam : family_order) {
        const auto& idx = by_family[fam];
        std::vector<boaw::WindowHistogram> sub;
        sub.reserve(idx.size());
        for (std::size_t i : idx) sub.push_back(hists[i]);
        for (std::size_t local : viz::cluster_subsample(sub, n_clusters, per_cluster, seed))
            out.push_back(idx[local]);
    }
    return out;
}

int run_sample(const std::string& hist_path, const std::string& out_path, std::size_t n_clusters,
               std::size_t per_cluster, std::uint64_t seed) {
    print_config("sample", json{{"histograms", hist_path},
                                {"out", out_path},
                                {"n_clusters", n_clusters},
                                {"per_cluster", per_cluster},
                                {"seed", seed}});
    auto hists = load_histograms(hist_path);
    auto idx = sample_indices(hists, n_clusters, per_cluster, seed);
    std::vector<boaw::WindowHistogram> selected;
    for (std::size_t i : idx) selected.push_back(hists[i]);
    std::ostringstream csv;
    boaw::write_histograms_csv(csv, selected);
    write_text(out_path, csv.str());
    logi("kept " + std::to_string(selected.size()) + " of " + std::to_string(hists.size()) +
         " windows");
    return 0;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

std::vector<viz::PiePoint> join_points(const std::vector<boaw::WindowHistogram>& hists,
                                       const std::map<std::string, std::pair<double, double>>& xy) {
    std::vector<viz::PiePoint> points;
    for (const auto& h : hists) {
        const std::string key = h.family_id + "|" + fmt_double(h.window_start);
        auto it = xy.find(key);
        if (it == xy.end())
            throw MalformedInputError("no projected coordinates for window '" + h.family_id +
                                      "' at " + fmt_double(h.window_start) + "s");
        points.push_back(viz::make_pie_point(it->second.first, it->second.second, h.composition,
                                             h.total_voc_fraction));
    }
    return points;
}

std::map<std::string, std::pair<double, double>> load_projection_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open projection file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "family_id,window_start,x,y")
        throw FormatError(path + ": expected header family_id,window_start,x,y");
    std::map<std::string, std::pair<double, double>> xy;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string fam, ws, xs, ys;
        if (!std::getline(ls, fam, ',') || !std::getline(ls, ws, ',') ||
            !std::getline(ls, xs, ',') || !std::getline(ls, ys))
            throw FormatError(path + ": short row '" + line + "'");
        xy[fam + "|" + fmt_double(std::stod(ws))] = {std::stod(xs), std::stod(ys)};
    }
    return xy;
}

int run_render(const std::string& hist_path, const std::string& proj_path,
               const std::string& out_path, const viz::RenderSpec& spec,
               const std::string& points_csv) {
    print_config("render", json{{"histograms", hist_path},
                                {"projection", proj_path},
                                {"out", out_path},
                                {"width", spec.width},
                                {"height", spec.height},
                                {"margin", spec.margin},
                                {"min_radius", spec.min_radius},
                                {"max_radius", spec.max_radius},
                                {"legend", spec.legend},
                                {"points_csv", points_csv}});
    auto hists = load_histograms(hist_path);
    auto points = join_points(hists, load_projection_rows(proj_path));
    write_text(out_path, viz::render_svg(points, spec));
    if (!points_csv.empty()) {
        std::ostringstream csv;
        viz::write_pie_points_csv(csv, points);
        write_text(points_csv, csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

int run_metrics(const std::string& ref_path, const std::string& hyp_path,
                const std::string& out_path, double duration, double window_len, double hop) {
    print_config("metrics", json{{"ref", ref_path},
                                 {"hyp", hyp_path},
                                 {"out", out_path},
                                 {"duration", duration},
                                 {"window_len", window_len},
                                 {"hop", hop}});
    auto ref_spans = load_labels(ref_path);
    auto hyp_spans = load_labels(hyp_path);
    timeline::validate_spans(ref_spans);
    timeline::validate_spans(hyp_spans);
    if (duration <= 0.0) {
        for (const auto& s : ref_spans) duration = std::max(duration, s.offset);
        for (const auto& s : hyp_spans) duration = std::max(duration, s.offset);
    }
    FrameGrid grid = grid_for_duration(duration, window_len, hop);
    auto ref = timeline::majority_label(ref_spans, grid);
    auto hyp = timeline::majority_label(hyp_spans, grid);

    // discarded frames are excluded from the corpus on either side
    std::vector<std::string> sd_ref, sd_hyp, sd_ref_ns, sd_hyp_ns;
    std::vector<std::string> cls_ref[3], cls_hyp[3];  // CHN, FAN, MAN
    const SpeakerTier tiers[3] = {SpeakerTier::CHN, SpeakerTier::FAN, SpeakerTier::MAN};
    std::size_t discarded = 0;
    for (std::size_t i = 0; i < grid.n_frames; ++i) {
        if (ref[i].discarded || hyp[i].discarded) {
            ++discarded;
            continue;
        }
        sd_ref.push_back(to_string(ref[i].tier));
        sd_hyp.push_back(to_string(hyp[i].tier));
        if (ref[i].tier != SpeakerTier::SIL) {
            sd_ref_ns.push_back(to_string(ref[i].tier));
            sd_hyp_ns.push_back(to_string(hyp[i].tier));
        }
        for (int t = 0; t < 3; ++t) {
            if (ref[i].tier == tiers[t] && hyp[i].tier == tiers[t] && ref[i].voc && hyp[i].voc) {
                cls_ref[t].push_back(to_string(*ref[i].voc));
                cls_hyp[t].push_back(to_string(*hyp[i].voc));
            }
        }
    }

    json report;
    report["n_frames"] = grid.n_frames;
    report["n_discarded"] = discarded;
    report["sd"] = report_json(sd_ref, sd_hyp, {"SIL", "CHN", "FAN", "MAN", "CXN"});
    report["sd_no_sil"] = report_json(sd_ref_ns, sd_hyp_ns, {"SIL", "CHN", "FAN", "MAN", "CXN"});
    report["chn"] = report_json(cls_ref[0], cls_hyp[0], {"CRY", "FUS", "BAB"});
    report["fan"] = report_json(cls_ref[1], cls_hyp[1], {"CDS", "ADS", "LAU", "SNG"});
    report["man"] = report_json(cls_ref[2], cls_hyp[2], {"CDS", "ADS", "LAU", "SNG"});
    write_text(out_path, report.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

synth::RegimeSpec regime_from_json(const json& jf) {
    synth::RegimeSpec spec;
    spec.name = jf.at("name").get<std::string>();
    spec.duration = jf.value("duration", 600.0);
    spec.window_len = jf.value("window_len", 2.0);
    spec.hop = jf.value("hop", 0.2);
    for (const auto& jm : jf.at("mixture")) {
        synth::MixtureComponent mc;
        mc.mean = jm.at("mean").get<std::vector<double>>();
        mc.stddev = jm.at("stddev").get<double>();
        mc.weight = jm.value("weight", 1.0);
        spec.mixture.push_back(std::move(mc));
    }
    for (const auto& js : jf.value("script", json::array())) {
        synth::ScriptEntry e;
        const auto tier = js.at("tier").get<std::string>();
        auto t = parse_tier(tier);
        if (!t) throw MalformedInputError("synth config: unknown tier '" + tier + "'");
        e.tier = *t;
        if (js.contains("voc") && !js.at("voc").is_null()) {
            const auto voc = js.at("voc").get<std::string>();
            auto v = parse_voc(voc);
            if (!v) throw MalformedInputError("synth config: unknown voc '" + voc + "'");
            e.voc = v;
        }
        e.duration = js.at("duration").get<double>();
        spec.script.push_back(std::move(e));
    }
    return spec;
}

int run_synth(const std::string& config_path, const std::string& out_dir) {
    auto text = slurp_bytes(config_path);
    json cfg;
    try {
        cfg = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw MalformedInputError(config_path + ": " + e.what());
    }
    print_config("synth", json{{"config", config_path}, {"out", out_dir}, {"resolved", cfg}});
    fs::create_directories(out_dir);
    for (const auto& jf : cfg.at("families")) {
        auto spec = regime_from_json(jf);
        const std::uint64_t seed = jf.value("seed", 0ull);
        auto fam = synth::generate_family(spec, seed);
        if (jf.contains("probs")) {
            const auto& jp = jf.at("probs");
            auto stream = synth::generate_probability_stream(
                fam.spans, fam.frames.grid, jp.value("confusion_rate", 0.0),
                jp.value("seed", seed),
                jp.contains("peak_mass") ? std::optional<double>(jp.at("peak_mass").get<double>())
                                         : std::nullopt);
            fam.frames.probs.assign(stream.begin(), stream.end());
        }
        const fs::path base = fs::path(out_dir) / spec.name;
        save_frames(base.string() + ".fvfr", fam.frames);
        std::ostringstream csv;
        timeline::write_labels_csv(csv, fam.spans);
        write_text(base.string() + ".labels.csv", csv.str());
        logi("wrote family '" + spec.name + "' (" + std::to_string(fam.frames.n_frames()) +
             " frames)");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

int run_pipeline(const std::string& config_path, std::string out_dir,
                 std::optional<std::uint64_t> seed_override) {
    auto text = slurp_bytes(config_path);
    json cfg;
    try {
        cfg = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw MalformedInputError(config_path + ": " + e.what());
    }
    if (out_dir.empty()) out_dir = cfg.value("output_dir", "famviz_out");

    const json jcb = cfg.value("codebook", json::object());
    const json jred = cfg.value("reducer", json::object());
    const json jsub = cfg.value("subsample", json::object());
    const json jren = cfg.value("render", json::object());
    const json jthr = cfg.value("thresholds", json::object());

    const std::size_t k = jcb.value("k", 50u);
    const std::size_t n_assign = jcb.value("n_assign", 5u);
    std::uint64_t cb_seed = jcb.value("seed", 0ull);
    const double window_len = cfg.value("window_len", 30.0);
    const std::string method = jred.value("method", std::string("tsne"));
    std::uint64_t red_seed = jred.value("seed", 0ull);
    dimred::TsneParams params;
    params.perplexity = jred.value("perplexity", params.perplexity);
    params.n_iters = jred.value("n_iters", params.n_iters);
    params.learning_rate = jred.value("learning_rate", params.learning_rate);
    params.early_exaggeration = jred.value("early_exaggeration", params.early_exaggeration);
    params.exaggeration_iters = jred.value("exaggeration_iters", params.exaggeration_iters);
    const std::size_t n_clusters = jsub.value("n_clusters", 8u);
    const std::size_t per_cluster = jsub.value("per_cluster", 100u);
    std::uint64_t sub_seed = jsub.value("seed", 0ull);
    const double confidence = jthr.value("confidence", 0.8);
    const std::string energy_mode = jthr.value("energy", std::string("auto"));
    if (seed_override) cb_seed = red_seed = sub_seed = *seed_override;

    viz::RenderSpec spec;
    spec.width = jren.value("width", spec.width);
    spec.height = jren.value("height", spec.height);
    spec.margin = jren.value("margin", spec.margin);
    spec.min_radius = jren.value("min_radius", spec.min_radius);
    spec.max_radius = jren.value("max_radius", spec.max_radius);
    spec.legend = jren.value("legend", spec.legend);
    spec.palette = viz::default_palette();
    spec.validate();

    print_config("pipeline",
                 json{{"config", config_path},
                      {"out", out_dir},
                      {"codebook", {{"k", k}, {"n_assign", n_assign}, {"seed", cb_seed}}},
                      {"window_len", window_len},
                      {"reducer",
                       {{"method", method},
                        {"seed", red_seed},
                        {"perplexity", params.perplexity},
                        {"n_iters", params.n_iters},
                        {"learning_rate", params.learning_rate},
                        {"early_exaggeration", params.early_exaggeration},
                        {"exaggeration_iters", params.exaggeration_iters}}},
                      {"subsample",
                       {{"n_clusters", n_clusters}, {"per_cluster", per_cluster},
                        {"seed", sub_seed}}},
                      {"thresholds", {{"confidence", confidence}, {"energy", energy_mode}}},
                      {"threads", kernels::max_threads()}});

    // load families
    struct FamilyInput {
        boaw::FrameSequence frames;
        std::vector<LabelSpan> spans;
        bool has_spans = false;
    };
    std::vector<FamilyInput> families;
    for (const auto& jf : cfg.at("families")) {
        FamilyInput fi;
        fi.frames = load_frames(jf.at("frames").get<std::string>());
        if (jf.contains("name")) fi.frames.family_id = jf.at("name").get<std::string>();
        if (jf.contains("labels")) {
            fi.spans = load_labels(jf.at("labels").get<std::string>());
            timeline::validate_spans(fi.spans);
            fi.has_spans = true;
        } else if (fi.frames.has_probs()) {
            fi.spans = decode_to_spans(fi.frames, confidence, energy_mode);
            fi.has_spans = true;
        }
        families.push_back(std::move(fi));
    }
    if (families.empty()) throw MalformedInputError(config_path + ": no families configured");

    fs::create_directories(out_dir);
    const auto out = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    // 1. codebook over all families' frames
    std::vector<float> pool;
    std::size_t dim = families.front().frames.dim;
    for (const auto& fi : families) {
        if (fi.frames.dim != dim)
            throw DimensionMismatchError("families disagree on embedding dim");
        pool.insert(pool.end(), fi.frames.vectors.begin(), fi.frames.vectors.end());
    }
    auto cb = boaw::kmeans_fit(pool.data(), pool.size() / dim, dim, k, cb_seed);
    {
        std::ostringstream csv;
        boaw::write_codebook_csv(csv, cb);
        write_text(out("codebook.csv"), csv.str());
    }
    logi("codebook done, inertia " + fmt_double(cb.inertia));

    // 2. per-family histograms
    std::vector<boaw::WindowHistogram> hists;
    for (const auto& fi : families) {
        auto h = boaw::window_histograms(fi.frames, cb, window_len,
                                         fi.has_spans ? &fi.spans : nullptr, n_assign);
        hists.insert(hists.end(), h.begin(), h.end());
    }
    {
        std::ostringstream csv;
        boaw::write_histograms_csv(csv, hists);
        write_text(out("histograms.csv"), csv.str());
    }
    logi(std::to_string(hists.size()) + " windows");

    // 3. reduce
    auto proj = reduce_histograms(hists, method, red_seed, params);
    {
        std::vector<std::string> fams;
        std::vector<double> starts;
        for (const auto& h : hists) {
            fams.push_back(h.family_id);
            starts.push_back(h.window_start);
        }
        std::ostringstream csv;
        dimred::write_projection_csv(csv, proj, fams, starts);
        write_text(out("projection.csv"), csv.str());
        write_text(out("projection.json"), dimred::projection_sidecar_json(proj));
    }
    logi("reduction done");

    // 4. sample
    auto idx = sample_indices(hists, n_clusters, per_cluster, sub_seed);
    {
        std::vector<boaw::WindowHistogram> selected;
        for (std::size_t i : idx) selected.push_back(hists[i]);
        std::ostringstream csv;
        boaw::write_histograms_csv(csv, selected);
        write_text(out("sampled.csv"), csv.str());
    }

    // 5. render
    std::vector<viz::PiePoint> points;
    for (std::size_t i : idx)
        points.push_back(viz::make_pie_point(proj.coords[i * 2], proj.coords[i * 2 + 1],
                                             hists[i].composition, hists[i].total_voc_fraction));
    write_text(out("figure.svg"), viz::render_svg(points, spec));
    {
        std::ostringstream csv;
        viz::write_pie_points_csv(csv, points);
        write_text(out("pie_points.csv"), csv.str());
    }
    logi("figure written to " + out("figure.svg"));
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"famviz: bag-of-audio-words vocalization interaction visualizer"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed_override;
    app.add_option("--seed", seed_override, "override every stage seed")->expected(1);
    app.add_option_function<int>(
        "--threads", [](int n) { kernels::set_threads(n); }, "worker thread count");

    int rc = 0;

    // energy
    std::string e_wav, e_frames, e_out;
    double e_window = 2.0, e_hop = 0.2;
    auto* c_energy = app.add_subcommand("energy", "per-frame RMS energy from a WAV file");
    c_energy->add_option("--wav", e_wav, "input RIFF/WAVE file")->required();
    c_energy->add_option("--frames", e_frames, "frame file to attach energy to");
    c_energy->add_option("--out", e_out, "output path")->required();
    c_energy->add_option("--window-len", e_window, "analysis window, seconds");
    c_energy->add_option("--hop", e_hop, "hop, seconds");
    c_energy->callback([&] { rc = run_energy(e_wav, e_frames, e_out, e_window, e_hop); });

    // labels
    std::string l_in, l_frames, l_out, l_energy = "auto";
    double l_duration = 0.0, l_window = 2.0, l_hop = 0.2;
    auto* c_labels = app.add_subcommand("labels", "majority-label a span timeline onto the grid");
    c_labels->add_option("--in", l_in, "label span CSV")->required();
    c_labels->add_option("--frames", l_frames, "frame file providing energy");
    c_labels->add_option("--out", l_out, "output per-frame CSV")->required();
    c_labels->add_option("--duration", l_duration, "timeline duration, seconds");
    c_labels->add_option("--energy", l_energy, "silence threshold: auto, off, or a value");
    c_labels->add_option("--window-len", l_window, "analysis window, seconds");
    c_labels->add_option("--hop", l_hop, "hop, seconds");
    c_labels->callback(
        [&] { rc = run_labels(l_in, l_frames, l_out, l_duration, l_energy, l_window, l_hop); });

    // decode
    std::string d_frames, d_out, d_energy = "auto";
    double d_conf = 0.8;
    auto* c_decode = app.add_subcommand("decode", "decode classifier probabilities to a timeline");
    c_decode->add_option("--frames", d_frames, "frame file with probability records")->required();
    c_decode->add_option("--out", d_out, "output span CSV")->required();
    c_decode->add_option("--confidence", d_conf, "confidence gate");
    c_decode->add_option("--energy", d_energy, "silence threshold: auto, off, or a value");
    c_decode->callback([&] { rc = run_decode(d_frames, d_out, d_conf, d_energy); });

    // codebook
    std::vector<std::string> cb_frames;
    std::string cb_out;
    std::size_t cb_k = 50, cb_iters = 300;
    std::uint64_t cb_seed = 0;
    double cb_tol = 1e-6;
    auto* c_codebook = app.add_subcommand("codebook", "fit a k-means codebook over frame vectors");
    c_codebook->add_option("--frames", cb_frames, "frame file(s)")->required();
    c_codebook->add_option("--out", cb_out, "output codebook CSV")->required();
    c_codebook->add_option("--k", cb_k, "codebook size");
    c_codebook->add_option("--codebook-seed", cb_seed, "k-means seed");
    c_codebook->add_option("--max-iters", cb_iters, "Lloyd iteration cap");
    c_codebook->add_option("--tol", cb_tol, "relative inertia tolerance");
    c_codebook->callback([&] {
        rc = run_codebook(cb_frames, cb_out, cb_k, seed_override.value_or(cb_seed), cb_iters,
                          cb_tol);
    });

    // histograms
    std::vector<std::string> h_frames, h_labels;
    std::string h_cb, h_out;
    double h_window = 30.0;
    std::size_t h_assign = 5;
    auto* c_hist = app.add_subcommand("histograms", "bag-of-audio-words window histograms");
    c_hist->add_option("--frames", h_frames, "frame file(s)")->required();
    c_hist->add_option("--labels", h_labels, "label span CSV(s), one per frame file");
    c_hist->add_option("--codebook", h_cb, "codebook CSV")->required();
    c_hist->add_option("--out", h_out, "output histograms CSV")->required();
    c_hist->add_option("--window-len", h_window, "window length, seconds");
    c_hist->add_option("--n-assign", h_assign, "nearest codewords per frame");
    c_hist->callback(
        [&] { rc = run_histograms(h_frames, h_labels, h_cb, h_out, h_window, h_assign); });

    // reduce
    std::vector<std::string> r_hists;
    std::string r_out, r_method = "tsne";
    std::uint64_t r_seed = 0;
    dimred::TsneParams r_params;
    auto* c_reduce = app.add_subcommand("reduce", "project histograms to 2-D");
    c_reduce->add_option("--histograms", r_hists, "histograms CSV(s)")->required();
    c_reduce->add_option("--out", r_out, "output projection CSV (sidecar JSON alongside)")
        ->required();
    c_reduce->add_option("--method", r_method, "pca or tsne");
    c_reduce->add_option("--reducer-seed", r_seed, "reducer seed");
    c_reduce->add_option("--perplexity", r_params.perplexity, "t-SNE perplexity");
    c_reduce->add_option("--n-iters", r_params.n_iters, "t-SNE iterations");
    c_reduce->add_option("--learning-rate", r_params.learning_rate, "t-SNE learning rate");
    c_reduce->add_option("--early-exaggeration", r_params.early_exaggeration,
                         "t-SNE early exaggeration factor");
    c_reduce->add_option("--exaggeration-iters", r_params.exaggeration_iters,
                         "t-SNE exaggeration phase length");
    c_reduce->callback(
        [&] { rc = run_reduce(r_hists, r_out, r_method, seed_override.value_or(r_seed), r_params); });

    // sample
    std::string s_hist, s_out;
    std::size_t s_clusters = 8, s_per = 100;
    std::uint64_t s_seed = 0;
    auto* c_sample = app.add_subcommand("sample", "cluster-based per-family window subsample");
    c_sample->add_option("--histograms", s_hist, "histograms CSV")->required();
    c_sample->add_option("--out", s_out, "output histograms CSV")->required();
    c_sample->add_option("--clusters", s_clusters, "clusters per family");
    c_sample->add_option("--per-cluster", s_per, "windows kept per cluster");
    c_sample->add_option("--sample-seed", s_seed, "subsample seed");
    c_sample->callback(
        [&] { rc = run_sample(s_hist, s_out, s_clusters, s_per, seed_override.value_or(s_seed)); });

    // render
    std::string v_hist, v_proj, v_out, v_points;
    viz::RenderSpec v_spec;
    v_spec.palette = viz::default_palette();
    auto* c_render = app.add_subcommand("render", "draw the pie-chart scatter SVG");
    c_render->add_option("--histograms", v_hist, "(sampled) histograms CSV")->required();
    c_render->add_option("--projection", v_proj, "projection CSV")->required();
    c_render->add_option("--out", v_out, "output SVG")->required();
    c_render->add_option("--width", v_spec.width, "canvas width, px");
    c_render->add_option("--height", v_spec.height, "canvas height, px");
    c_render->add_option("--margin", v_spec.margin, "canvas margin, px");
    c_render->add_option("--min-radius", v_spec.min_radius, "minimum pie radius, px");
    c_render->add_option("--max-radius", v_spec.max_radius, "maximum pie radius, px");
    c_render->add_flag("--no-legend", [&](std::int64_t) { v_spec.legend = false; },
                       "omit the legend");
    c_render->add_option("--points-csv", v_points, "also dump pie points as CSV");
    c_render->callback([&] {
        v_spec.validate();
        rc = run_render(v_hist, v_proj, v_out, v_spec, v_points);
    });

    // metrics
    std::string m_ref, m_hyp, m_out;
    double m_duration = 0.0, m_window = 2.0, m_hop = 0.2;
    auto* c_metrics = app.add_subcommand("metrics", "agreement report between two timelines");
    c_metrics->add_option("--ref", m_ref, "reference span CSV")->required();
    c_metrics->add_option("--hyp", m_hyp, "hypothesis span CSV")->required();
    c_metrics->add_option("--out", m_out, "output JSON report")->required();
    c_metrics->add_option("--duration", m_duration, "timeline duration, seconds");
    c_metrics->add_option("--window-len", m_window, "analysis window, seconds");
    c_metrics->add_option("--hop", m_hop, "hop, seconds");
    c_metrics->callback(
        [&] { rc = run_metrics(m_ref, m_hyp, m_out, m_duration, m_window, m_hop); });

    // synth
    std::string sy_config, sy_out = "synth_out";
    auto* c_synth = app.add_subcommand("synth", "generate synthetic families from a JSON config");
    c_synth->add_option("--config", sy_config, "JSON family recipes")->required();
    c_synth->add_option("--out", sy_out, "output directory");
    c_synth->callback([&] { rc = run_synth(sy_config, sy_out); });

    // pipeline
    std::string p_config, p_out;
    auto* c_pipeline =
        app.add_subcommand("pipeline", "codebook -> histograms -> reduce -> sample -> render");
    c_pipeline->add_option("--config", p_config, "pipeline JSON config")->required();
    c_pipeline->add_option("--out", p_out, "output directory (overrides config)");
    c_pipeline->callback([&] { rc = run_pipeline(p_config, p_out, seed_override); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const IoError& e) {
        std::cerr << "famviz: I/O error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "famviz: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "famviz: config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "famviz: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
