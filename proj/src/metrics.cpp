#include "famviz/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace famviz::metrics {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                          const std::vector<std::string>& labels) {
    if (ref.size() != hyp.size() || ref.empty())
        throw MalformedInputError("confusion: ref/hyp length mismatch or empty");
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size() * labels.size(), 0);
    auto index_of = [&](const std::string& s) {
        auto it = std::find(labels.begin(), labels.end(), s);
        if (it == labels.end())
            throw MalformedInputError("confusion: label '" + s + "' not in class list");
        return static_cast<std::size_t>(it - labels.begin());
    };
    for (std::size_t t = 0; t < ref.size(); ++t)
        ++cm.counts[index_of(ref[t]) * labels.size() + index_of(hyp[t])];
    return cm;
}

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.size() == 0 || cm.total() == 0)
        throw InsufficientDataError("metrics: empty confusion matrix");
}

}  // namespace

double accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    std::size_t diag = 0;
    for (std::size_t i = 0; i < cm.size(); ++i) diag += cm.at(i, i);
    return static_cast<double>(diag) / static_cast<double>(cm.total());
}

double macro_f1(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const std::size_t c = cm.size();
    double sum = 0.0;
    std::size_t n_classes = 0;
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += cm.at(i, j);
            col += cm.at(j, i);
        }
        if (row == 0) continue;  // class absent from reference
        const double tp = static_cast<double>(cm.at(i, i));
        const double prec = col ? tp / static_cast<double>(col) : 0.0;
        const double rec = tp / static_cast<double>(row);
        const double f1 = (prec + rec > 0.0) ? 2.0 * prec * rec / (prec + rec) : 0.0;
        sum += f1;
        ++n_classes;
    }
    return n_classes ? sum / static_cast<double>(n_classes) : 0.0;
}

double cohen_kappa(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    const std::size_t c = cm.size();
    const double total = static_cast<double>(cm.total());
    double po = 0.0, pe = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        po += static_cast<double>(cm.at(i, i));
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            row += static_cast<double>(cm.at(i, j));
            col += static_cast<double>(cm.at(j, i));
        }
        pe += row * col;
    }
    po /= total;
    pe /= total * total;
    if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

}  // namespace famviz::metrics
