#pragma once

#include <string>
#include <vector>

#include "famviz/types.hpp"

namespace famviz::metrics {

/// Rows = reference, columns = hypothesis.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;  // c x c

    std::size_t size() const { return labels.size(); }
    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * size() + j]; }
    std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<std::string>& ref, const std::vector<std::string>& hyp,
                          const std::vector<std::string>& labels);

double accuracy(const ConfusionMatrix& cm);

/// Unweighted mean F1 over classes present in the reference. A class with
/// zero precision and recall scores F1 = 0.
double macro_f1(const ConfusionMatrix& cm);

/// (p_o - p_e) / (1 - p_e); when p_e = 1, kappa is 1 for perfect agreement
/// and 0 otherwise.
double cohen_kappa(const ConfusionMatrix& cm);

}  // namespace famviz::metrics
