#pragma once

#include <cstddef>
#include <vector>

namespace lloom {

struct ClassificationMetrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    // Set when the denominator was zero and the value defaulted to 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

/// Throws ValidationError on length mismatch or empty input.
ClassificationMetrics classification_metrics(const std::vector<bool>& predicted, const std::vector<bool>& gold);

struct Kappa {
    double kappa = 0;
    double observed = 0;
    double expected = 0;
    /// p_e == 1: kappa is 1 if the raters agree everywhere, else 0.
    bool degenerate = false;
    /// At least one rater gave the same label to every item.
    bool constant_rater = false;
};

Kappa cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b);

} // namespace lloom
