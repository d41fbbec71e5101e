#include "lloom/eval/metrics.hpp"

#include <cmath>
#include <string>

#include "lloom/error.hpp"

namespace lloom {

namespace {

void check_pair(std::size_t a, std::size_t b) {
    if (a != b) throw ValidationError("label lists differ in length: " + std::to_string(a) + " vs " + std::to_string(b));
    if (a == 0) throw ValidationError("label lists are empty");
}

} // namespace

ClassificationMetrics classification_metrics(const std::vector<bool>& predicted, const std::vector<bool>& gold) {
    check_pair(predicted.size(), gold.size());
    ClassificationMetrics m;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predicted[i] && gold[i]) ++m.tp;
        else if (predicted[i]) ++m.fp;
        else if (gold[i]) ++m.fn;
        else ++m.tn;
    }
    const auto n = static_cast<double>(gold.size());
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    if (m.tp + m.fp == 0) m.precision_undefined = true;
    else m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn == 0) m.recall_undefined = true;
    else m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision + m.recall == 0) m.f1_undefined = true;
    else m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

Kappa cohens_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
    check_pair(a.size(), b.size());
    const auto n = static_cast<double>(a.size());
    double agree = 0, a1 = 0, b1 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += a[i] == b[i] ? 1 : 0;
        a1 += a[i] ? 1 : 0;
        b1 += b[i] ? 1 : 0;
    }
    Kappa k;
    k.observed = agree / n;
    const double pa = a1 / n, pb = b1 / n;
    k.expected = pa * pb + (1 - pa) * (1 - pb);
    k.constant_rater = a1 == 0 || a1 == n || b1 == 0 || b1 == n;
    if (std::abs(1 - k.expected) < 1e-12) {
        k.degenerate = true;
        k.kappa = k.observed == 1 ? 1.0 : 0.0;
    } else {
        k.kappa = (k.observed - k.expected) / (1 - k.expected);
    }
    return k;
}

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b) {
    check_pair(a.size(), b.size());
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

} // namespace lloom
