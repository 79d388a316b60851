#include "octens/metrics.hpp"

#include <cmath>

#include "octens/error.hpp"

namespace octens {

LabelMatrix binarize(const ScoreMatrix& scores, double threshold) {
    require(std::isfinite(threshold) && threshold > 0.0 && threshold < 1.0, "threshold must be in (0,1)");
    std::vector<LabelRow> rows(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i)
        for (std::size_t j = 0; j < kNumLabels; ++j) rows[i][j] = scores.row(i)[j] >= threshold ? 1 : 0;
    return LabelMatrix(scores.sample_ids(), std::move(rows));
}

double f1_from_counts(const ConfusionCounts& c) {
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 0.0;
    return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

ConfusionCounts count_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
    if (pred.size() != truth.size()) fail(ErrorKind::Parameter, "prediction and truth lengths differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] && truth[i]) ++c.tp;
        else if (pred[i]) ++c.fp;
        else if (truth[i]) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double macro_average(std::span<const double> per_label_f1) {
    require(!per_label_f1.empty(), "macro average of zero labels");
    double sum = 0.0;
    for (double f : per_label_f1) sum += f;
    return sum / static_cast<double>(per_label_f1.size());
}

MetricReport evaluate(const LabelMatrix& pred, const LabelMatrix& truth) {
    if (pred.rows() != truth.rows()) fail(ErrorKind::Parameter, "prediction and truth row counts differ");
    if (pred.sample_ids() != truth.sample_ids())
        fail(ErrorKind::Parameter, "prediction and truth are not aligned on sample ids");

    MetricReport report;
    std::vector<std::uint8_t> p(pred.rows()), t(truth.rows());
    for (std::size_t j = 0; j < kNumLabels; ++j) {
        for (std::size_t i = 0; i < pred.rows(); ++i) {
            p[i] = pred.row(i)[j];
            t[i] = truth.row(i)[j];
        }
        report.counts[j] = count_confusion(p, t);
        report.per_label_f1[j] = f1_from_counts(report.counts[j]);
    }
    report.macro_f1 = macro_average(report.per_label_f1);
    return report;
}

}  // namespace octens
