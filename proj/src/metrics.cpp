#include "cdaug/metrics.hpp"

#include <numeric>
#include <string>

namespace cdaug {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth,
                                 std::size_t classes) {
    if (pred.size() != truth.size())
        raise(ErrorCode::LengthMismatch, "pred has " + std::to_string(pred.size()) +
                                             " entries, truth has " +
                                             std::to_string(truth.size()));
    ConfusionMatrix m;
    m.classes = classes;
    m.counts.assign(classes * classes, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int t = truth[i];
        if (p < 0 || static_cast<std::size_t>(p) >= classes || t < 0 ||
            static_cast<std::size_t>(t) >= classes)
            raise(ErrorCode::BadLabel, "label out of range at index " + std::to_string(i));
        ++m.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
    }
    return m;
}

MacroF1Detail macro_f1_detail(const ConfusionMatrix& m, bool paper_literal) {
    const std::size_t k = m.classes;
    MacroF1Detail detail;
    detail.per_class.resize(k, 0.0);
    detail.degenerate.resize(k, false);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        long long tp = m.at(c, c);
        long long row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += m.at(c, j);
            col += m.at(j, c);
        }
        const long long fn = row - tp;
        const long long fp = col - tp;
        double f1 = 0.0;
        if (tp > 0) {
            const double sp = static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double sn = static_cast<double>(tp) / static_cast<double>(tp + fn);
            f1 = paper_literal ? (sp * sn) / (sp + sn) : 2.0 * sp * sn / (sp + sn);
        } else if (row == 0 && col == 0) {
            detail.degenerate[c] = true;
        }
        detail.per_class[c] = f1;
        sum += f1;
    }
    detail.value = k == 0 ? 0.0 : sum / static_cast<double>(k);
    return detail;
}

double macro_f1(const ConfusionMatrix& m) { return macro_f1_detail(m, false).value; }

double macro_f1_paper_literal(const ConfusionMatrix& m) {
    return macro_f1_detail(m, true).value;
}

} // namespace cdaug
