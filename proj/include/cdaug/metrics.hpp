#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cdaug/error.hpp"

namespace cdaug {

struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<long long> counts;  // counts[truth * classes + pred]

    long long at(std::size_t truth, std::size_t pred) const {
        return counts[truth * classes + pred];
    }
    long long& at(std::size_t truth, std::size_t pred) {
        return counts[truth * classes + pred];
    }
    long long total() const;

    bool operator==(const ConfusionMatrix&) const = default;
};

/// M[i][j] = number of samples with truth i predicted as j.
ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth,
                                 std::size_t classes);

struct MacroF1Detail {
    std::vector<double> per_class;
    // True where a class had no support and no predictions; such classes
    // contribute F1 = 0 and deserve a warning upstream.
    std::vector<bool> degenerate;
    double value = 0.0;
};

/// Unweighted mean of per-class F1. `paper_literal` swaps the standard
/// harmonic mean 2*Sp*Sn/(Sp+Sn) for the printed variant Sp*Sn/(Sp+Sn),
/// which is half as large; rankings are unaffected.
MacroF1Detail macro_f1_detail(const ConfusionMatrix& m, bool paper_literal = false);

double macro_f1(const ConfusionMatrix& m);
double macro_f1_paper_literal(const ConfusionMatrix& m);

} // namespace cdaug
