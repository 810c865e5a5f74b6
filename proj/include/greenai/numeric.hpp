#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace greenai::detail {

// Softmax with max-logit subtraction so saturated logits cannot overflow.
inline void stable_softmax_inplace(std::span<double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

inline std::vector<double> stable_softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    stable_softmax_inplace(out);
    return out;
}

// Index of the largest element; ties go to the lowest index.
inline int argmax(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
    return best;
}

} // namespace greenai::detail
