#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace greenai {

using Milliseconds = std::chrono::duration<double, std::milli>;

/// A single classification outcome. model_index identifies the chain member
/// that produced it (1-based chain position; 1 = cheapest model).
struct Prediction {
    int label = -1;
    double confidence = 0.0;
    int model_index = 1;
};

/// Per-run evaluation summary over one test-set pass.
struct RunMetrics {
    double accuracy = 0.0;
    Milliseconds total_time{0.0};
    double total_energy_uwh = 0.0;
    std::vector<double> fraction_per_model; // [i] = share served by model i+1
    Milliseconds selection_overhead{0.0};

    /// Throws std::logic_error when an invariant is broken. Evaluation
    /// functions call this before returning.
    void validate() const {
        double sum = 0.0;
        for (double f : fraction_per_model) {
            if (f < 0.0) throw std::logic_error("RunMetrics: negative fraction");
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::logic_error("RunMetrics: fractions do not sum to 1");
        if (accuracy < 0.0 || accuracy > 1.0)
            throw std::logic_error("RunMetrics: accuracy outside [0, 1]");
        if (total_time.count() < 0.0 || selection_overhead.count() < 0.0 ||
            total_energy_uwh < 0.0)
            throw std::logic_error("RunMetrics: negative quantity");
    }
};

} // namespace greenai
