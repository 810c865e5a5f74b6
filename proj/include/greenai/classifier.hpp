#pragma once

#include <span>
#include <stdexcept>

#include "greenai/dataset.hpp"

namespace greenai {

/// Label plus score of the predicted class.
struct Scored {
    int label = -1;
    double confidence = 0.0;
};

/// Classification model contract: fit once, then predict deterministically.
/// evaluate() returns the label together with its confidence in [0, 1] from a
/// single forward pass, so callers never pay for inference twice. Fitted
/// models are immutable and safe to share across threads.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual void fit(const Dataset& train) = 0;
    virtual Scored evaluate(std::span<const double> x) const = 0;
    virtual bool fitted() const = 0;

    /// Must agree with evaluate(x).label; overridable where the label is
    /// computable more cheaply than the confidence.
    virtual int predict(std::span<const double> x) const { return evaluate(x).label; }
    double confidence(std::span<const double> x) const { return evaluate(x).confidence; }

protected:
    void require_fitted() const {
        if (!fitted()) throw std::logic_error("classifier used before fit()");
    }
};

} // namespace greenai
