#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace iwfsim {

// Neumaier compensated accumulator. Sums are order-dependent but accurate to
// a few ulps regardless of cancellation, which the 1e-12 monotonicity
// tolerances in the dynamics rely on.
class CompensatedSum {
public:
    void add(double x) {
        const double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

inline double dot_compensated(std::span<const double> a, std::span<const double> b) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

}  // namespace iwfsim
