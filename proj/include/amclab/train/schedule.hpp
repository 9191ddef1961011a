// Sigmoid ramp for the adversarial loss weight.
#pragma once

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace amclab::train {

// lambda(p) = 2 / (1 + exp(-gamma * p)) - 1 for progress p in [0, 1].
// Starts at exactly 0, strictly increasing, approaches 1.
inline double lambda_at(double p, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("lambda_at: gamma must be > 0");
    if (p < 0.0 || p > 1.0) {
        std::cerr << "warning: lambda_at progress " << p << " outside [0,1], clamping\n";
        p = p < 0.0 ? 0.0 : 1.0;
    }
    return 2.0 / (1.0 + std::exp(-gamma * p)) - 1.0;
}

}  // namespace amclab::train
