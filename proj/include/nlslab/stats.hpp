#pragma once

#include <span>
#include <vector>

namespace nlslab {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Sample mean and standard error, summed in index order.
MeanEstimate mean_and_stderr(std::span<const double> values);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

} // namespace nlslab
