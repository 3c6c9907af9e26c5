#include "mlmc/increments.hpp"

#include <cmath>

namespace mlmc {

const char* to_string(DistributionKind kind) {
    switch (kind) {
    case DistributionKind::Gaussian: return "gaussian";
    case DistributionKind::ThreePoint: return "three_point";
    case DistributionKind::FourPoint: return "four_point";
    }
    return "?";
}

double moment(DistributionKind kind, int order) {
    if (order < 0) throw input_error("moment: order must be nonnegative");
    if (order == 0) return 1.0;
    if (order % 2 == 1) return 0.0; // all three laws are symmetric

    switch (kind) {
    case DistributionKind::Gaussian: {
        double m = 1.0; // (order-1)!!
        for (int k = order - 1; k > 1; k -= 2) m *= double(k);
        return m;
    }
    case DistributionKind::ThreePoint:
        // 2 * (1/6) * sqrt(3)^order
        return std::pow(3.0, order / 2) / 3.0;
    case DistributionKind::FourPoint: {
        const double c = 0.5 * (1.0 - (3.0 + std::sqrt(6.0)) / 6.0);
        const double a2 = 3.0 + std::sqrt(6.0);
        const double b2 = 3.0 - std::sqrt(6.0);
        return 2.0 * c * std::pow(a2, order / 2) +
               2.0 * (0.5 - c) * std::pow(b2, order / 2);
    }
    }
    return 0.0;
}

std::vector<double> combine_brownian(std::span<const double> xi1,
                                     std::span<const double> xi2) {
    if (xi1.size() != xi2.size())
        throw input_error("combine_brownian: length mismatch");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<double> out(xi1.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (xi1[i] + xi2[i]) * inv_sqrt2;
    return out;
}

std::vector<double> combine_ou(std::span<const double> xi1,
                               std::span<const double> xi2,
                               const OuCoupling& cpl) {
    if (xi1.size() != xi2.size())
        throw input_error("combine_ou: length mismatch");
    const double w1 = cpl.w_first();
    const double w2 = cpl.w_second();
    std::vector<double> out(xi1.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = w1 * xi1[i] + w2 * xi2[i];
    return out;
}

} // namespace mlmc
