#ifndef MLMC_INCREMENTS_HPP
#define MLMC_INCREMENTS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mlmc/errors.hpp"

namespace mlmc {

/// Law of the standardized increments driving the integrators.
/// All kinds have mean 0 and variance 1.
enum class DistributionKind { Gaussian, ThreePoint, FourPoint };

const char* to_string(DistributionKind kind);

/// n-th moment of the standardized law, in closed form.
double moment(DistributionKind kind, int order);

namespace detail {

/// Philox4x32-10 counter-based generator. The 128-bit counter is split into
/// (stream_id, position) so one 64-bit seed keys a family of independent,
/// reproducible streams.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::uint64_t seed,
                                              std::uint64_t stream,
                                              std::uint64_t position) {
        std::array<std::uint32_t, 4> x = {
            static_cast<std::uint32_t>(position),
            static_cast<std::uint32_t>(position >> 32),
            static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * x[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * x[2];
            x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k0,
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k1,
                 static_cast<std::uint32_t>(p0)};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return x;
    }
};

} // namespace detail

/// Stream of i.i.d. standardized increments of a given kind. Two sources
/// constructed with the same (kind, seed, stream_id) produce identical
/// sequences; distinct stream_id values give independent streams.
/// Not shared between threads; move/construct one per worker instead.
class IncrementSource {
  public:
    IncrementSource(DistributionKind kind, std::uint64_t seed, std::uint64_t stream_id)
        : kind_(kind), seed_(seed), stream_(stream_id) {}

    DistributionKind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    /// One standardized draw.
    double next() {
        switch (kind_) {
        case DistributionKind::Gaussian: return next_gaussian();
        case DistributionKind::ThreePoint: return next_three_point();
        case DistributionKind::FourPoint: return next_four_point();
        }
        return 0.0; // unreachable
    }

    void fill(std::span<double> out) {
        for (double& v : out) v = next();
    }

    std::vector<double> draw(std::size_t n) {
        std::vector<double> out(n);
        fill(out);
        return out;
    }

  private:
    std::uint64_t next_u64() {
        if (words_left_ == 0) {
            block_ = detail::Philox4x32::block(seed_, stream_, position_++);
            words_left_ = 4;
        }
        const std::uint32_t lo = block_[4 - words_left_];
        const std::uint32_t hi = block_[4 - words_left_ + 1];
        words_left_ -= 2;
        return (std::uint64_t(hi) << 32) | lo;
    }

    /// Uniform on the open interval (0,1).
    double next_uniform() {
        return double(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    double next_three_point() {
        static const double root3 = std::sqrt(3.0);
        const double u = next_uniform();
        if (u < 2.0 / 3.0) return 0.0;
        return (u < 5.0 / 6.0) ? root3 : -root3;
    }

    double next_four_point() {
        // P(+-a) = c, P(+-b) = 1/2 - c with c = (1 - (3+sqrt 6)/6)/2.
        static const double c = 0.5 * (1.0 - (3.0 + std::sqrt(6.0)) / 6.0);
        static const double a = std::sqrt(3.0 + std::sqrt(6.0));
        static const double b = std::sqrt(3.0 - std::sqrt(6.0));
        const double u = next_uniform();
        if (u < c) return a;
        if (u < 2.0 * c) return -a;
        return (u < 0.5 + c) ? b : -b;
    }

    DistributionKind kind_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int words_left_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Standard deviation of the exact OU increment over a step of size h:
/// alpha_h = sqrt((1 - e^{-2 lambda h}) / (2 lambda)).
inline double ou_alpha(double lambda, double h) {
    return std::sqrt(-std::expm1(-2.0 * lambda * h) / (2.0 * lambda));
}

/// Coefficients coupling two OU increments at step h into one at step 2h.
struct OuCoupling {
    double lambda;
    double h;
    double r;        ///< e^{-lambda h}
    double alpha_h;  ///< std dev of the step-h increment
    double alpha_2h; ///< std dev of the step-2h increment

    OuCoupling(double lambda_, double h_)
        : lambda(lambda_), h(h_), r(std::exp(-lambda_ * h_)),
          alpha_h(ou_alpha(lambda_, h_)), alpha_2h(ou_alpha(lambda_, 2.0 * h_)) {
        if (!(lambda_ > 0.0) || !(h_ > 0.0))
            throw input_error("OuCoupling: lambda and h must be positive");
    }

    /// Weight of the earlier fine increment in the combined one.
    double w_first() const { return r / std::sqrt(1.0 + r * r); }
    /// Weight of the later fine increment.
    double w_second() const { return 1.0 / std::sqrt(1.0 + r * r); }
};

/// Standardized Brownian combination: two step-h increments -> one step-2h
/// increment, (xi1 + xi2)/sqrt(2), so sqrt(2h)*out = sqrt(h)*xi1 + sqrt(h)*xi2.
std::vector<double> combine_brownian(std::span<const double> xi1,
                                     std::span<const double> xi2);

/// OU combination (r xi1 + xi2)/sqrt(1+r^2); alpha_2h * out reproduces the
/// exact step-2h OU increment from the two fine contributions.
std::vector<double> combine_ou(std::span<const double> xi1,
                               std::span<const double> xi2,
                               const OuCoupling& cpl);

} // namespace mlmc

#endif
