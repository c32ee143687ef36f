#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace siegel {

/// Neumaier's variant of Kahan summation. The running compensation absorbs
/// the low-order bits lost in each addition, so the error of a sum of n terms
/// is bounded by ~2u * sum|x_i| instead of ~n*u * sum|x_i|.
template <typename T = double>
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(T init) : sum_(init) {}

    void add(T x) noexcept
    {
        const T t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
        abs_ += std::abs(x);
    }

    CompensatedSum& operator+=(T x) noexcept
    {
        add(x);
        return *this;
    }

    T value() const noexcept { return sum_ + comp_; }

    // Sum of |x_i|; scales the rounding error bound of value().
    T magnitude() const noexcept { return abs_; }

    // Rigorous-enough bound on |value() - exact sum| assuming each added
    // term carries at most `term_ulps` ulps of relative error.
    T error_bound(T term_ulps = 4) const noexcept
    {
        constexpr T u = std::numeric_limits<T>::epsilon();
        return (term_ulps + 2) * u * abs_;
    }

private:
    T sum_ = 0;
    T comp_ = 0;
    T abs_ = 0;
};

/// Closed real interval [lo, hi].
struct Interval {
    double lo = 0;
    double hi = 0;

    double mid() const noexcept { return 0.5 * (lo + hi); }
    double radius() const noexcept { return 0.5 * (hi - lo); }
    double width() const noexcept { return hi - lo; }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }

    static Interval around(double centre, double r) noexcept { return {centre - r, centre + r}; }

    // Image under |x|.
    Interval abs() const noexcept
    {
        if (lo >= 0)
            return *this;
        if (hi <= 0)
            return {-hi, -lo};
        return {0.0, std::max(-lo, hi)};
    }
};

/// Outcome of a floating-point check of an analytic inequality lhs <= rhs.
enum class Verdict { pass, marginal, fail };

inline constexpr double default_clearance = 1e-9;

/// lhs <= rhs with relative clearance: a pass needs lhs <= rhs - clearance*|rhs|.
/// A value inside the clearance band is marginal, not a pass.
inline Verdict check_leq(double lhs, double rhs, double clearance = default_clearance) noexcept
{
    if (!(lhs <= rhs))
        return Verdict::fail;
    if (lhs <= rhs - clearance * std::abs(rhs))
        return Verdict::pass;
    return Verdict::marginal;
}

inline const char* to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::marginal: return "marginal";
    case Verdict::fail: return "fail";
    }
    return "?";
}

__extension__ typedef unsigned __int128 uint128;

/// Exact floor(sqrt(n)) for 64-bit n.
constexpr std::uint64_t isqrt(std::uint64_t n) noexcept
{
    if (n == 0)
        return 0;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    // The double estimate is within a few units; fix up exactly.
    while (r > 0 && static_cast<uint128>(r) * r > n)
        --r;
    while (static_cast<uint128>(r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

/// Squareness test with a quadratic-residue mod 64 prefilter.
constexpr bool is_perfect_square(std::uint64_t n, std::uint64_t* root = nullptr) noexcept
{
    // bit k set iff k is a square mod 64
    constexpr std::uint64_t squares_mod64 = 0x0202021202030213ULL;
    if (((squares_mod64 >> (n & 63)) & 1) == 0)
        return false;
    const std::uint64_t r = isqrt(n);
    if (r * r != n)
        return false;
    if (root)
        *root = r;
    return true;
}

} // namespace siegel
