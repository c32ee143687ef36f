#pragma once

// Real even Dirichlet characters chi_d(n) = (d/n) for positive fundamental
// discriminants d, and the character sums built from them.

#include <cstdint>
#include <span>
#include <vector>

#include "siegel/numeric.hpp"

namespace siegel {

/// Kronecker symbol (d/n) for d > 0, n >= 0.
int kronecker(std::int64_t d, std::uint64_t n) noexcept;

bool is_fundamental_discriminant(std::uint64_t d) noexcept;

/// All fundamental discriminants in [lo, hi], ascending. Uses a segmented
/// sieve for odd square factors, so it is cheap for wide ranges.
std::vector<std::uint64_t> fundamental_discriminants(std::uint64_t lo, std::uint64_t hi);

/// A positive fundamental discriminant; equals the conductor q of chi_d.
class Discriminant {
public:
    /// Throws precondition_error unless d is a positive fundamental discriminant.
    explicit Discriminant(std::uint64_t d);

    std::uint64_t value() const noexcept { return d_; }
    double sqrt() const noexcept;

    friend bool operator==(Discriminant, Discriminant) = default;

private:
    std::uint64_t d_;
};

/// chi_d tabulated over one period together with its first and second
/// summatory functions C(x) = sum_{k<=x} chi(k) and S(n) = sum_{a<=n} C(a).
/// Both C and S are d-periodic for even characters.
class QuadChar {
public:
    enum class Tables { values_only, with_sums };

    explicit QuadChar(Discriminant disc, Tables tables = Tables::with_sums);

    Discriminant disc() const noexcept { return disc_; }
    std::uint64_t modulus() const noexcept { return disc_.value(); }

    int operator()(std::uint64_t n) const noexcept { return values_[n % modulus()]; }

    std::span<const std::int8_t> period() const noexcept { return values_; }

    // Require Tables::with_sums.
    std::int64_t partial_sum(std::uint64_t x) const;
    std::int64_t double_sum(std::uint64_t n) const;

private:
    Discriminant disc_;
    std::vector<std::int8_t> values_;   // chi(0..d-1)
    std::vector<std::int32_t> C_;       // C(0..d-1)
    std::vector<std::int64_t> S_;       // S(0..d-1)
};

inline std::int64_t char_partial_sum(const QuadChar& chi, std::uint64_t x)
{
    return chi.partial_sum(x);
}

inline std::int64_t double_sum(const QuadChar& chi, std::uint64_t n)
{
    return chi.double_sum(n);
}

/// L(1, chi_d) from the finite closed form
///   L(1,chi) = -(1/sqrt d) sum_{a<d} chi(a) log sin(pi a/d).
/// The log 2 of log(2 sin) drops out because chi sums to zero over a period.
double l_one_exact(const QuadChar& chi);
double l_one_exact(Discriminant disc);

/// Incremental evaluation of sum_{first<=n<=N} chi(n) log n / n^sigma with a
/// rigorous tail enclosure for the infinite series. Used both for L'(sigma)
/// (first = 2) and for the n >= 4 tail of Theorem L (first = 4).
class LogSeries {
public:
    LogSeries(const QuadChar& chi, double sigma, std::uint64_t first);

    /// Extend the truncation point to N (no-op if already there).
    void extend_to(std::uint64_t N);

    std::uint64_t truncation() const noexcept { return N_; }
    double partial() const noexcept { return sum_.value(); }

    /// Abel-summation tail bound: |sum_{n>N}| <= q f(N+1), valid because
    /// |C(x)| <= q/2 and f decreases beyond N. Includes the rounding slack.
    double tail_radius() const noexcept;

    /// Enclosure of the signed infinite sum.
    Interval enclosure() const noexcept;

private:
    const QuadChar* chi_;
    double sigma_;
    std::uint64_t first_;
    std::uint64_t N_;
    CompensatedSum<double> sum_;
};

/// Rigorous enclosure of |L'(sigma, chi)|; 0.75 <= sigma <= 1, N >= d.
Interval l_prime_truncated(const QuadChar& chi, double sigma, std::uint64_t N);
Interval l_prime_truncated(Discriminant disc, double sigma, std::uint64_t N);

} // namespace siegel
