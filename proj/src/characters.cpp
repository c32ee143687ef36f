#include "siegel/characters.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "siegel/errors.hpp"

namespace siegel {

int kronecker(std::int64_t d, std::uint64_t n) noexcept
{
    if (n == 0)
        return d == 1 || d == -1 ? 1 : 0;

    int result = 1;
    if ((n & 1) == 0) {
        if ((d & 1) == 0)
            return 0;
        const int tz = std::countr_zero(n);
        n >>= tz;
        // (d/2) = -1 exactly when d = 3, 5 (mod 8)
        const auto r8 = ((d % 8) + 8) % 8;
        if ((tz & 1) && (r8 == 3 || r8 == 5))
            result = -result;
    }

    // Jacobi symbol (a/n) for odd n; (d/n) = (-1/n)(|d|/n) when d < 0.
    std::uint64_t a = 0;
    if (d < 0) {
        if ((n & 3) == 3)
            result = -result;
        a = (0 - static_cast<std::uint64_t>(d)) % n;
    } else {
        a = static_cast<std::uint64_t>(d) % n;
    }
    while (a != 0) {
        while ((a & 1) == 0) {
            a >>= 1;
            const auto r = n & 7;
            if (r == 3 || r == 5)
                result = -result;
        }
        std::swap(a, n);
        if ((a & 3) == 3 && (n & 3) == 3)
            result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

namespace {

bool squarefree(std::uint64_t m) noexcept
{
    if (m % 4 == 0)
        return false;
    for (std::uint64_t p = 3; p <= m / p; p += 2) {
        if (m % p == 0) {
            m /= p;
            if (m % p == 0)
                return false;
        }
    }
    return true;
}

std::vector<std::uint32_t> odd_primes_up_to(std::uint64_t limit)
{
    std::vector<bool> composite(limit + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t p = 3; p <= limit; p += 2) {
        if (composite[p])
            continue;
        primes.push_back(static_cast<std::uint32_t>(p));
        for (std::uint64_t k = p * p; k <= limit; k += 2 * p)
            composite[k] = true;
    }
    return primes;
}

} // namespace

bool is_fundamental_discriminant(std::uint64_t d) noexcept
{
    if (d <= 1)
        return false;
    switch (d % 16) {
    case 1: case 5: case 9: case 13:
        return squarefree(d);
    case 8: case 12:
        // d = 4m with m = 2 or 3 (mod 4)
        return squarefree(d / 4);
    default:
        return false;
    }
}

std::vector<std::uint64_t> fundamental_discriminants(std::uint64_t lo, std::uint64_t hi)
{
    std::vector<std::uint64_t> out;
    lo = std::max<std::uint64_t>(lo, 2);
    if (hi < lo)
        return out;

    // has_odd_square[i] <=> lo+i divisible by p^2 for some odd prime p
    std::vector<bool> has_odd_square(hi - lo + 1, false);
    for (const std::uint64_t p : odd_primes_up_to(isqrt(hi))) {
        const std::uint64_t sq = p * p;
        for (std::uint64_t k = (lo + sq - 1) / sq * sq; k <= hi; k += sq)
            has_odd_square[k - lo] = true;
    }
    for (std::uint64_t d = lo; d <= hi; ++d) {
        const auto r = d % 16;
        const bool shape = (r % 4 == 1) || r == 8 || r == 12;
        if (shape && !has_odd_square[d - lo])
            out.push_back(d);
        if (d == hi)
            break;
    }
    return out;
}

Discriminant::Discriminant(std::uint64_t d) : d_(d)
{
    if (!is_fundamental_discriminant(d))
        throw precondition_error("not a positive fundamental discriminant: " + std::to_string(d));
}

double Discriminant::sqrt() const noexcept
{
    return std::sqrt(static_cast<double>(d_));
}

QuadChar::QuadChar(Discriminant disc, Tables tables) : disc_(disc)
{
    const std::uint64_t d = disc.value();
    values_.assign(d, 0);

    // Completely multiplicative: evaluate the symbol on primes only and
    // propagate through a smallest-prime-factor table.
    std::vector<std::uint32_t> spf(d, 0);
    for (std::uint64_t p = 2; p < d; ++p) {
        if (spf[p] != 0)
            continue;
        for (std::uint64_t k = p; k < d; k += p)
            if (spf[k] == 0)
                spf[k] = static_cast<std::uint32_t>(p);
    }
    const auto sd = static_cast<std::int64_t>(d);
    if (d > 1)
        values_[1] = 1;
    for (std::uint64_t n = 2; n < d; ++n) {
        const std::uint64_t p = spf[n];
        values_[n] = p == n ? static_cast<std::int8_t>(kronecker(sd, p))
                            : static_cast<std::int8_t>(values_[p] * values_[n / p]);
    }

    if (tables == Tables::values_only)
        return;

    C_.assign(d, 0);
    S_.assign(d, 0);
    std::int64_t c = 0;
    std::int64_t s = 0;
    for (std::uint64_t n = 1; n < d; ++n) {
        c += values_[n];
        s += c;
        C_[n] = static_cast<std::int32_t>(c);
        S_[n] = s;
    }
    if (c != 0 || s != 0)
        throw internal_error("character sums not periodic for d=" + std::to_string(d));
}

std::int64_t QuadChar::partial_sum(std::uint64_t x) const
{
    if (C_.empty())
        throw internal_error("QuadChar built without summatory tables");
    return C_[x % modulus()];
}

std::int64_t QuadChar::double_sum(std::uint64_t n) const
{
    if (S_.empty())
        throw internal_error("QuadChar built without summatory tables");
    return S_[n % modulus()];
}

double l_one_exact(const QuadChar& chi)
{
    const std::uint64_t d = chi.modulus();
    const auto vals = chi.period();
    const double scale = std::numbers::pi / static_cast<double>(d);

    // chi(a) = chi(d-a), so fold the sum onto a <= d/2; chi(d/2) = 0 for even d.
    CompensatedSum<double> sum;
    for (std::uint64_t a = 1; 2 * a < d; ++a) {
        if (vals[a] == 0)
            continue;
        const double t = std::log(std::sin(scale * static_cast<double>(a)));
        sum.add(vals[a] > 0 ? t : -t);
    }
    const double value = -2.0 * sum.value() / chi.disc().sqrt();
    if (!(value > 0))
        throw internal_error("L(1,chi) not positive for d=" + std::to_string(d));
    return value;
}

double l_one_exact(Discriminant disc)
{
    return l_one_exact(QuadChar(disc, QuadChar::Tables::values_only));
}

LogSeries::LogSeries(const QuadChar& chi, double sigma, std::uint64_t first)
    : chi_(&chi), sigma_(sigma), first_(std::max<std::uint64_t>(first, 2)), N_(first_ - 1)
{
    require(sigma >= 0.75 && sigma <= 1.0, "sigma must lie in [0.75, 1]");
}

void LogSeries::extend_to(std::uint64_t N)
{
    const auto vals = chi_->period();
    const std::uint64_t d = chi_->modulus();
    std::uint64_t r = (N_ + 1) % d;
    for (std::uint64_t n = N_ + 1; n <= N; ++n) {
        const int c = vals[r];
        if (++r == d)
            r = 0;
        if (c == 0)
            continue;
        const double ln = std::log(static_cast<double>(n));
        const double t = ln * std::exp(-sigma_ * ln);
        sum_.add(c > 0 ? t : -t);
    }
    N_ = std::max(N_, N);
}

double LogSeries::tail_radius() const noexcept
{
    const double next = static_cast<double>(N_ + 1);
    const double ln = std::log(next);
    const double f_next = ln * std::exp(-sigma_ * ln);
    // 1.0 + 1e-15 covers the rounding in f_next itself
    return (1.0 + 1e-15) * static_cast<double>(chi_->modulus()) * f_next + sum_.error_bound(8);
}

Interval LogSeries::enclosure() const noexcept
{
    return Interval::around(partial(), tail_radius());
}

Interval l_prime_truncated(const QuadChar& chi, double sigma, std::uint64_t N)
{
    require(sigma >= 0.75 && sigma <= 1.0, "sigma must lie in [0.75, 1]");
    require(N >= chi.modulus(), "truncation N must be at least d");
    LogSeries series(chi, sigma, 2);
    series.extend_to(N);
    return series.enclosure().abs();
}

Interval l_prime_truncated(Discriminant disc, double sigma, std::uint64_t N)
{
    return l_prime_truncated(QuadChar(disc, QuadChar::Tables::values_only), sigma, N);
}

} // namespace siegel
