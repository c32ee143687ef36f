#include "siegel/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "siegel/errors.hpp"

namespace siegel {

ContinuedFraction sqrt_continued_fraction(std::uint64_t d)
{
    const std::uint64_t a0 = isqrt(d);
    require(a0 * a0 != d, "sqrt continued fraction needs a non-square d, got " + std::to_string(d));

    ContinuedFraction cf{d, a0, {}};
    std::uint64_t m = 0;
    std::uint64_t den = 1;
    std::uint64_t a = a0;
    do {
        m = den * a - m;
        den = (d - m * m) / den;
        a = (a0 + m) / den;
        cf.period.push_back(a);
    } while (a != 2 * a0);
    return cf;
}

namespace {

// Complete quotients omega_k = (P_k + sqrt D)/Q_k of omega_0 = (P0 + sqrt D)/2,
// where P0 = D mod 2 so that omega_0 generates the maximal order:
// (1 + sqrt d)/2 for d = 1 (mod 4), sqrt(d/4) for d = 0 (mod 4).
class UnitExpansion {
public:
    explicit UnitExpansion(std::uint64_t D)
        : D_(static_cast<std::int64_t>(D)), s_(static_cast<std::int64_t>(isqrt(D))), P_(D_ % 2), Q_(2)
    {
    }

    // Advances omega_k -> omega_{k+1}; returns the partial quotient a_k.
    std::int64_t step()
    {
        if (Q_ <= 0)
            throw internal_error("non-positive Q in unit expansion");
        const std::int64_t a = (P_ + s_) / Q_;
        const std::int64_t P = a * Q_ - P_;
        const std::int64_t num = D_ - P * P;
        if (num % Q_ != 0)
            throw internal_error("non-integral Q in unit expansion");
        Q_ = num / Q_;
        P_ = P;
        ++steps_;
        return a;
    }

    // omega_k differs from omega_0 by an integer: the first such k >= 1 closes
    // the fundamental unit.
    bool returned() const noexcept { return steps_ > 0 && Q_ == 2 && ((P_ - D_) % 2 == 0); }

    std::int64_t P() const noexcept { return P_; }
    std::int64_t Q() const noexcept { return Q_; }
    std::uint64_t steps() const noexcept { return steps_; }
    double omega(double sqrtD) const noexcept { return (static_cast<double>(P_) + sqrtD) / static_cast<double>(Q_); }

private:
    std::int64_t D_;
    std::int64_t s_;
    std::int64_t P_;
    std::int64_t Q_;
    std::uint64_t steps_ = 0;
};

double log_big(const BigInt& n)
{
    if (n <= 0)
        throw internal_error("log of non-positive integer");
    const auto bits = static_cast<long>(boost::multiprecision::msb(n)) + 1;
    if (bits <= 1000)
        return std::log(n.convert_to<double>());
    const long shift = bits - 64;
    const BigInt top = n >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

// log((v + sqrt(v^2 - 4))/2) = acosh(v/2).
double log_eta_from_v(const BigInt& v)
{
    if (v < BigInt(1) << 52)
        return std::acosh(v.convert_to<double>() / 2.0);
    // log v + log((1 + sqrt(1 - 4/v^2))/2) and the correction is below 2^-104
    return log_big(v);
}

} // namespace

FundamentalUnit fundamental_unit(Discriminant disc)
{
    const std::uint64_t d = disc.value();
    const double sqrtD = std::sqrt(static_cast<double>(d));
    UnitExpansion exp(d);

    // eps = prod_{j=1}^{k+1} omega_j, tracked as mantissa * 2^exponent.
    double mantissa = 1.0;
    long exponent = 0;
    do {
        exp.step();
        mantissa *= exp.omega(sqrtD);
        if (mantissa > 0x1p500) {
            int e = 0;
            mantissa = std::frexp(mantissa, &e);
            exponent += e;
        }
    } while (!exp.returned());

    FundamentalUnit unit;
    unit.log_eps = std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
    unit.norm = exp.steps() % 2 == 1 ? -1 : 1;
    unit.expansion_length = exp.steps();
    return unit;
}

double regulator_log(Discriminant disc)
{
    const FundamentalUnit unit = fundamental_unit(disc);
    return unit.norm < 0 ? 2.0 * unit.log_eps : unit.log_eps;
}

PellSolution pell4_min_solution(Discriminant disc)
{
    const std::uint64_t d = disc.value();
    UnitExpansion exp(d);

    // q_k from the convergent recurrence; eps = q_k omega_{k+1} + q_{k-1}.
    BigInt q_prev = 0;
    BigInt q = 1;
    exp.step(); // a_0 gives q_0 = 1
    while (!exp.returned()) {
        const std::int64_t a = exp.step();
        BigInt next = a * q + q_prev;
        q_prev = std::move(q);
        q = std::move(next);
    }
    const BigInt x = q * exp.P() + 2 * q_prev;
    const BigInt& y = q;
    const BigInt D = d;
    const int norm = exp.steps() % 2 == 1 ? -1 : 1;
    if (x * x - D * y * y != 4 * norm)
        throw internal_error("unit norm check failed for d=" + std::to_string(d));

    PellSolution sol;
    sol.d = d;
    if (norm < 0) {
        sol.v0 = (x * x + D * y * y) / 2;
        sol.u0 = x * y;
    } else {
        sol.v0 = x;
        sol.u0 = y;
    }
    if (sol.v0 * sol.v0 - D * sol.u0 * sol.u0 != 4)
        throw internal_error("Pell identity failed for d=" + std::to_string(d));
    sol.eta_log = log_eta_from_v(sol.v0);
    return sol;
}

bool is_reduced(const QuadForm& f, std::uint64_t D) noexcept
{
    const auto sD = static_cast<std::int64_t>(D);
    if (f.b * f.b - 4 * f.a * f.c != sD)
        return false;
    const auto s = static_cast<std::int64_t>(isqrt(D));
    if (s * s == sD || f.b <= 0 || f.b > s)
        return false;
    const std::int64_t a2 = 2 * (f.a < 0 ? -f.a : f.a);
    // sqrt D - 2|a| < b  and  2|a| - b < sqrt D, with sqrt D irrational
    return f.b + a2 >= s + 1 && a2 - f.b <= s;
}

namespace {

const std::vector<std::uint32_t>& small_primes()
{
    static const std::vector<std::uint32_t> primes = [] {
        constexpr std::uint32_t limit = 1u << 16;
        std::vector<bool> composite(limit + 1, false);
        std::vector<std::uint32_t> out;
        for (std::uint32_t p = 2; p <= limit; ++p) {
            if (composite[p])
                continue;
            out.push_back(p);
            for (std::uint64_t k = std::uint64_t{p} * p; k <= limit; k += p)
                composite[k] = true;
        }
        return out;
    }();
    return primes;
}

// Divisors of n (n < 2^32) that lie in [lo, hi].
void divisors_in(std::uint64_t n, std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& out)
{
    out.clear();
    out.push_back(1);
    std::uint64_t m = n;
    for (const std::uint32_t p : small_primes()) {
        if (std::uint64_t{p} * p > m)
            break;
        if (m % p != 0)
            continue;
        const std::size_t base = out.size();
        std::uint64_t pk = 1;
        while (m % p == 0) {
            m /= p;
            pk *= p;
            for (std::size_t i = 0; i < base; ++i)
                out.push_back(out[i] * pk);
        }
    }
    if (m > 1) {
        const std::size_t base = out.size();
        for (std::size_t i = 0; i < base; ++i)
            out.push_back(out[i] * m);
    }
    std::erase_if(out, [&](std::uint64_t a) { return a < lo || a > hi; });
}

} // namespace

std::vector<QuadForm> reduced_forms(std::uint64_t D)
{
    const auto s = static_cast<std::int64_t>(isqrt(D));
    require(static_cast<std::uint64_t>(s * s) != D, "reduced forms need a non-square discriminant");
    require(D % 4 == 0 || D % 4 == 1, "discriminant must be 0 or 1 mod 4");
    require(D < (std::uint64_t{1} << 34), "discriminant too large for form enumeration");

    std::vector<QuadForm> forms;
    std::vector<std::uint64_t> divs;
    const auto sD = static_cast<std::int64_t>(D);
    for (std::int64_t b = (D % 2 == 1) ? 1 : 2; b <= s; b += 2) {
        const std::int64_t N = (sD - b * b) / 4; // a c = -N
        // b + 2a >= s + 1 and 2a - b <= s
        const std::int64_t lo = std::max<std::int64_t>(1, (s + 2 - b) / 2);
        const std::int64_t hi = (s + b) / 2;
        if (lo > hi)
            continue;
        auto emit = [&](std::int64_t a) {
            const std::int64_t c = N / a;
            forms.push_back({a, b, -c});
            forms.push_back({-a, b, c});
        };
        if (hi - lo <= 256) {
            for (std::int64_t a = lo; a <= hi; ++a)
                if (N % a == 0)
                    emit(a);
        } else {
            divisors_in(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(lo),
                        static_cast<std::uint64_t>(hi), divs);
            for (const std::uint64_t a : divs)
                emit(static_cast<std::int64_t>(a));
        }
    }
    std::sort(forms.begin(), forms.end());
    return forms;
}

QuadForm rho(const QuadForm& f, std::uint64_t D)
{
    require(f.c != 0, "rho needs c != 0");
    const auto s = static_cast<std::int64_t>(isqrt(D));
    const std::int64_t m = 2 * (f.c < 0 ? -f.c : f.c);
    // largest b' <= s with b' = -b (mod 2|c|)
    const std::int64_t r = ((s + f.b) % m + m) % m;
    const std::int64_t b = s - r;
    const std::int64_t num = b * b - static_cast<std::int64_t>(D);
    return {f.c, b, num / (4 * f.c)};
}

FormClassData narrow_class_number(Discriminant disc)
{
    const std::uint64_t d = disc.value();
    require(d >= 5 && d <= max_class_number_discriminant,
            "narrow_class_number supports 5 <= d <= 1e9, got " + std::to_string(d));

    const std::vector<QuadForm> forms = reduced_forms(d);
    std::vector<bool> seen(forms.size(), false);
    FormClassData data;
    data.d = d;
    data.reduced_form_count = forms.size();

    auto index_of = [&](const QuadForm& f) {
        const auto it = std::lower_bound(forms.begin(), forms.end(), f);
        if (it == forms.end() || *it != f)
            throw internal_error("rho left the set of reduced forms for d=" + std::to_string(d));
        return static_cast<std::size_t>(it - forms.begin());
    };

    for (std::size_t start = 0; start < forms.size(); ++start) {
        if (seen[start])
            continue;
        // forms are sorted, so the first unseen member is the cycle minimum
        data.representatives.push_back(forms[start]);
        std::size_t i = start;
        do {
            seen[i] = true;
            i = index_of(rho(forms[i], d));
        } while (i != start);
        ++data.h_plus;
    }
    if (data.h_plus == 0)
        throw internal_error("no reduced forms for d=" + std::to_string(d));
    return data;
}

double h_log_eta(Discriminant disc)
{
    return static_cast<double>(narrow_class_number(disc).h_plus) * regulator_log(disc);
}

} // namespace siegel
