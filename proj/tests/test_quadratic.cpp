#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "siegel/characters.hpp"
#include "siegel/errors.hpp"
#include "siegel/quadratic.hpp"

using namespace siegel;
using Float = boost::multiprecision::cpp_bin_float_50;
using Float100 = boost::multiprecision::cpp_bin_float_100;

namespace {

// Partial quotients of sqrt(d) by floor/reciprocal iteration at 100 digits.
std::vector<std::uint64_t> float_cf(std::uint64_t d, std::size_t terms)
{
    Float100 x = sqrt(Float100(d));
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < terms; ++i) {
        const Float100 a = floor(x);
        out.push_back(a.convert_to<std::uint64_t>());
        x = 1 / (x - a);
    }
    return out;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> brute_pell(std::uint64_t d, std::uint64_t u_max)
{
    for (std::uint64_t u = 1; u <= u_max; ++u) {
        const auto x = d * u * u + 4;
        const auto v = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(x))));
        for (std::uint64_t w = v > 0 ? v - 1 : 0; w <= v + 1; ++w)
            if (w * w == x)
                return std::pair{u, w};
    }
    return std::nullopt;
}

struct Form {
    std::int64_t a, b, c;
    auto operator<=>(const Form&) const = default;
};

std::int64_t floor_sqrt(std::int64_t D)
{
    std::int64_t s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(D)));
    while (s * s > D)
        --s;
    while ((s + 1) * (s + 1) <= D)
        ++s;
    return s;
}

// |sqrt D - 2|a|| < b < sqrt D for non-square D.
bool reduced_oracle(const Form& f, std::int64_t D)
{
    if (f.b <= 0 || f.b * f.b >= D)
        return false;
    const std::int64_t A2 = 2 * std::abs(f.a);
    const bool upper = (A2 + f.b) * (A2 + f.b) > D;
    const bool lower = A2 <= f.b || (A2 - f.b) * (A2 - f.b) < D;
    return upper && lower;
}

std::vector<Form> enumerate_reduced(std::int64_t D)
{
    const std::int64_t s = floor_sqrt(D);
    std::vector<Form> out;
    for (std::int64_t a = -s; a <= s; ++a) {
        if (a == 0)
            continue;
        for (std::int64_t b = 1; b <= s; ++b) {
            const std::int64_t num = b * b - D;
            if (num % (4 * a) != 0)
                continue;
            const Form f{a, b, num / (4 * a)};
            if (reduced_oracle(f, D))
                out.push_back(f);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Form rho_oracle(const Form& f, std::int64_t D)
{
    const std::int64_t s = floor_sqrt(D);
    const std::int64_t m = 2 * std::abs(f.c);
    for (std::int64_t bp = s + 1 - m; bp <= s; ++bp)
        if (((bp + f.b) % m + m) % m == 0)
            return {f.c, bp, (bp * bp - D) / (4 * f.c)};
    FAIL("no rho image");
    return f;
}

std::uint64_t cycle_count_oracle(std::int64_t D)
{
    const auto forms = enumerate_reduced(D);
    std::set<Form> seen;
    std::uint64_t cycles = 0;
    for (const auto& f : forms) {
        if (seen.count(f))
            continue;
        ++cycles;
        Form g = f;
        do {
            seen.insert(g);
            g = rho_oracle(g, D);
        } while (!(g == f));
    }
    return cycles;
}

double big_log_eta(const PellSolution& s)
{
    const Float v(s.v0), u(s.u0);
    return static_cast<double>(log((v + u * sqrt(Float(s.d))) / 2));
}

} // namespace

TEST_SUITE("quadratic")
{
    TEST_CASE("continued fraction examples")
    {
        const auto c5 = sqrt_continued_fraction(5);
        CHECK(c5.a0 == 2);
        CHECK(c5.period == std::vector<std::uint64_t>{4});
        const auto c8 = sqrt_continued_fraction(8);
        CHECK(c8.a0 == 2);
        CHECK(c8.period == std::vector<std::uint64_t>{1, 4});
        const auto c13 = sqrt_continued_fraction(13);
        CHECK(c13.a0 == 3);
        CHECK(c13.period == std::vector<std::uint64_t>{1, 1, 1, 1, 6});

        for (std::uint64_t d : {5u, 8u, 13u, 12u, 40u, 61u, 94u}) {
            const auto cf = sqrt_continued_fraction(d);
            const auto ref = float_cf(d, 1 + cf.period.size());
            CHECK(ref[0] == cf.a0);
            CHECK(std::vector<std::uint64_t>(ref.begin() + 1, ref.end()) == cf.period);
        }
        CHECK_THROWS_AS(sqrt_continued_fraction(49), precondition_error);
    }

    TEST_CASE("continued fraction periods are palindromic and end in 2 a0")
    {
        for (std::uint64_t d : fundamental_discriminants(5, 10000)) {
            const auto cf = sqrt_continued_fraction(d);
            const auto& p = cf.period;
            REQUIRE(!p.empty());
            REQUIRE(p.back() == 2 * cf.a0);
            for (std::size_t i = 0; i + 1 < p.size(); ++i)
                REQUIRE(p[i] == p[p.size() - 2 - i]);
        }
    }

    TEST_CASE("convergents satisfy the Pell recurrences")
    {
        for (std::uint64_t d : {13u, 61u, 94u, 601u}) {
            const auto cf = sqrt_continued_fraction(d);
            BigInt p0 = 1, p1 = cf.a0, q0 = 0, q1 = 1;
            for (int rep = 0; rep < 2; ++rep)
                for (const auto a : cf.period) {
                    // p1^2 - d q1^2 = (-1)^(k+1) Q_{k+1}, bounded by 2 sqrt d
                    const BigInt n = p1 * p1 - BigInt(d) * q1 * q1;
                    CHECK(abs(n) < 2 * static_cast<long>(std::sqrt(d)) + 2);
                    const BigInt p2 = a * p1 + p0, q2 = a * q1 + q0;
                    p0 = p1;
                    p1 = p2;
                    q0 = q1;
                    q1 = q2;
                }
        }
    }

    TEST_CASE("Pell examples match the brute-force scan")
    {
        const std::map<std::uint64_t, std::pair<int, int>> expect{{5, {3, 1}}, {8, {6, 2}}, {13, {11, 3}}};
        for (const auto& [d, vu] : expect) {
            const auto s = pell4_min_solution(Discriminant(d));
            CHECK(s.v0 == vu.first);
            CHECK(s.u0 == vu.second);
            const auto b = brute_pell(d, 100);
            REQUIRE(b);
            CHECK(s.u0 == b->first);
            CHECK(s.v0 == b->second);
        }
    }

    TEST_CASE("Pell solutions are exact and minimal")
    {
        constexpr std::uint64_t scan = 100'000;
        std::size_t full = 0, partial = 0;
        for (std::uint64_t d : fundamental_discriminants(5, 10000)) {
            const auto s = pell4_min_solution(Discriminant(d));
            REQUIRE(s.v0 * s.v0 - BigInt(d) * s.u0 * s.u0 == 4);
            REQUIRE(s.u0 > 0);
            REQUIRE(s.eta_log > 0);
            const bool small = s.u0 <= scan;
            const auto b = brute_pell(d, small ? s.u0.convert_to<std::uint64_t>() : scan);
            if (small) {
                REQUIRE(b);
                REQUIRE(b->first == s.u0);
                ++full;
            } else {
                REQUIRE_FALSE(b);
                ++partial;
            }
        }
        MESSAGE("minimality fully scanned for " << full << " d, scanned to u=1e5 for " << partial);
        CHECK(full > 0);
    }

    TEST_CASE("eta_log matches the big-integer logarithm")
    {
        for (std::uint64_t d : fundamental_discriminants(5, 20000)) {
            const auto s = pell4_min_solution(Discriminant(d));
            const double ref = big_log_eta(s);
            REQUIRE(s.eta_log == doctest::Approx(ref).epsilon(1e-12));
            // v0 > u0 sqrt d
            REQUIRE(s.eta_log >= std::log(s.u0.convert_to<double>() * std::sqrt(double(d))) - std::log(2.0));
        }
    }

    TEST_CASE("regulator examples")
    {
        CHECK(regulator_log(Discriminant(5)) == doctest::Approx(std::log((3 + std::sqrt(5.0)) / 2)).epsilon(1e-14));
        CHECK(regulator_log(Discriminant(8)) == doctest::Approx(std::log(3 + 2 * std::sqrt(2.0))).epsilon(1e-14));
        CHECK(regulator_log(Discriminant(12)) == doctest::Approx(std::log(2 + std::sqrt(3.0))).epsilon(1e-14));
        CHECK(regulator_log(Discriminant(5)) == doctest::Approx(0.962424).epsilon(1e-6));
        CHECK(regulator_log(Discriminant(8)) == doctest::Approx(1.762747).epsilon(1e-6));
        CHECK(regulator_log(Discriminant(12)) == doctest::Approx(1.316958).epsilon(1e-6));
    }

    TEST_CASE("regulator agrees with the exact Pell route")
    {
        std::vector<std::uint64_t> ds = fundamental_discriminants(5, 20000);
        for (std::uint64_t d : fundamental_discriminants(999'000, 1'000'000))
            ds.push_back(d);
        for (std::uint64_t d : ds) {
            const Discriminant disc(d);
            REQUIRE_MESSAGE(regulator_log(disc) == doctest::Approx(big_log_eta(pell4_min_solution(disc))).epsilon(1e-11),
                            "d=" << d);
        }
    }

    TEST_CASE("fundamental unit norm")
    {
        CHECK(fundamental_unit(Discriminant(5)).norm == -1);
        CHECK(fundamental_unit(Discriminant(13)).norm == -1);
        CHECK(fundamental_unit(Discriminant(12)).norm == 1);
        CHECK(fundamental_unit(Discriminant(8)).norm == -1);
        CHECK(fundamental_unit(Discriminant(5)).log_eps == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)));
    }

    TEST_CASE("class number examples")
    {
        CHECK(narrow_class_number(Discriminant(5)).h_plus == 1);
        CHECK(narrow_class_number(Discriminant(12)).h_plus == 2);
        CHECK(narrow_class_number(Discriminant(40)).h_plus == 2);
        for (std::uint64_t d : {5, 12, 40})
            CHECK(narrow_class_number(Discriminant(d)).h_plus == cycle_count_oracle(d));
    }

    TEST_CASE("reduced forms and cycles agree with exhaustive enumeration")
    {
        for (std::uint64_t d : fundamental_discriminants(5, 3000)) {
            const auto D = static_cast<std::int64_t>(d);
            const auto mine = reduced_forms(d);
            const auto ref = enumerate_reduced(D);
            REQUIRE(mine.size() == ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) {
                REQUIRE(mine[i].a == ref[i].a);
                REQUIRE(mine[i].b == ref[i].b);
                REQUIRE(mine[i].c == ref[i].c);
                REQUIRE(is_reduced(mine[i], d));
                REQUIRE(mine[i].b * mine[i].b - 4 * mine[i].a * mine[i].c == D);
                const QuadForm r = rho(mine[i], d);
                const Form o = rho_oracle(ref[i], D);
                REQUIRE(r.a == o.a);
                REQUIRE(r.b == o.b);
                REQUIRE(r.c == o.c);
            }
            const auto data = narrow_class_number(Discriminant(d));
            REQUIRE_MESSAGE(data.h_plus == cycle_count_oracle(D), "d=" << d);
            REQUIRE(data.h_plus >= 1);
            REQUIRE(data.reduced_form_count == ref.size());
            REQUIRE(data.representatives.size() == data.h_plus);
        }
    }

    TEST_CASE("class number range guard")
    {
        std::uint64_t d = 1'000'000'001;
        while (!is_fundamental_discriminant(d))
            ++d;
        CHECK_THROWS_AS(narrow_class_number(Discriminant(d)), precondition_error);
        CHECK_NOTHROW(narrow_class_number(Discriminant(999'999'997)));
    }

    TEST_CASE("h log eta examples")
    {
        CHECK(h_log_eta(Discriminant(5)) == doctest::Approx(0.962424).epsilon(1e-6));
        CHECK(h_log_eta(Discriminant(12)) == doctest::Approx(2 * std::log(2 + std::sqrt(3.0))).epsilon(1e-14));
        CHECK(h_log_eta(Discriminant(12)) == doctest::Approx(2.633916).epsilon(1e-6));
        const auto ds = fundamental_discriminants(400'000, 400'200);
        REQUIRE(!ds.empty());
        for (std::uint64_t d : ds)
            CHECK(h_log_eta(Discriminant(d)) > 79.2177);
    }

    TEST_CASE("class number formula holds for d <= 2000")
    {
        for (std::uint64_t d : fundamental_discriminants(5, 2000)) {
            const Discriminant disc(d);
            REQUIRE_MESSAGE(std::abs(h_log_eta(disc) - disc.sqrt() * l_one_exact(disc)) <= 1e-6 * disc.sqrt(),
                            "d=" << d);
        }
    }
}
