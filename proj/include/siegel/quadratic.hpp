#pragma once

// Real quadratic fields Q(sqrt d): Pell solutions of v^2 - d u^2 = 4, the
// regulator log eta_d, and the narrow class number h+(d) counted as cycles of
// reduced indefinite binary quadratic forms.

#include <compare>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "siegel/characters.hpp"

namespace siegel {

using BigInt = boost::multiprecision::cpp_int;

/// sqrt(d) = [a0; period...], period repeating forever.
struct ContinuedFraction {
    std::uint64_t d = 0;
    std::uint64_t a0 = 0;
    std::vector<std::uint64_t> period;
};

/// Throws precondition_error for perfect squares.
ContinuedFraction sqrt_continued_fraction(std::uint64_t d);

/// Minimal positive solution of v0^2 - d u0^2 = 4; eta_d = (v0 + u0 sqrt d)/2.
struct PellSolution {
    std::uint64_t d = 0;
    BigInt v0;
    BigInt u0;
    double eta_log = 0;
};

PellSolution pell4_min_solution(Discriminant disc);

/// The fundamental unit eps = (x + y sqrt d)/2 of the maximal order, in
/// logarithmic form. eta_d = eps when norm = +1 and eps^2 when norm = -1.
struct FundamentalUnit {
    double log_eps = 0;
    int norm = 0;
    std::uint64_t expansion_length = 0; // partial quotients to the first return
};

FundamentalUnit fundamental_unit(Discriminant disc);

/// log eta_d without big integers, from the product of complete quotients.
double regulator_log(Discriminant disc);

/// Indefinite binary quadratic form a x^2 + b xy + c y^2.
struct QuadForm {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 0;

    friend auto operator<=>(const QuadForm&, const QuadForm&) = default;
};

/// |sqrt D - 2|a|| < b < sqrt D, checked in exact integer arithmetic.
bool is_reduced(const QuadForm& f, std::uint64_t D) noexcept;

/// All reduced forms of discriminant D, sorted.
std::vector<QuadForm> reduced_forms(std::uint64_t D);

/// Gauss's rho operator: (a, b, c) -> (c, b', (b'^2 - D)/4c) with
/// b' = -b (mod 2|c|) and sqrt D - 2|c| < b' < sqrt D. Properly equivalent.
QuadForm rho(const QuadForm& f, std::uint64_t D);

struct FormClassData {
    std::uint64_t d = 0;
    std::uint64_t h_plus = 0;
    std::uint64_t reduced_form_count = 0;
    std::vector<QuadForm> representatives; // lexicographically least form of each cycle
};

inline constexpr std::uint64_t max_class_number_discriminant = 1'000'000'000;

/// h+(d) as the number of rho-cycles of reduced forms; 5 <= d <= 1e9.
FormClassData narrow_class_number(Discriminant disc);

/// h+(d) * log eta_d, which equals sqrt(d) L(1, chi_d).
double h_log_eta(Discriminant disc);

} // namespace siegel
