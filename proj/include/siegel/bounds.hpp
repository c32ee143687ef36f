#pragma once

// Explicit bounds for the exceptional zero of an even real character:
// the Theorem L character-sum bound with kernel f(n) = log n / n^sigma, the
// resulting upper bound for |L'(sigma, chi)|, the lower bound for L(1, chi),
// and the self-consistent constant c in beta0 <= 1 - c/(sqrt q log^2 q).
//
// Conductors up to 10^100 appear, so every q-dependent quantity is taken
// from log q; nothing here forms q itself as a machine number.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "siegel/numeric.hpp"

namespace siegel {

class KernelFunction {
public:
    /// sigma in [0.75, 1]: f is then decreasing on [4, inf) since e^{1/sigma} < 4.
    explicit KernelFunction(double sigma);

    double sigma() const noexcept { return sigma_; }

    /// f(n) for n >= 2.
    double operator()(double n) const;
    double at_log(double log_n) const noexcept;

    /// a_n = f(n) - 2f(n+1) + f(n+2), in extended precision.
    long double second_difference(std::uint64_t n) const noexcept;

    /// Least n0 >= 4 with a_n >= 0 for every n >= n0. Equals 4 exactly when
    /// the convexity hypothesis of Theorem L holds (sigma >= 0.93526...).
    std::uint64_t convex_from() const noexcept;

private:
    double sigma_;
};

inline double kernel_f(double n, const KernelFunction& k) { return k(n); }

/// The conductor q, carried as log q. A = floor(sqrt q) - 1 is exact while
/// sqrt q < 2^52; beyond that A is replaced by sqrt(q) - 2, a lower bound
/// for A (the boundary block of R decreases in A, so this is conservative).
class Conductor {
public:
    static Conductor from_integer(std::uint64_t q);
    static Conductor from_log(double log_q);

    double log_q() const noexcept { return log_q_; }
    double log_A() const noexcept { return log_A_; }
    /// Exact A when representable, nullopt otherwise.
    std::optional<std::uint64_t> A() const noexcept { return A_; }
    /// q itself when built from an integer.
    std::optional<std::uint64_t> exact_q() const noexcept { return exact_q_; }
    /// sqrt(q) as a double (finite for q <= 10^300).
    double sqrt_q() const noexcept;

private:
    Conductor(double log_q, std::optional<std::uint64_t> A, double log_A)
        : log_q_(log_q), A_(A), log_A_(log_A)
    {
    }

    double log_q_;
    std::optional<std::uint64_t> A_;
    double log_A_;
    std::optional<std::uint64_t> exact_q_;
};

enum class HeadTerms {
    exclude, ///< default: the 1/2 log^2 A main-term bound already covers n = 1..A
    include, ///< add f(2) + f(3) on top
};

struct TheoremLBound {
    double log_q = 0;
    std::optional<std::uint64_t> A;
    double theta = 1;
    double sigma = 1;
    double main_sum = 0;        ///< sum_{n=4}^{A} f(n), or its majorant
    double boundary = 0;        ///< everything after the main sum
    double value = 0;           ///< full right side, >= 0
    bool main_is_majorant = false;
    bool hypothesis_holds = true; ///< a_n >= 0 for all n >= 4
};

/// Largest q for which the main sum is summed term by term.
inline constexpr double direct_sum_max_log_q = 27.631021115928547; // log 1e12

TheoremLBound theorem_L_rhs(const Conductor& q, const KernelFunction& k, double theta);

/// The A-dependent boundary block of Theorem L plus 18f(4) - 12f(5), with
/// theta = 1; optionally plus f(2) + f(3).
double remainder_R(const Conductor& q, const KernelFunction& k, HeadTerms head = HeadTerms::exclude);

/// -1/2 log^2 d + sum_{n=2}^{d} log n / n.
double partial_sum_constant(std::uint64_t d_cut);

inline constexpr double min_bound_q = 4e5;
inline constexpr double min_c = 100;
inline constexpr double max_c = 1000;
inline constexpr int sigma_grid_intervals = 64;

struct LPrimeUpper {
    double value = 0;
    double main = 0;          ///< exp(c/(2 sqrt q log q)) log^2 q / 8
    double remainder = 0;     ///< max of R over the sigma grid
    double sigma_at_max = 1;
    double one_minus_beta0 = 0;
};

/// Upper bound for |L'(sigma, chi)| valid for all sigma in (beta0, 1) under
/// the hypothesis beta0 >= 1 - c/(sqrt q log^2 q).
LPrimeUpper l_prime_upper(const Conductor& q, double c, HeadTerms head = HeadTerms::exclude);

enum class LowerBranch {
    range_7,   ///< 4e5 <= q <= 1e7: h log eta > 79.2177
    range_412, ///< q > 1e7 with d u0^2 <= 7.5e10: h log eta > 412
    range_8,   ///< q > 1e7 with d u0^2 >= 7.5e10: h log eta >= 1/2 log 7.5e10 >= 12.52
};

const char* to_string(LowerBranch b) noexcept;

inline constexpr double range_7_constant = 79.2177;
inline constexpr double range_412_constant = 412.0;
inline constexpr double range_8_constant = 12.52;
inline constexpr double search_cap = 7.5e10;
inline constexpr double range_7_max_q = 1e7;

struct LOneLower {
    double scaled = 0;  ///< sqrt(q) * lower bound, i.e. the h log eta constant
    double value = 0;   ///< the lower bound for L(1, chi)
    LowerBranch branch = LowerBranch::range_7;
};

LOneLower l_one_lower(const Conductor& q);

struct Admissibility {
    double log_q = 0;
    double c = 0;
    double lhs = 0;    ///< c * |L'| upper bound
    double rhs = 0;    ///< sqrt(q) L(1) lower bound * log^2 q
    double margin = 0; ///< rhs / lhs - 1
    Verdict verdict = Verdict::fail;
    LowerBranch branch = LowerBranch::range_7;
};

/// c / (sqrt q log^2 q) <= L(1)-lower / |L'|-upper, i.e. the mean value
/// step 1 - beta0 = L(1) / |L'(sigma)| closes under the assumed beta0.
Admissibility admissibility(const Conductor& q, double c, HeadTerms head = HeadTerms::exclude);

struct BoundReport {
    double log_q = 0;
    double c = 0;
    double l_prime_upper = 0;
    double l_one_lower = 0;
    double one_minus_beta0 = 0;
    double beta0_upper = 0;
    LowerBranch branch = LowerBranch::range_7;
    double margin = 0;
};

/// Throws inadmissible_error when the chain does not close.
BoundReport beta0_upper(const Conductor& q, double c, HeadTerms head = HeadTerms::exclude);

struct QRange {
    double log_lo = 0;
    double log_hi = 0;
    bool lo_open = false;
};

inline constexpr std::size_t default_c_grid_points = 1000;

/// An open lower end q > q_lo is sampled at log q_lo + this.
inline constexpr double open_end_nudge = 1e-9;

/// log-spaced grid over the range with `intervals` + 1 points, endpoints
/// included.
std::vector<double> log_grid(const QRange& range, std::size_t intervals);

/// Largest integer c in [100, 1000] admissible at every grid point.
/// Throws inadmissible_error when not even c = 100 is admissible.
int solve_c(const QRange& range, std::size_t grid_points = default_c_grid_points,
            HeadTerms head = HeadTerms::exclude);

struct CTableRow {
    QRange range;
    int c = 0;
    std::string label;
};

/// The ten (range, c) rows: five for 4e5 <= q <= 1e7, five for 1e7 < q <= 1e100.
const std::vector<CTableRow>& published_c_table();

struct CTableCheck {
    CTableRow row;
    bool admissible = false;   ///< row.c passes at every grid point
    double worst_margin = 0;
    double worst_log_q = 0;
    int solved_c = 0;
};

CTableCheck check_c_row(const CTableRow& row, std::size_t grid_points = default_c_grid_points,
                        HeadTerms head = HeadTerms::exclude);

struct Theorem40Point {
    double log_q = 0;
    double l_prime_upper = 0;
    double target = 0; ///< log^2 q / 8
    double margin = 0; ///< target / l_prime_upper - 1
    Verdict verdict = Verdict::fail;
};

struct Theorem40Report {
    double c = 0;
    std::vector<Theorem40Point> points;
    bool pass = false;
};

/// |L'(sigma)| <= log^2 q / 8 on every grid point, with 1e-9 clearance.
Theorem40Report verify_theorem_40(double c, const std::vector<double>& log_q_grid,
                                  HeadTerms head = HeadTerms::exclude);

struct TheoremLPoint {
    std::uint64_t d = 0;
    double sigma = 0;
    std::uint64_t A = 0;
    bool skipped = false;     ///< A < 5
    Interval lhs;             ///< enclosure of |sum_{n>=4} chi(n) f(n)|
    double rhs = 0;
    std::uint64_t truncation = 0;
    bool hypothesis_holds = true;
    Verdict verdict = Verdict::fail;
};

struct TheoremLReport {
    std::vector<TheoremLPoint> points;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t failures = 0;
    bool pass = false;
};

inline constexpr std::uint64_t theorem_L_max_q = 10'000;

/// Checks Theorem L against its own left side for every fundamental d <= q_max.
TheoremLReport verify_theorem_L_empirical(std::uint64_t q_max, const std::vector<double>& sigma_grid,
                                          unsigned workers = 1);

} // namespace siegel
