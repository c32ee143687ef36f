#include "siegel/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "siegel/characters.hpp"
#include "siegel/errors.hpp"
#include "siegel/parallel.hpp"

namespace siegel {

// ---------------------------------------------------------------- kernel --

KernelFunction::KernelFunction(double sigma) : sigma_(sigma)
{
    require(sigma >= 0.75 && sigma <= 1.0, "kernel sigma must lie in [0.75, 1]");
}

double KernelFunction::operator()(double n) const
{
    require(n >= 2, "kernel f(n) needs n >= 2");
    return at_log(std::log(n));
}

double KernelFunction::at_log(double log_n) const noexcept
{
    return log_n * std::exp(-sigma_ * log_n);
}

long double KernelFunction::second_difference(std::uint64_t n) const noexcept
{
    auto f = [s = static_cast<long double>(sigma_)](std::uint64_t m) {
        const long double ln = std::log(static_cast<long double>(m));
        return ln * std::exp(-s * ln);
    };
    return f(n) - 2 * f(n + 1) + f(n + 2);
}

std::uint64_t KernelFunction::convex_from() const noexcept
{
    // f''(x) >= 0 iff log x >= (2s+1)/(s(s+1)); a_n is an average of f'' over
    // [n, n+2], so only n below that point need an explicit check.
    const double s = sigma_;
    const auto x_star = static_cast<std::uint64_t>(std::ceil(std::exp((2 * s + 1) / (s * (s + 1)))));
    for (std::uint64_t n = std::max<std::uint64_t>(x_star, 5); n-- > 4;)
        if (second_difference(n) < 0)
            return n + 1;
    return 4;
}

// ------------------------------------------------------------- conductor --

namespace {

constexpr double exact_A_max_log_q = 2 * 52 * 0.6931471805599453;

} // namespace

Conductor Conductor::from_integer(std::uint64_t q)
{
    require(q >= 1, "conductor must be positive");
    const std::uint64_t s = isqrt(q);
    std::optional<std::uint64_t> A;
    double log_A = -std::numeric_limits<double>::infinity();
    if (s >= 2) {
        A = s - 1;
        log_A = std::log(static_cast<double>(*A));
    }
    Conductor c(std::log(static_cast<double>(q)), A, log_A);
    c.exact_q_ = q;
    return c;
}

Conductor Conductor::from_log(double log_q)
{
    require(std::isfinite(log_q) && log_q >= 0, "log q must be finite and non-negative");
    if (log_q <= exact_A_max_log_q) {
        const double s = std::floor(std::sqrt(std::exp(log_q)));
        std::optional<std::uint64_t> A;
        double log_A = -std::numeric_limits<double>::infinity();
        if (s >= 2) {
            A = static_cast<std::uint64_t>(s) - 1;
            log_A = std::log(static_cast<double>(*A));
        }
        return Conductor(log_q, A, log_A);
    }
    const double half = 0.5 * log_q;
    return Conductor(log_q, std::nullopt, half + std::log1p(-2.0 * std::exp(-half)));
}

double Conductor::sqrt_q() const noexcept
{
    return std::exp(0.5 * log_q_);
}

// ------------------------------------------------------------- Theorem L --

namespace {

// Terms of Theorem L after the main sum:
//   -(A/2)f(A) + (A/2)(f(A) - f(A+1)) + f(A+1)/2
//   + (theta/2)[(A+1)(f(A+1) - f(A+2)) + f(A+2)] + 18f(4) - 12f(5).
// f(A+j) and the differences are formed from log A so nothing cancels
// catastrophically when A is astronomically large.
double boundary_block(double log_A, double sigma, double theta)
{
    const double inv_A = std::exp(-log_A);

    // L_j = log(A + j)
    auto L = [&](int j) { return log_A + std::log1p(j * inv_A); };
    auto f = [&](double Lj) { return Lj * std::exp(-sigma * Lj); };
    // (A+j) f(A+j) = L_j (A+j)^{1-sigma}
    auto nf = [&](double Lj) { return Lj * std::exp((1 - sigma) * Lj); };
    // 1 - f(A+j+1)/f(A+j)
    auto drop = [&](int j, double Lj) {
        const double step = std::log1p(inv_A / (1 + j * inv_A)); // L_{j+1} - L_j
        return -std::expm1(std::log1p(step / Lj) - sigma * step);
    };

    const double L0 = L(0);
    const double L1 = L(1);
    const double L2 = L(2);

    const double t1 = -0.5 * nf(L0);
    const double t2 = 0.5 * nf(L0) * drop(0, L0);
    const double t3 = 0.5 * f(L1);
    const double t4 = 0.5 * theta * (nf(L1) * drop(1, L1) + f(L2));
    const KernelFunction k(sigma);
    const double t5 = 18 * k.at_log(std::log(4.0)) - 12 * k.at_log(std::log(5.0));

    CompensatedSum<double> sum;
    for (double t : {t1, t2, t3, t4, t5})
        sum.add(t);
    return sum.value();
}

double head_terms(double sigma)
{
    const KernelFunction k(sigma);
    return k.at_log(std::log(2.0)) + k.at_log(std::log(3.0));
}

double psc_100()
{
    static const double value = partial_sum_constant(100);
    return value;
}

void require_anchor(const Conductor& q)
{
    require(!q.A() || *q.A() >= 5, "Theorem L needs A = floor(sqrt q) - 1 >= 5 (q >= 36)");
}

} // namespace

TheoremLBound theorem_L_rhs(const Conductor& q, const KernelFunction& k, double theta)
{
    require_anchor(q);
    require(theta >= 0 && theta <= 1, "theta must lie in [0, 1]");

    TheoremLBound out;
    out.log_q = q.log_q();
    out.A = q.A();
    out.theta = theta;
    out.sigma = k.sigma();
    out.hypothesis_holds = k.convex_from() == 4;

    if (q.A() && q.log_q() <= direct_sum_max_log_q + 1e-12) {
        CompensatedSum<double> main;
        for (std::uint64_t n = 4; n <= *q.A(); ++n)
            main.add(k.at_log(std::log(static_cast<double>(n))));
        out.main_sum = main.value();
    } else {
        // sum_{n=4}^{A} f(n) <= A^{1-sigma} sum_{n<=A} log n / n
        //                   <= A^{1-sigma} (1/2 log^2 A + partial_sum_constant(100))
        const double lA = q.log_A();
        out.main_sum = std::exp((1 - k.sigma()) * lA) * (0.5 * lA * lA + psc_100());
        out.main_is_majorant = true;
    }
    out.boundary = boundary_block(q.log_A(), k.sigma(), theta);
    out.value = out.main_sum + out.boundary;
    if (!(out.value >= 0))
        throw internal_error("Theorem L right side is negative");
    return out;
}

double remainder_R(const Conductor& q, const KernelFunction& k, HeadTerms head)
{
    require_anchor(q);
    double r = boundary_block(q.log_A(), k.sigma(), 1.0);
    if (head == HeadTerms::include)
        r += head_terms(k.sigma());
    return r;
}

double partial_sum_constant(std::uint64_t d_cut)
{
    require(d_cut >= 2, "partial_sum_constant needs d >= 2");
    CompensatedSum<double> sum;
    for (std::uint64_t n = 2; n <= d_cut; ++n) {
        const double ln = std::log(static_cast<double>(n));
        sum.add(ln / static_cast<double>(n));
    }
    const double ld = std::log(static_cast<double>(d_cut));
    sum.add(-0.5 * ld * ld);
    return sum.value();
}

// ------------------------------------------------------------ |L'| bound --

namespace {

const double log_min_bound_q = std::log(min_bound_q);
const double log_range_7_max_q = std::log(range_7_max_q);

void require_bound_domain(const Conductor& q, double c)
{
    require(q.log_q() >= log_min_bound_q - 1e-12, "bounds need q >= 4e5");
    require(c >= min_c && c <= max_c, "c must lie in [100, 1000]");
}

} // namespace

LPrimeUpper l_prime_upper(const Conductor& q, double c, HeadTerms head)
{
    require_bound_domain(q, c);
    const double L = q.log_q();
    LPrimeUpper out;
    out.one_minus_beta0 = c * std::exp(-0.5 * L) / (L * L);
    // q^{(1-beta0)/2} at the extreme beta0
    out.main = std::exp(0.5 * out.one_minus_beta0 * L) * L * L / 8;

    out.remainder = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= sigma_grid_intervals; ++i) {
        const double sigma =
            1.0 - out.one_minus_beta0 * (1.0 - static_cast<double>(i) / sigma_grid_intervals);
        const double r = remainder_R(q, KernelFunction(sigma), head);
        if (r > out.remainder) {
            out.remainder = r;
            out.sigma_at_max = sigma;
        }
    }
    out.value = out.main + out.remainder;
    return out;
}

const char* to_string(LowerBranch b) noexcept
{
    switch (b) {
    case LowerBranch::range_7: return "RANGE_7";
    case LowerBranch::range_412: return "RANGE_412";
    case LowerBranch::range_8: return "RANGE_8";
    }
    return "?";
}

LOneLower l_one_lower(const Conductor& q)
{
    require(q.log_q() >= log_min_bound_q - 1e-12, "L(1) lower bound needs q >= 4e5");
    LOneLower out;
    const bool small = q.exact_q() ? *q.exact_q() <= static_cast<std::uint64_t>(range_7_max_q)
                                   : q.log_q() <= log_range_7_max_q + 1e-13;
    if (small) {
        out.scaled = range_7_constant;
        out.branch = LowerBranch::range_7;
    } else {
        // min(412 from the search, 1/2 log 7.5e10 >= 12.52 beyond it)
        out.scaled = std::min(range_412_constant, range_8_constant);
        out.branch = out.scaled == range_8_constant ? LowerBranch::range_8 : LowerBranch::range_412;
    }
    out.value = out.scaled * std::exp(-0.5 * q.log_q());
    return out;
}

Admissibility admissibility(const Conductor& q, double c, HeadTerms head)
{
    require_bound_domain(q, c);
    const LPrimeUpper up = l_prime_upper(q, c, head);
    const LOneLower low = l_one_lower(q);
    const double L = q.log_q();

    // c/(sqrt q log^2 q) <= L1/|L'|, multiplied through by sqrt q log^2 q |L'|
    Admissibility out;
    out.log_q = L;
    out.c = c;
    out.lhs = c * up.value;
    out.rhs = low.scaled * L * L;
    out.margin = out.rhs / out.lhs - 1;
    out.verdict = check_leq(out.lhs, out.rhs);
    out.branch = low.branch;
    return out;
}

BoundReport beta0_upper(const Conductor& q, double c, HeadTerms head)
{
    const Admissibility adm = admissibility(q, c, head);
    if (adm.verdict != Verdict::pass)
        throw inadmissible_error("c = " + std::to_string(c) + " is not admissible at log q = " +
                                 std::to_string(q.log_q()) + " (" + to_string(adm.verdict) + ")");
    const LPrimeUpper up = l_prime_upper(q, c, head);
    const LOneLower low = l_one_lower(q);
    BoundReport r;
    r.log_q = q.log_q();
    r.c = c;
    r.l_prime_upper = up.value;
    r.l_one_lower = low.value;
    r.one_minus_beta0 = up.one_minus_beta0;
    r.beta0_upper = 1.0 - up.one_minus_beta0;
    r.branch = low.branch;
    r.margin = adm.margin;
    return r;
}

// ---------------------------------------------------------------- c table --

std::vector<double> log_grid(const QRange& range, std::size_t intervals)
{
    require(intervals >= 1, "grid needs at least one interval");
    require(range.log_hi > range.log_lo, "empty q range");
    const double lo = range.lo_open ? range.log_lo + open_end_nudge : range.log_lo;
    std::vector<double> grid(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        grid[i] = lo + (range.log_hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
    grid.back() = range.log_hi;
    return grid;
}

namespace {

void require_table_range(const QRange& range)
{
    require(range.log_lo >= log_min_bound_q - 1e-12, "range must start at q >= 4e5");
    require(range.log_hi <= std::log(10.0) * 100 + 1e-9, "range must end at q <= 1e100");
    require(range.log_lo < range.log_hi, "range must be non-empty");
}

bool admissible_on(const std::vector<Conductor>& grid, int c, HeadTerms head)
{
    return std::all_of(grid.begin(), grid.end(), [&](const Conductor& q) {
        return admissibility(q, c, head).verdict == Verdict::pass;
    });
}

std::vector<Conductor> conductors(const QRange& range, std::size_t intervals)
{
    std::vector<Conductor> out;
    for (double lq : log_grid(range, intervals))
        out.push_back(Conductor::from_log(lq));
    return out;
}

} // namespace

int solve_c(const QRange& range, std::size_t grid_points, HeadTerms head)
{
    require_table_range(range);
    require(grid_points >= 1000, "solve_c needs at least 1000 grid intervals");
    const auto grid = conductors(range, grid_points);

    int lo = static_cast<int>(min_c);
    int hi = static_cast<int>(max_c);
    if (!admissible_on(grid, lo, head))
        throw inadmissible_error("no admissible c in [100, 1000] for this range");
    if (admissible_on(grid, hi, head))
        return hi;
    // admissibility is monotone in c: lo passes, hi fails
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (admissible_on(grid, mid, head) ? lo : hi) = mid;
    }
    return lo;
}

const std::vector<CTableRow>& published_c_table()
{
    static const std::vector<CTableRow> rows = [] {
        const double ln10 = std::log(10.0);
        auto lg = [&](double mant, double exp10) { return std::log(mant) + exp10 * ln10; };
        return std::vector<CTableRow>{
            {{lg(4, 5), lg(7, 5), false}, 624, "4e5 <= q <= 7e5"},
            {{lg(7, 5), lg(1, 6), false}, 636, "7e5 <= q <= 1e6"},
            {{lg(1, 6), lg(3, 6), false}, 641, "1e6 <= q <= 3e6"},
            {{lg(3, 6), lg(8, 6), false}, 654, "3e6 <= q <= 8e6"},
            {{lg(8, 6), lg(1, 7), false}, 660, "8e6 <= q <= 1e7"},
            {{lg(1, 7), lg(1, 12), true}, 105, "1e7 < q <= 1e12"},
            {{lg(1, 12), lg(1, 18), true}, 104, "1e12 < q <= 1e18"},
            {{lg(1, 18), lg(1, 26), true}, 103, "1e18 < q <= 1e26"},
            {{lg(1, 26), lg(1, 43), true}, 102, "1e26 < q <= 1e43"},
            {{lg(1, 43), lg(1, 100), true}, 101, "1e43 < q <= 1e100"},
        };
    }();
    return rows;
}

CTableCheck check_c_row(const CTableRow& row, std::size_t grid_points, HeadTerms head)
{
    require_table_range(row.range);
    CTableCheck out;
    out.row = row;
    out.admissible = true;
    out.worst_margin = std::numeric_limits<double>::infinity();
    for (const Conductor& q : conductors(row.range, grid_points)) {
        const Admissibility a = admissibility(q, row.c, head);
        if (a.verdict != Verdict::pass)
            out.admissible = false;
        if (a.margin < out.worst_margin) {
            out.worst_margin = a.margin;
            out.worst_log_q = a.log_q;
        }
    }
    try {
        out.solved_c = solve_c(row.range, grid_points, head);
    } catch (const inadmissible_error&) {
        out.solved_c = 0;
    }
    return out;
}

// ------------------------------------------------------------ verifiers --

Theorem40Report verify_theorem_40(double c, const std::vector<double>& log_q_grid, HeadTerms head)
{
    require(c >= min_c && c <= max_c, "c must lie in [100, 1000]");
    require(!log_q_grid.empty(), "empty grid");
    Theorem40Report report;
    report.c = c;
    report.pass = true;
    for (double lq : log_q_grid) {
        const Conductor q = Conductor::from_log(lq);
        Theorem40Point p;
        p.log_q = lq;
        p.l_prime_upper = l_prime_upper(q, c, head).value;
        p.target = lq * lq / 8;
        p.margin = p.target / p.l_prime_upper - 1;
        p.verdict = check_leq(p.l_prime_upper, p.target);
        report.pass = report.pass && p.verdict == Verdict::pass;
        report.points.push_back(p);
    }
    return report;
}

TheoremLReport verify_theorem_L_empirical(std::uint64_t q_max, const std::vector<double>& sigma_grid,
                                          unsigned workers)
{
    require(q_max <= theorem_L_max_q, "verify_theorem_L_empirical supports q_max <= 1e4");
    require(!sigma_grid.empty(), "empty sigma grid");
    for (double s : sigma_grid)
        require(s >= 0.9 && s < 1.0, "sigma grid must lie in [0.9, 1)");

    constexpr std::uint64_t max_truncation = std::uint64_t{1} << 26;
    const std::vector<std::uint64_t> ds = fundamental_discriminants(1, q_max);
    std::vector<std::vector<TheoremLPoint>> per_d(ds.size());

    parallel_for(ds.size(), workers, [&](std::size_t i) {
        const std::uint64_t d = ds[i];
        const Conductor q = Conductor::from_integer(d);
        const std::uint64_t A = q.A().value_or(0);
        auto& out = per_d[i];
        if (A < 5) {
            for (double s : sigma_grid)
                out.push_back({.d = d, .sigma = s, .A = A, .skipped = true, .lhs = {}, .verdict = Verdict::pass});
            return;
        }
        const QuadChar chi(Discriminant(d), QuadChar::Tables::values_only);
        for (double s : sigma_grid) {
            const KernelFunction k(s);
            const TheoremLBound rhs = theorem_L_rhs(q, k, 1.0);
            TheoremLPoint p;
            p.d = d;
            p.sigma = s;
            p.A = A;
            p.rhs = rhs.value;
            p.hypothesis_holds = rhs.hypothesis_holds;

            LogSeries series(chi, s, 4);
            std::uint64_t N = std::max<std::uint64_t>(4 * d, 4096);
            for (;;) {
                series.extend_to(N);
                p.lhs = series.enclosure().abs();
                p.truncation = N;
                p.verdict = check_leq(p.lhs.hi, p.rhs);
                if (p.verdict == Verdict::pass || N >= max_truncation)
                    break;
                N *= 2;
            }
            out.push_back(p);
        }
    });

    TheoremLReport report;
    for (auto& pts : per_d) {
        for (auto& p : pts) {
            if (p.skipped)
                ++report.skipped;
            else if (++report.checked; p.verdict != Verdict::pass)
                ++report.failures;
            report.points.push_back(p);
        }
    }
    report.pass = report.failures == 0 && report.checked > 0;
    return report;
}

} // namespace siegel
