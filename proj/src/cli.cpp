#include "siegel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "siegel/bounds.hpp"
#include "siegel/characters.hpp"
#include "siegel/errors.hpp"
#include "siegel/parallel.hpp"
#include "siegel/quadratic.hpp"
#include "siegel/search.hpp"

namespace siegel::cli {

using Json = nlohmann::ordered_json;

namespace {

enum class Format { human, json, csv };

std::string fmt_double(double x, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string scalar_text(const Json& v, int digits)
{
    if (v.is_number_float())
        return fmt_double(v.get<double>(), digits);
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return "";
    return v.dump();
}

std::string csv_escape(std::string s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

// Reports are flat objects with an optional "rows" array of flat objects.
void write_report(const Json& report, Format format, std::ostream& out)
{
    switch (format) {
    case Format::json:
        out << report.dump(2) << '\n';
        return;
    case Format::human: {
        for (const auto& [key, value] : report.items()) {
            if (key == "rows")
                continue;
            out << key << ": " << scalar_text(value, 6) << '\n';
        }
        if (report.contains("rows") && !report["rows"].empty()) {
            const Json& rows = report["rows"];
            bool first = true;
            for (const auto& [key, value] : rows.front().items()) {
                out << (first ? "" : "\t") << key;
                first = false;
            }
            out << '\n';
            for (const auto& row : rows) {
                first = true;
                for (const auto& [key, value] : row.items()) {
                    out << (first ? "" : "\t") << scalar_text(value, 6);
                    first = false;
                }
                out << '\n';
            }
        }
        return;
    }
    case Format::csv: {
        // With rows: one line per row; otherwise a single line of scalars.
        const bool has_rows = report.contains("rows") && !report["rows"].empty();
        Json rows = has_rows ? report["rows"] : Json::array({report});
        bool first = true;
        for (const auto& [key, value] : rows.front().items()) {
            if (key == "rows")
                continue;
            out << (first ? "" : ",") << csv_escape(key);
            first = false;
        }
        out << '\n';
        for (const auto& row : rows) {
            first = true;
            for (const auto& [key, value] : row.items()) {
                if (key == "rows")
                    continue;
                out << (first ? "" : ",") << csv_escape(scalar_text(value, 17));
                first = false;
            }
            out << '\n';
        }
        return;
    }
    }
}

Conductor conductor_from(double q)
{
    require(std::isfinite(q) && q >= 1, "q must be a finite number >= 1");
    if (q <= 9007199254740992.0 && q == std::floor(q))
        return Conductor::from_integer(static_cast<std::uint64_t>(q));
    return Conductor::from_log(std::log(q));
}

QRange range_from(double lo, double hi, bool open_lower)
{
    require(std::isfinite(lo) && std::isfinite(hi) && lo > 0 && hi > lo, "need 0 < from < to");
    return {std::log(lo), std::log(hi), open_lower};
}

Json pass_field(Json report, bool pass)
{
    report["pass"] = pass;
    return report;
}

std::string form_text(const QuadForm& f)
{
    return "(" + std::to_string(f.a) + "," + std::to_string(f.b) + "," + std::to_string(f.c) + ")";
}

Json record_json(const SearchRecord& r)
{
    return Json{{"d", r.d}, {"u0", r.u0}, {"v0", r.v0}, {"h_plus", r.h_plus}, {"h_log_eta", r.h_log_eta}};
}

struct Options {
    std::string format = "human";
    unsigned workers = default_workers();
    std::string head = "exclude";

    std::uint64_t d = 0;
    double sigma = 1.0;
    std::uint64_t N = 1'000'000;

    double from = 0;
    double to = 0;
    double threshold = range_7_constant;
    std::string route = "analytic";
    bool all_rows = false;

    std::uint64_t q_max = 5000;
    std::vector<double> sigmas{0.9, 0.99, 0.999};

    double c = 100;
    std::size_t points = 10'000;
    std::size_t grid = default_c_grid_points;
    double q = 4e5;
    bool open_lower = false;

    SearchTask task{10'000'001, 20'000'000, 1'000'000'000, range_412_constant, 1'000'000};
    std::string checkpoint;
    std::uint64_t max_chunks = 0;
};

HeadTerms head_of(const Options& o)
{
    return o.head == "include" ? HeadTerms::include : HeadTerms::exclude;
}

Json run_verify_lower(const Options& o)
{
    require(o.from >= 5 && o.to >= o.from, "verify-lower needs 5 <= from <= to");
    require(o.to <= 1e9, "verify-lower supports to <= 1e9");
    const auto ds = fundamental_discriminants(static_cast<std::uint64_t>(o.from), static_cast<std::uint64_t>(o.to));
    std::vector<double> values(ds.size());
    const bool analytic = o.route == "analytic";
    parallel_for(ds.size(), o.workers, [&](std::size_t i) {
        const Discriminant disc(ds[i]);
        values[i] = analytic ? disc.sqrt() * l_one_exact(disc) : h_log_eta(disc);
    });

    Json rows = Json::array();
    std::size_t violations = 0;
    double min_value = std::numeric_limits<double>::infinity();
    std::uint64_t min_d = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        // value > threshold with clearance
        const Verdict v = check_leq(o.threshold, values[i]);
        if (v != Verdict::pass)
            ++violations;
        if (values[i] < min_value) {
            min_value = values[i];
            min_d = ds[i];
        }
        if (o.all_rows || v != Verdict::pass)
            rows.push_back({{"d", ds[i]}, {"h_log_eta", values[i]},
                            {"margin", values[i] / o.threshold - 1}, {"verdict", to_string(v)}});
    }
    Json r{{"command", "verify-lower"}, {"route", o.route}, {"from", o.from}, {"to", o.to},
           {"threshold", o.threshold}, {"discriminants", ds.size()}, {"violations", violations},
           {"min_d", min_d}, {"min_h_log_eta", ds.empty() ? 0.0 : min_value},
           {"min_margin", ds.empty() ? 0.0 : min_value / o.threshold - 1}};
    r = pass_field(r, violations == 0 && !ds.empty());
    r["rows"] = rows;
    return r;
}

Json run_search_cmd(const Options& o)
{
    std::optional<std::filesystem::path> ckpt;
    if (!o.checkpoint.empty())
        ckpt = o.checkpoint;
    SearchControl control;
    if (o.max_chunks > 0)
        control.stop_after_chunks = o.max_chunks;
    const SearchSummary s = run_search(o.task, o.workers, ckpt, control);
    Json r{{"command", "search"}, {"d_min", s.task.d_min}, {"d_max", s.task.d_max}, {"cap", s.task.cap},
           {"threshold", s.task.threshold}, {"chunk", s.task.chunk}, {"chunks", s.task.chunk_count()},
           {"chunks_done", s.chunks_done}, {"complete", s.complete}, {"candidate_count", s.candidate_count},
           {"violations", s.violations.size()}};
    if (s.min_record) {
        r["min_d"] = s.min_record->d;
        r["min_h_log_eta"] = s.min_record->h_log_eta;
    }
    r["elapsed_seconds"] = s.elapsed.count();
    // an interrupted run has not verified anything yet
    r = pass_field(r, s.complete && s.violations.empty());
    Json rows = Json::array();
    for (const auto& rec : s.records)
        rows.push_back(record_json(rec));
    r["rows"] = rows;
    return r;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Explicit bounds for exceptional zeroes of even real Dirichlet L-functions"};
    app.require_subcommand(1);
    Options o;

    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "json", "csv"}));
    app.add_option("--workers", o.workers, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_option("--head", o.head, "Include the f(2)+f(3) head terms in R")
        ->check(CLI::IsMember({"exclude", "include"}));

    auto* l1 = app.add_subcommand("l1", "L(1, chi_d) from the finite closed form. Columns: d,l1");
    l1->add_option("--d", o.d, "Fundamental discriminant")->required();

    auto* lprime = app.add_subcommand("lprime", "Enclosure of |L'(sigma, chi_d)|. Columns: d,sigma,N,lo,hi,mid,radius");
    lprime->add_option("--d", o.d)->required();
    lprime->add_option("--sigma", o.sigma);
    lprime->add_option("--N", o.N, "Truncation point (>= d)");

    auto* pell = app.add_subcommand("pell", "Minimal solution of v^2 - d u^2 = 4. Columns: d,v0,u0,eta_log,unit_norm");
    pell->add_option("--d", o.d)->required();

    auto* cls = app.add_subcommand("classnumber", "Narrow class number by form cycles. Columns: d,h_plus,reduced_forms,...");
    cls->add_option("--d", o.d)->required();

    auto* hle = app.add_subcommand("hle", "h+ log eta_d against sqrt(d) L(1). Columns: d,h_plus,regulator,...");
    hle->add_option("--d", o.d)->required();

    auto* vlow = app.add_subcommand("verify-lower", "h log eta > threshold for all fundamental d in a range. "
                                                    "Row columns: d,h_log_eta,margin,verdict");
    vlow->add_option("--from", o.from)->required();
    vlow->add_option("--to", o.to)->required();
    vlow->add_option("--threshold", o.threshold);
    vlow->add_option("--route", o.route, "analytic (sqrt d L(1)) or algebraic (h+ log eta)")
        ->check(CLI::IsMember({"analytic", "algebraic"}));
    vlow->add_flag("--all", o.all_rows, "Emit a row for every d, not only violations");

    auto* vthl = app.add_subcommand("verify-theoremL", "Theorem L against its left side for d <= qmax. "
                                                       "Row columns: d,sigma,A,lhs_lo,lhs_hi,rhs,N,hypothesis,verdict");
    vthl->add_option("--qmax", o.q_max);
    vthl->add_option("--sigma", o.sigmas, "Sigma values")->delimiter(',');
    vthl->add_flag("--all", o.all_rows, "Emit a row for every (d, sigma)");

    auto* v40 = app.add_subcommand("verify-thm40", "|L'| <= log^2 q / 8 on a log grid. "
                                                   "Row columns: log_q,l_prime_upper,target,margin,verdict");
    v40->add_option("--c", o.c);
    v40->add_option("--points", o.points, "Grid points");
    v40->add_option("--from", o.from, "Lower q (default 4e5)");
    v40->add_option("--to", o.to, "Upper q (default 1e100)");
    v40->add_flag("--all", o.all_rows);

    auto* table = app.add_subcommand("bound-table", "Admissibility of the ten published (range, c) rows. "
                                                    "Row columns: range,c,admissible,worst_margin,worst_log_q,solved_c,deviation");
    table->add_option("--grid", o.grid, "Grid intervals per range (>= 1000)");

    auto* solve = app.add_subcommand("solve-c", "Largest admissible integer c on a q range. Columns: from,to,c");
    solve->add_option("--from", o.from)->required();
    solve->add_option("--to", o.to)->required();
    solve->add_flag("--open-lower", o.open_lower, "Exclude the lower endpoint");
    solve->add_option("--grid", o.grid);

    auto* beta = app.add_subcommand("beta0", "beta0 upper bound for given q and c. Columns: q,c,beta0_upper,...");
    beta->add_option("--q", o.q);
    beta->add_option("--c", o.c);

    auto* search = app.add_subcommand("search", "Checkpointed (d, u0) search. Row columns: d,u0,v0,h_plus,h_log_eta");
    search->add_option("--d-min", o.task.d_min);
    search->add_option("--d-max", o.task.d_max);
    search->add_option("--cap", o.task.cap);
    search->add_option("--threshold", o.task.threshold);
    search->add_option("--chunk", o.task.chunk);
    search->add_option("--checkpoint", o.checkpoint, "Checkpoint file (created or resumed)");
    search->add_option("--max-chunks", o.max_chunks, "Stop after this many chunks (0 = no limit)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return precondition;
    }

    const Format format = o.format == "json" ? Format::json : o.format == "csv" ? Format::csv : Format::human;
    const HeadTerms head = head_of(o);

    try {
        Json report;
        if (l1->parsed()) {
            const Discriminant disc(o.d);
            report = pass_field({{"command", "l1"}, {"d", o.d}, {"l1", l_one_exact(disc)}}, true);
        } else if (lprime->parsed()) {
            const Interval iv = l_prime_truncated(Discriminant(o.d), o.sigma, o.N);
            report = pass_field({{"command", "lprime"}, {"d", o.d}, {"sigma", o.sigma}, {"N", o.N},
                                 {"lo", iv.lo}, {"hi", iv.hi}, {"mid", iv.mid()}, {"radius", iv.radius()}},
                                true);
        } else if (pell->parsed()) {
            const Discriminant disc(o.d);
            const PellSolution s = pell4_min_solution(disc);
            report = pass_field({{"command", "pell"}, {"d", o.d}, {"v0", s.v0.str()}, {"u0", s.u0.str()},
                                 {"eta_log", s.eta_log}, {"unit_norm", fundamental_unit(disc).norm}},
                                true);
        } else if (cls->parsed()) {
            const FormClassData data = narrow_class_number(Discriminant(o.d));
            std::string reps;
            for (const auto& f : data.representatives)
                reps += (reps.empty() ? "" : " ") + form_text(f);
            report = pass_field({{"command", "classnumber"}, {"d", o.d}, {"h_plus", data.h_plus},
                                 {"reduced_forms", data.reduced_form_count}, {"representatives", reps}},
                                true);
        } else if (hle->parsed()) {
            const Discriminant disc(o.d);
            const auto h = narrow_class_number(disc).h_plus;
            const double reg = regulator_log(disc);
            const double hle_value = static_cast<double>(h) * reg;
            const double analytic = disc.sqrt() * l_one_exact(disc);
            const double diff = std::abs(hle_value - analytic);
            report = pass_field({{"command", "hle"}, {"d", o.d}, {"h_plus", h}, {"regulator", reg},
                                 {"h_log_eta", hle_value}, {"sqrt_d_l1", analytic}, {"abs_difference", diff}},
                                diff <= 1e-6 * disc.sqrt());
        } else if (vlow->parsed()) {
            report = run_verify_lower(o);
        } else if (vthl->parsed()) {
            const TheoremLReport rep = verify_theorem_L_empirical(o.q_max, o.sigmas, o.workers);
            Json rows = Json::array();
            for (const auto& p : rep.points) {
                if (!o.all_rows && (p.skipped || p.verdict == Verdict::pass))
                    continue;
                rows.push_back({{"d", p.d}, {"sigma", p.sigma}, {"A", p.A}, {"lhs_lo", p.lhs.lo},
                                {"lhs_hi", p.lhs.hi}, {"rhs", p.rhs}, {"N", p.truncation},
                                {"hypothesis", p.hypothesis_holds},
                                {"verdict", p.skipped ? "skipped" : to_string(p.verdict)}});
            }
            report = pass_field({{"command", "verify-theoremL"}, {"qmax", o.q_max}, {"checked", rep.checked},
                                 {"skipped", rep.skipped}, {"failures", rep.failures}},
                                rep.pass);
            report["rows"] = rows;
        } else if (v40->parsed()) {
            const double lo = o.from > 0 ? o.from : min_bound_q;
            const double hi = o.to > 0 ? o.to : 1e100;
            require(o.points >= 2, "need at least two grid points");
            const auto grid = log_grid(range_from(lo, hi, false), o.points - 1);
            const Theorem40Report rep = verify_theorem_40(o.c, grid, head);
            Json rows = Json::array();
            double worst = std::numeric_limits<double>::infinity();
            double worst_log_q = 0;
            for (const auto& p : rep.points) {
                if (p.margin < worst) {
                    worst = p.margin;
                    worst_log_q = p.log_q;
                }
                if (o.all_rows || p.verdict != Verdict::pass)
                    rows.push_back({{"log_q", p.log_q}, {"l_prime_upper", p.l_prime_upper}, {"target", p.target},
                                    {"margin", p.margin}, {"verdict", to_string(p.verdict)}});
            }
            report = pass_field({{"command", "verify-thm40"}, {"c", o.c}, {"points", rep.points.size()},
                                 {"worst_margin", worst}, {"worst_log_q", worst_log_q}},
                                rep.pass);
            report["rows"] = rows;
        } else if (table->parsed()) {
            Json rows = Json::array();
            bool all = true;
            for (const auto& row : published_c_table()) {
                const CTableCheck chk = check_c_row(row, o.grid, head);
                const double deviation = (chk.solved_c - row.c) / static_cast<double>(row.c);
                all = all && chk.admissible && std::abs(deviation) <= 0.03;
                rows.push_back({{"range", row.label}, {"c", row.c}, {"admissible", chk.admissible},
                                {"worst_margin", chk.worst_margin}, {"worst_log_q", chk.worst_log_q},
                                {"solved_c", chk.solved_c}, {"deviation", deviation}});
            }
            report = pass_field({{"command", "bound-table"}, {"rows_checked", rows.size()}, {"grid", o.grid}}, all);
            report["rows"] = rows;
        } else if (solve->parsed()) {
            const int c = solve_c(range_from(o.from, o.to, o.open_lower), o.grid, head);
            report = pass_field({{"command", "solve-c"}, {"from", o.from}, {"to", o.to},
                                 {"open_lower", o.open_lower}, {"c", c}},
                                true);
        } else if (beta->parsed()) {
            const Conductor q = conductor_from(o.q);
            const Admissibility adm = admissibility(q, o.c, head);
            Json r{{"command", "beta0"}, {"q", o.q}, {"log_q", q.log_q()}, {"c", o.c},
                   {"admissible", adm.verdict == Verdict::pass}, {"margin", adm.margin},
                   {"branch", to_string(adm.branch)}};
            if (adm.verdict == Verdict::pass) {
                const BoundReport b = beta0_upper(q, o.c, head);
                r["l_prime_upper"] = b.l_prime_upper;
                r["l_one_lower"] = b.l_one_lower;
                r["one_minus_beta0"] = b.one_minus_beta0;
                r["beta0_upper"] = b.beta0_upper;
            }
            report = pass_field(r, adm.verdict == Verdict::pass);
        } else if (search->parsed()) {
            report = run_search_cmd(o);
        }
        write_report(report, format, out);
        return report.value("pass", false) ? ok : verification_failed;
    } catch (const precondition_error& e) {
        err << "precondition violated: " << e.what() << '\n';
        return precondition;
    } catch (const inadmissible_error& e) {
        err << "verification failed: " << e.what() << '\n';
        return verification_failed;
    } catch (const io_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return io;
    }
}

} // namespace siegel::cli
