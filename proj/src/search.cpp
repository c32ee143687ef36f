#include "siegel/search.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "siegel/errors.hpp"
#include "siegel/parallel.hpp"
#include "siegel/quadratic.hpp"

namespace siegel {

namespace {

std::string format_g17(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double record_log_eta(std::uint64_t d, std::uint64_t u0, std::uint64_t v0)
{
    return std::log((static_cast<double>(v0) + static_cast<double>(u0) * std::sqrt(static_cast<double>(d))) / 2.0);
}

} // namespace

std::uint64_t SearchTask::chunk_count() const noexcept
{
    if (d_max < d_min || chunk == 0)
        return 0;
    return (d_max - d_min) / chunk + 1;
}

std::string SearchTask::header() const
{
    return "#task d_min=" + std::to_string(d_min) + " d_max=" + std::to_string(d_max) +
           " cap=" + std::to_string(cap) + " threshold=" + format_g17(threshold) +
           " chunk=" + std::to_string(chunk);
}

void validate(const SearchTask& task)
{
    require(task.d_min >= 5, "search needs d_min >= 5");
    require(task.d_max >= task.d_min, "search needs d_max >= d_min");
    require(task.d_max <= max_class_number_discriminant, "search needs d_max <= 1e9");
    require(task.cap >= task.d_min, "search needs cap >= d_min");
    require(task.cap <= (std::uint64_t{1} << 62), "search cap must be below 2^62");
    require(task.chunk >= 1, "chunk size must be positive");
    require(std::isfinite(task.threshold), "threshold must be finite");
}

std::optional<PellPair> minimal_u0_below_cap(std::uint64_t d, std::uint64_t cap)
{
    require(d >= 1 && cap >= d, "minimal_u0_below_cap needs cap >= d");
    require(cap <= (std::uint64_t{1} << 62), "cap must be below 2^62");
    const std::uint64_t u_max = isqrt(cap / d);
    for (std::uint64_t u = 1; u <= u_max; ++u) {
        const std::uint64_t x = d * u * u + 4; // <= cap + 4 by the choice of u_max
        std::uint64_t v = 0;
        if (is_perfect_square(x, &v))
            return PellPair{u, v};
    }
    return std::nullopt;
}

SearchRecord make_record(std::uint64_t d, PellPair pair)
{
    SearchRecord r;
    r.d = d;
    r.u0 = pair.u0;
    r.v0 = pair.v0;
    r.h_plus = narrow_class_number(Discriminant(d)).h_plus;
    r.h_log_eta = static_cast<double>(r.h_plus) * record_log_eta(d, r.u0, r.v0);
    return r;
}

bool record_is_valid(const SearchRecord& r, std::uint64_t cap)
{
    using u128 = uint128;
    if (r.u0 == 0 || r.h_plus == 0)
        return false;
    const u128 du2 = u128{r.d} * r.u0 * r.u0;
    if (du2 > cap || u128{r.v0} * r.v0 != du2 + 4)
        return false;
    const double expect = static_cast<double>(r.h_plus) * record_log_eta(r.d, r.u0, r.v0);
    return std::abs(r.h_log_eta - expect) <= 1e-9 * std::abs(expect);
}

std::string format_record(const SearchRecord& r)
{
    return "R," + std::to_string(r.d) + "," + std::to_string(r.u0) + "," + std::to_string(r.v0) + "," +
           std::to_string(r.h_plus) + "," + format_g17(r.h_log_eta);
}

std::optional<SearchRecord> parse_record(const std::string& line)
{
    if (line.size() < 2 || line[0] != 'R' || line[1] != ',')
        return std::nullopt;
    const char* p = line.data() + 2;
    const char* end = line.data() + line.size();
    SearchRecord r;
    for (std::uint64_t* field : {&r.d, &r.u0, &r.v0, &r.h_plus}) {
        const auto [next, ec] = std::from_chars(p, end, *field);
        if (ec != std::errc{} || next == end || *next != ',')
            return std::nullopt;
        p = next + 1;
    }
    // strtod: from_chars for double is not available everywhere
    std::string tail(p, end);
    char* stop = nullptr;
    r.h_log_eta = std::strtod(tail.c_str(), &stop);
    if (tail.empty() || stop != tail.c_str() + tail.size())
        return std::nullopt;
    return r;
}

std::vector<SearchRecord> search_chunk(const SearchTask& task, std::uint64_t chunk_index)
{
    const std::uint64_t lo = task.d_min + chunk_index * task.chunk;
    const std::uint64_t hi = std::min(task.d_max, lo + task.chunk - 1);
    std::vector<SearchRecord> out;
    for (const std::uint64_t d : fundamental_discriminants(lo, hi)) {
        if (d > task.cap)
            break;
        if (const auto pair = minimal_u0_below_cap(d, task.cap))
            out.push_back(make_record(d, *pair));
    }
    return out;
}

bool SearchSummary::same_result(const SearchSummary& o) const
{
    return task == o.task && candidate_count == o.candidate_count && min_record == o.min_record &&
           violations == o.violations && records == o.records && chunks_done == o.chunks_done &&
           complete == o.complete;
}

CheckpointState load_checkpoint(const std::filesystem::path& path, const SearchTask& task)
{
    CheckpointState state;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return state;
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.empty())
        return state;

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos)
            break; // torn final line from an interrupted append
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty())
        return state;
    if (lines.front() != task.header())
        throw checkpoint_mismatch("checkpoint " + path.string() + " belongs to a different task: '" +
                                  lines.front() + "' vs '" + task.header() + "'");

    std::map<std::uint64_t, SearchRecord> by_d;
    std::vector<bool> done(task.chunk_count(), false);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.rfind("R,", 0) == 0) {
            const auto r = parse_record(line);
            if (!r || !record_is_valid(*r, task.cap) || r->d < task.d_min || r->d > task.d_max)
                throw io_error("invalid checkpoint record at line " + std::to_string(i + 1) + ": " + line);
            const auto [it, inserted] = by_d.emplace(r->d, *r);
            if (!inserted && !(it->second == *r))
                throw io_error("conflicting duplicate record for d=" + std::to_string(r->d));
        } else if (line.rfind("C,", 0) == 0) {
            std::uint64_t idx = 0;
            const auto [next, ec] = std::from_chars(line.data() + 2, line.data() + line.size(), idx);
            if (ec != std::errc{} || next != line.data() + line.size() || idx >= done.size())
                throw io_error("invalid chunk marker at line " + std::to_string(i + 1) + ": " + line);
            done[idx] = true;
        } else {
            throw io_error("unrecognised checkpoint line " + std::to_string(i + 1) + ": " + line);
        }
    }

    for (std::uint64_t i = 0; i < done.size(); ++i)
        if (done[i])
            state.done_chunks.push_back(i);
    // keep only records of completed chunks; the rest are recomputed
    for (const auto& [d, r] : by_d) {
        const std::uint64_t idx = (d - task.d_min) / task.chunk;
        if (done[idx])
            state.records.push_back(r);
    }
    return state;
}

namespace {

class CheckpointWriter {
public:
    CheckpointWriter(const std::filesystem::path& path, const SearchTask& task, bool fresh)
    {
        namespace fs = std::filesystem;
        if (!fresh && fs::exists(path)) {
            // drop a torn final line so appends start on a line boundary
            std::ifstream in(path, std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            const std::string text = buf.str();
            const auto last_nl = text.rfind('\n');
            const std::uintmax_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
            if (keep != text.size())
                fs::resize_file(path, keep);
            fresh = keep == 0;
        }
        out_.open(path, fresh ? std::ios::binary | std::ios::trunc : std::ios::binary | std::ios::app);
        if (!out_)
            throw io_error("cannot open checkpoint " + path.string() + " for writing");
        if (fresh)
            out_ << task.header() << '\n';
        out_.flush();
        if (!out_)
            throw io_error("cannot write checkpoint " + path.string());
    }

    // Records first, then the completion marker.
    void commit(std::uint64_t chunk, const std::vector<SearchRecord>& records)
    {
        std::lock_guard lock(mutex_);
        for (const auto& r : records)
            out_ << format_record(r) << '\n';
        out_ << "C," << chunk << '\n';
        out_.flush();
        if (!out_)
            throw io_error("checkpoint write failed");
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
};

void summarise(SearchSummary& s)
{
    std::sort(s.records.begin(), s.records.end(), [](const auto& a, const auto& b) { return a.d < b.d; });
    s.candidate_count = s.records.size();
    s.violations.clear();
    s.min_record.reset();
    for (const auto& r : s.records) {
        if (r.h_log_eta <= s.task.threshold)
            s.violations.push_back(r);
        if (!s.min_record || r.h_log_eta < s.min_record->h_log_eta)
            s.min_record = r;
    }
}

} // namespace

SearchSummary run_search(const SearchTask& task, unsigned workers,
                         const std::optional<std::filesystem::path>& checkpoint, SearchControl control)
{
    validate(task);
    require(workers >= 1, "need at least one worker");
    const auto start = std::chrono::steady_clock::now();

    SearchSummary summary;
    summary.task = task;

    CheckpointState state;
    std::optional<CheckpointWriter> writer;
    if (checkpoint) {
        const bool existed = std::filesystem::exists(*checkpoint);
        state = load_checkpoint(*checkpoint, task);
        writer.emplace(*checkpoint, task, !existed);
    }

    std::vector<bool> done(task.chunk_count(), false);
    for (auto i : state.done_chunks)
        done[i] = true;
    std::vector<std::uint64_t> pending;
    for (std::uint64_t i = 0; i < done.size(); ++i)
        if (!done[i])
            pending.push_back(i);

    const std::uint64_t budget = control.stop_after_chunks.value_or(pending.size());
    std::atomic<std::uint64_t> claimed{0};
    std::mutex results_mutex;
    std::vector<SearchRecord> fresh;
    std::uint64_t fresh_chunks = 0;

    parallel_for(pending.size(), workers, [&](std::size_t k) {
        if (claimed++ >= budget)
            return;
        const std::uint64_t idx = pending[k];
        std::vector<SearchRecord> recs = search_chunk(task, idx);
        if (writer)
            writer->commit(idx, recs);
        std::lock_guard lock(results_mutex);
        fresh.insert(fresh.end(), recs.begin(), recs.end());
        ++fresh_chunks;
    });

    summary.records = std::move(state.records);
    summary.records.insert(summary.records.end(), fresh.begin(), fresh.end());
    summary.chunks_done = state.done_chunks.size() + fresh_chunks;
    summary.complete = summary.chunks_done == task.chunk_count();
    summarise(summary);
    summary.elapsed = std::chrono::steady_clock::now() - start;
    return summary;
}

std::vector<SearchRecord> sequential_search(const SearchTask& task)
{
    validate(task);
    std::vector<SearchRecord> out;
    for (std::uint64_t d = task.d_min; d <= task.d_max && d <= task.cap; ++d) {
        if (!is_fundamental_discriminant(d))
            continue;
        for (std::uint64_t u = 1; d * u * u <= task.cap; ++u) {
            const std::uint64_t x = d * u * u + 4;
            const std::uint64_t v = isqrt(x);
            if (v * v == x) {
                out.push_back(make_record(d, {u, v}));
                break;
            }
        }
    }
    return out;
}

} // namespace siegel
