#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "siegel/errors.hpp"
#include "siegel/search.hpp"

using namespace siegel;
namespace fs = std::filesystem;

namespace {

std::optional<PellPair> brute(std::uint64_t d, std::uint64_t cap)
{
    for (std::uint64_t u = 1; d * u * u <= cap; ++u)
        for (std::uint64_t v = 1; v * v <= d * u * u + 4; ++v)
            if (v * v == d * u * u + 4)
                return PellPair{u, v};
    return std::nullopt;
}

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name)
        : path(fs::temp_directory_path() / ("siegel_test_" + name + "_" + std::to_string(::getpid())))
    {
        fs::remove(path);
    }
    ~TempFile() { fs::remove(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const SearchTask small{10'000'001, 10'100'000, 1'000'000'000, 412, 10'000};

} // namespace

TEST_SUITE("search")
{
    TEST_CASE("minimal u0 examples")
    {
        CHECK(minimal_u0_below_cap(5, 100) == PellPair{1, 3});
        CHECK(brute(5, 100) == PellPair{1, 3});
        CHECK_FALSE(minimal_u0_below_cap(13, 13));
        CHECK(minimal_u0_below_cap(13, 130) == PellPair{3, 11});
        CHECK(brute(13, 130) == PellPair{3, 11});
        CHECK_THROWS_AS(minimal_u0_below_cap(13, 12), precondition_error);
    }

    TEST_CASE("minimal u0 agrees with brute force")
    {
        for (std::uint64_t d : fundamental_discriminants(5, 3000))
            for (std::uint64_t cap : {d, 10 * d, 1000 * d, std::uint64_t{100'000}}) {
                if (cap < d)
                    continue;
                REQUIRE_MESSAGE(minimal_u0_below_cap(d, cap) == brute(d, cap), "d=" << d << " cap=" << cap);
            }
    }

    TEST_CASE("task validation")
    {
        CHECK_NOTHROW(validate(small));
        CHECK_THROWS_AS(validate({4, 100, 1000, 412, 10}), precondition_error);
        CHECK_THROWS_AS(validate({100, 99, 1000, 412, 10}), precondition_error);
        CHECK_THROWS_AS(validate({100, 1'000'000'001, 1'000'000'000'000, 412, 10}), precondition_error);
        CHECK_THROWS_AS(validate({100, 200, 99, 412, 10}), precondition_error);
        CHECK_THROWS_AS(validate({100, 200, (1ull << 62) + 1, 412, 10}), precondition_error);
        CHECK_THROWS_AS(validate({100, 200, 1000, 412, 0}), precondition_error);
        CHECK(small.chunk_count() == 10);
        CHECK(small.header() == "#task d_min=10000001 d_max=10100000 cap=1000000000 threshold=412 chunk=10000");
    }

    TEST_CASE("records format, parse and validate")
    {
        const SearchRecord r = make_record(13, {3, 11});
        CHECK(r.h_plus == 1);
        CHECK(r.h_log_eta == doctest::Approx(std::log((11 + 3 * std::sqrt(13.0)) / 2)));
        CHECK(record_is_valid(r, 1000));
        CHECK_FALSE(record_is_valid(r, 100)); // 13 * 9 > 100
        const std::string line = format_record(r);
        CHECK(line.rfind("R,13,3,11,1,", 0) == 0);
        const auto back = parse_record(line);
        REQUIRE(back);
        CHECK(*back == r);
        CHECK_FALSE(parse_record("R,13,3,11,1"));
        CHECK_FALSE(parse_record("R,13,3,11,1,x"));
        CHECK_FALSE(parse_record("C,1"));
        SearchRecord bad = r;
        bad.v0 = 12;
        CHECK_FALSE(record_is_valid(bad, 1000));
        bad = r;
        bad.h_log_eta *= 1 + 1e-8;
        CHECK_FALSE(record_is_valid(bad, 1000));
    }

    TEST_CASE("parallel search equals the sequential oracle")
    {
        const auto oracle = sequential_search(small);
        const auto s = run_search(small, 4);
        CHECK(s.records == oracle);
        CHECK(s.complete);
        CHECK(s.chunks_done == small.chunk_count());
        CHECK(s.candidate_count == oracle.size());
        REQUIRE(s.min_record);
        CHECK(s.violations.empty() == (s.min_record->h_log_eta > small.threshold));
        for (const auto& r : s.records)
            CHECK(record_is_valid(r, small.cap));
    }

    TEST_CASE("summary does not depend on worker count")
    {
        const auto a = run_search(small, 1);
        for (unsigned w : {2u, 3u, 8u})
            CHECK(run_search(small, w).same_result(a));
    }

    TEST_CASE("violations are reported against the threshold")
    {
        SearchTask t = small;
        const auto base = run_search(t, 2);
        REQUIRE(base.min_record);
        t.threshold = base.min_record->h_log_eta;
        const auto s = run_search(t, 2);
        CHECK_FALSE(s.violations.empty());
        CHECK(s.violations.front() == *base.min_record);
    }

    TEST_CASE("raising the cap gives a record superset")
    {
        SearchTask lo = small, hi = small;
        lo.cap = 200'000'000;
        const auto a = run_search(lo, 2).records;
        const auto b = run_search(hi, 2).records;
        CHECK(a.size() < b.size());
        for (const auto& r : a)
            CHECK(std::find(b.begin(), b.end(), r) != b.end());
    }

    TEST_CASE("interrupted runs resume to the same result")
    {
        TempFile f("resume");
        const auto full = run_search(small, 2);

        const auto part = run_search(small, 2, f.path, SearchControl{3});
        CHECK_FALSE(part.complete);
        CHECK(part.chunks_done == 3);
        const auto part2 = run_search(small, 3, f.path, SearchControl{4});
        CHECK(part2.chunks_done == 7);
        const auto done = run_search(small, 1, f.path);
        CHECK(done.complete);
        CHECK(done.same_result(full));

        // a completed checkpoint needs no further work
        const auto again = run_search(small, 1, f.path);
        CHECK(again.same_result(full));
        CHECK(slurp(f.path).rfind(small.header() + "\n", 0) == 0);
    }

    TEST_CASE("torn final line is ignored and truncated")
    {
        TempFile f("torn");
        const auto full = run_search(small, 2);
        run_search(small, 2, f.path, SearchControl{2});
        {
            std::ofstream out(f.path, std::ios::app | std::ios::binary);
            out << "R,1000";
        }
        const auto state = load_checkpoint(f.path, small);
        CHECK(state.done_chunks.size() == 2);
        const auto done = run_search(small, 2, f.path);
        CHECK(done.same_result(full));
        CHECK(slurp(f.path).find("R,1000R") == std::string::npos);
        const auto reload = load_checkpoint(f.path, small);
        CHECK(reload.done_chunks.size() == small.chunk_count());
        CHECK(reload.records == full.records);
    }

    TEST_CASE("records of unfinished chunks and duplicates")
    {
        TempFile f("dup");
        run_search(small, 1, f.path, SearchControl{1});
        const auto state = load_checkpoint(f.path, small);
        REQUIRE(state.done_chunks.size() == 1);
        const std::string text = slurp(f.path);
        // replay the file body twice, plus a record whose chunk never completed
        const auto recs = search_chunk(small, 5);
        REQUIRE(!recs.empty());
        {
            std::ofstream out(f.path, std::ios::app | std::ios::binary);
            out << text.substr(text.find('\n') + 1);
            out << format_record(recs.front()) << '\n';
        }
        const auto again = load_checkpoint(f.path, small);
        CHECK(again.done_chunks == state.done_chunks);
        CHECK(again.records == state.records);
        CHECK(run_search(small, 2, f.path).same_result(run_search(small, 2)));
    }

    TEST_CASE("checkpoint errors")
    {
        TempFile f("bad");
        run_search(small, 1, f.path, SearchControl{1});
        SearchTask other = small;
        other.cap += 1;
        CHECK_THROWS_AS(load_checkpoint(f.path, other), checkpoint_mismatch);
        CHECK_THROWS_AS(run_search(other, 1, f.path), checkpoint_mismatch);
        other = small;
        other.threshold = 412.0000001;
        CHECK_THROWS_AS(load_checkpoint(f.path, other), checkpoint_mismatch);

        {
            std::ofstream out(f.path, std::ios::app | std::ios::binary);
            out << "R,10000001,1,1,1,1\n";
        }
        CHECK_THROWS_AS(load_checkpoint(f.path, small), io_error);

        TempFile g("junk");
        {
            std::ofstream out(g.path, std::ios::binary);
            out << small.header() << "\nhello\n";
        }
        CHECK_THROWS_AS(load_checkpoint(g.path, small), io_error);
        {
            std::ofstream out(g.path, std::ios::binary);
            out << small.header() << "\nC,10\n";
        }
        CHECK_THROWS_AS(load_checkpoint(g.path, small), io_error);

        CHECK(load_checkpoint(fs::temp_directory_path() / "siegel_no_such_file", small).records.empty());
        CHECK_THROWS_AS(run_search(small, 1, fs::path("/nonexistent-dir/ckpt")), io_error);
    }

    TEST_CASE("reduced-cap run over one million d-values")
    {
        const SearchTask t{10'000'001, 11'000'000, 1'000'000'000, 412, 250'000};
        const auto s = run_search(t, 4);
        CHECK(s.violations.empty());
        REQUIRE(s.min_record);
        CHECK(s.min_record->h_log_eta > 412);
    }
}
