#pragma once

// Exhaustive check that h+(d) log eta_d exceeds a threshold for every
// fundamental d in a range whose minimal Pell solution has d u0^2 <= cap.
// Work is split into fixed-size d-chunks claimed by worker threads; each
// completed chunk is appended to a text checkpoint so runs can resume.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "siegel/characters.hpp"

namespace siegel {

struct SearchTask {
    std::uint64_t d_min = 0;
    std::uint64_t d_max = 0;
    std::uint64_t cap = 0;
    double threshold = 412.0;
    std::uint64_t chunk = 1'000'000;

    std::uint64_t chunk_count() const noexcept;

    /// The checkpoint header line (without newline).
    std::string header() const;

    friend bool operator==(const SearchTask&, const SearchTask&) = default;
};

/// Throws precondition_error unless the task is well formed and every
/// d u^2 + 4 it can produce fits comfortably in 64 bits.
void validate(const SearchTask& task);

struct SearchRecord {
    std::uint64_t d = 0;
    std::uint64_t u0 = 0;
    std::uint64_t v0 = 0;
    std::uint64_t h_plus = 0;
    double h_log_eta = 0;

    friend bool operator==(const SearchRecord&, const SearchRecord&) = default;
};

struct PellPair {
    std::uint64_t u0 = 0;
    std::uint64_t v0 = 0;
    friend bool operator==(const PellPair&, const PellPair&) = default;
};

/// Least u in [1, floor(sqrt(cap/d))] with d u^2 + 4 a square, with v = sqrt(d u^2 + 4).
std::optional<PellPair> minimal_u0_below_cap(std::uint64_t d, std::uint64_t cap);

/// Builds the record for a hit: h+ from form cycles, h log eta from (u0, v0).
SearchRecord make_record(std::uint64_t d, PellPair pair);

/// Exact Pell identity and the 1e-9 relative recomputation of h_log_eta.
bool record_is_valid(const SearchRecord& r, std::uint64_t cap);

/// "R,<d>,<u0>,<v0>,<h_plus>,<h_log_eta>" with 17 significant digits.
std::string format_record(const SearchRecord& r);
std::optional<SearchRecord> parse_record(const std::string& line);

/// All records of one chunk, ascending in d.
std::vector<SearchRecord> search_chunk(const SearchTask& task, std::uint64_t chunk_index);

struct SearchSummary {
    SearchTask task;
    std::uint64_t candidate_count = 0;       ///< (d, u0) pairs with d u0^2 <= cap
    std::optional<SearchRecord> min_record;  ///< least h_log_eta; ties broken by d
    std::vector<SearchRecord> violations;    ///< h_log_eta <= threshold
    std::vector<SearchRecord> records;       ///< every candidate, ascending in d
    std::chrono::duration<double> elapsed{};
    std::uint64_t chunks_done = 0;
    bool complete = false;

    /// Equality of everything except elapsed time.
    bool same_result(const SearchSummary& other) const;
};

/// Stop after processing this many new chunks (simulated interruption).
struct SearchControl {
    std::optional<std::uint64_t> stop_after_chunks;
};

/// Checkpoint contents after load: deduplicated records and completed chunks.
struct CheckpointState {
    std::vector<SearchRecord> records;
    std::vector<std::uint64_t> done_chunks;
};

/// Reads and validates a checkpoint for `task`. A missing file yields an
/// empty state. Throws checkpoint_mismatch on a header mismatch and io_error
/// on malformed or invalid content. A torn final line is ignored.
CheckpointState load_checkpoint(const std::filesystem::path& path, const SearchTask& task);

SearchSummary run_search(const SearchTask& task, unsigned workers,
                         const std::optional<std::filesystem::path>& checkpoint = std::nullopt,
                         SearchControl control = {});

/// Single-threaded, chunk-free reference enumeration (test oracle).
std::vector<SearchRecord> sequential_search(const SearchTask& task);

} // namespace siegel
