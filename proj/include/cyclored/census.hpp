#pragma once

// Prime census: classify every prime p <= x as bad / cyclic / non-cyclic
// reduction and aggregate the counts, with chunked parallel work and an
// append-only checkpoint file.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyclored/curve.hpp"

namespace cyclored {

enum class ReductionStatus { bad_reduction, cyclic, non_cyclic };

std::string_view to_string(ReductionStatus s);

struct PrimeClassification {
      u64 p = 0;
      ReductionStatus status = ReductionStatus::bad_reduction;
      /// Every ell with full ell-torsion; empty unless non_cyclic.
      std::vector<u64> obstruction_primes;
      /// Zero for bad reduction.
      u64 group_order = 0;
};

PrimeClassification classify_prime(const CurveOverQ& curve, u64 p);

/// Partial counts for one contiguous run of primes (chunk i holds the
/// primes with index [i * chunk_size, (i + 1) * chunk_size)).
struct ChunkRecord {
      u64 index = 0;
      u64 first_prime = 0;
      u64 last_prime = 0;
      u64 prime_count = 0;
      u64 good = 0;
      u64 cyclic = 0;
      /// Good primes bucketed by which tracked ell have full torsion (bit i <-> tracked[i]).
      std::vector<u64> mask_counts;

      bool operator==(const ChunkRecord&) const = default;
};

struct CensusConfig {
      std::vector<u64> tracked_ells{2, 3, 5, 7};
      unsigned workers = 1;
      u64 chunk_size = 4096;
      std::optional<std::filesystem::path> checkpoint;
      /// Keep every PrimeClassification (needed for the per-prime CSV).
      bool keep_classifications = false;
};

struct CensusReport {
      CurveOverQ curve;
      u64 limit = 0;
      u64 total_primes = 0;
      u64 good_primes = 0;
      u64 cyclic_count = 0;
      std::vector<u64> tracked_ells;
      std::vector<u64> mask_counts;
      std::vector<ChunkRecord> chunks;
      std::vector<PrimeClassification> classifications;
      double elapsed_seconds = 0;

      double fraction() const;

      /// pi(x, K_ell): good primes with full ell-torsion. ell must be tracked.
      u64 split_count(u64 ell) const;

      /// Good primes with full m-torsion for every prime factor of squarefree m
      /// (all factors tracked).
      u64 full_torsion_count(u64 m) const;
};

CensusReport run_census(const CurveOverQ& curve, u64 limit, const CensusConfig& config = {});

/// pi(x, K_ell) computed directly, without a full census.
u64 split_count(const CurveOverQ& curve, u64 ell, u64 limit);

struct InclusionExclusion {
      i64 recount = 0;      ///< sum over m | n of mu(m) * #{good p with full m-torsion}
      u64 direct_count = 0; ///< #{good p with no full ell-torsion for every ell | n}
};

/// Truncated inclusion-exclusion over the divisors of squarefree n (primes <= 7 by default).
InclusionExclusion inclusion_exclusion_check(const CurveOverQ& curve, u64 limit, u64 n);
InclusionExclusion inclusion_exclusion_check(const CensusReport& report, u64 n);

// Checkpoint file: a header line followed by one line per finished chunk.
struct CheckpointHeader {
      i64 A = 0;
      i64 B = 0;
      u64 chunk_size = 0;
      std::vector<u64> tracked_ells;

      bool operator==(const CheckpointHeader&) const = default;
};

struct Checkpoint {
      CheckpointHeader header;
      std::vector<ChunkRecord> records;
};

std::string format_checkpoint_header(const CheckpointHeader& h);
std::string format_chunk_record(const ChunkRecord& r);
/// Throws CheckpointCorrupt on malformed input.
Checkpoint parse_checkpoint(std::istream& in);
std::string serialize_checkpoint(const Checkpoint& cp);

nlohmann::json census_report_to_json(const CensusReport& report);
void write_classification_csv(const CensusReport& report, std::ostream& out);
/// Running cyclic fraction against x, one row per classified prime (or per chunk).
void write_running_fraction_csv(const CensusReport& report, std::ostream& out);

}  // namespace cyclored
