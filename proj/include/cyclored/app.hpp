#pragma once

// Command layer: the built-in curve registry, degree-data ingestion from
// fixtures (or a remote source when compiled in), atomic report files, and
// the bodies of the CLI subcommands. Each command returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclored/census.hpp"
#include "cyclored/density.hpp"
#include "cyclored/error.hpp"

namespace cyclored {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_usage = 2, exit_mismatch = 3, exit_io = 4 };

/// Exit code for an error raised while running a command.
int exit_code_for(const Error& e);

/// Published reference values, as printed (decimal strings keep their precision).
struct ExpectedValues {
      u64 limit = 1000000;
      u64 total_primes = 78498;
      u64 cyclic_count = 0;
      std::string fraction;
      std::string naive;
      std::optional<std::string> delta;
      std::optional<std::string> alpha;
};

struct CurveSpec {
      std::string label;
      i64 A = 0;
      i64 B = 0;
      DegreeProfile profile;
      std::optional<ExpectedValues> expected;

      CurveOverQ curve() const { return CurveOverQ(A, B); }
};

/// serre-ex1 ... serre-ex5.
const std::vector<CurveSpec>& registry();
/// Throws InvalidArgument for an unknown label.
const CurveSpec& registry_lookup(const std::string& label);

/// True when every point of `iv` rounds or truncates to `printed` at the
/// printed number of decimals: iv inside [v - u/2, v + u) for last-digit unit u.
bool matches_printed(const Interval& iv, const std::string& printed);

/// Writes to a sibling temporary file, then renames over `path`. Throws Io.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Canonical report text: two-space indented JSON with a trailing newline.
std::string dump_report(const nlohmann::json& report);
/// Throws Io or SchemaMismatch.
nlohmann::json load_report(const std::filesystem::path& path);

struct IngestSource {
      std::filesystem::path fixture_dir;
      bool remote = false;
      std::string endpoint = "https://www.lmfdb.org";
};

/// Whether this build was configured with CYCLORED_WITH_REMOTE.
bool remote_ingestion_enabled();

/// fixture_dir from CYCLORED_FIXTURES, else the source tree's fixtures/.
IngestSource default_ingest_source();

/// Reads <fixture_dir>/<label>.json:
///   {"data": [{"ainvs": [0, 0, 0, A, B], "nonmax_primes": [2],
///              "modell_images": ["2.2.0.1" | {"level": 2, "index": 2}]}]}
/// Image labels are read as level.index.*; the degree is #GL_2(F_ell) / index.
/// When remote is set and the fixture is absent, the payload is fetched and
/// cached first. Throws FixtureMissing, SchemaMismatch or RemoteDisabled.
DegreeProfile ingest_degrees(const IngestSource& source, const std::string& label);

/// Degree data parsed from an already-loaded payload; checks ainvs when a curve is given.
DegreeProfile degrees_from_payload(const nlohmann::json& payload, const std::optional<CurveOverQ>& curve);

struct CurveChoice {
      std::optional<std::string> label;
      std::optional<i64> A;
      std::optional<i64> B;
};

struct CensusOptions {
      CurveChoice curve;
      u64 limit = 1000000;
      unsigned workers = 0;  ///< 0: hardware concurrency
      u64 chunk_size = 4096;
      std::optional<std::filesystem::path> checkpoint;
      std::optional<std::filesystem::path> output;
      std::optional<std::filesystem::path> classification_csv;
      std::optional<std::filesystem::path> running_csv;
};

struct DensityOptions {
      std::optional<std::string> label;
      std::optional<std::filesystem::path> profile;
      u64 truncation = 100000;
      std::optional<std::vector<u64>> charsum;
      std::optional<std::vector<u64>> superfluous;
      bool from_fixtures = false;
      std::optional<std::filesystem::path> fixture_dir;
      std::optional<std::filesystem::path> output;
};

struct GaloisOptions {
      CurveChoice curve;
      std::vector<u64> ells{5, 7};
      u64 sample_bound = 10000;
      std::optional<std::filesystem::path> output;
};

struct EntangleOptions {
      std::filesystem::path input;
      std::optional<std::filesystem::path> output;
};

struct ConstantsOptions {
      u64 truncation = 100000;
      std::optional<std::filesystem::path> output;
};

int cli_census(const CensusOptions& opt, std::ostream& out, std::ostream& err);
int cli_density(const DensityOptions& opt, std::ostream& out, std::ostream& err);
int cli_galois(const GaloisOptions& opt, std::ostream& out, std::ostream& err);
int cli_entangle(const EntangleOptions& opt, std::ostream& out, std::ostream& err);
int cli_constants(const ConstantsOptions& opt, std::ostream& out, std::ostream& err);

/// The report documents the commands write, without the side effects.
nlohmann::json census_document(const CurveSpec& spec, const CensusReport& report);
nlohmann::json density_document(const CurveSpec* spec, const DegreeProfile& profile, const DensityReport& report);

}  // namespace cyclored
