#include "cyclored/census.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cyclored/error.hpp"

namespace cyclored {

std::string_view to_string(ReductionStatus s) {
   switch(s) {
      case ReductionStatus::bad_reduction: return "bad_reduction";
      case ReductionStatus::cyclic: return "cyclic";
      case ReductionStatus::non_cyclic: return "non_cyclic";
   }
   return "?";
}

PrimeClassification classify_prime(const CurveOverQ& curve, u64 p) {
   PrimeClassification out;
   out.p = p;
   if(p == 2 || curve.discriminant_mod(p) == 0) {
      return out;
   }
   const ReducedCurve C = reduce(curve, p);
   const GroupStructure g = group_structure(C);
   out.group_order = g.order;
   for(const auto& pp : factorize(g.d)) {
      out.obstruction_primes.push_back(pp.prime);
   }
   out.status = g.cyclic() ? ReductionStatus::cyclic : ReductionStatus::non_cyclic;
   return out;
}

double CensusReport::fraction() const {
   return total_primes == 0 ? 0.0 : static_cast<double>(cyclic_count) / static_cast<double>(total_primes);
}

namespace {

std::size_t tracked_index(const std::vector<u64>& tracked, u64 ell) {
   auto it = std::find(tracked.begin(), tracked.end(), ell);
   if(it == tracked.end()) {
      throw Error(ErrorCode::InvalidArgument, "ell = " + std::to_string(ell) + " is not tracked by this census");
   }
   return static_cast<std::size_t>(it - tracked.begin());
}

}  // namespace

u64 CensusReport::full_torsion_count(u64 m) const {
   u64 want = 0;
   for(const auto& pp : factorize(m)) {
      want |= u64(1) << tracked_index(tracked_ells, pp.prime);
   }
   u64 total = 0;
   for(u64 mask = 0; mask < mask_counts.size(); ++mask) {
      if((mask & want) == want) {
         total += mask_counts[mask];
      }
   }
   return total;
}

u64 CensusReport::split_count(u64 ell) const {
   return full_torsion_count(ell);
}

namespace {

ChunkRecord classify_chunk(const CurveOverQ& curve,
                           const std::vector<u64>& primes,
                           u64 index,
                           const CensusConfig& config,
                           std::vector<PrimeClassification>* keep) {
   const std::size_t begin = index * config.chunk_size;
   const std::size_t end = std::min<std::size_t>(primes.size(), begin + config.chunk_size);
   ChunkRecord r;
   r.index = index;
   r.first_prime = primes[begin];
   r.last_prime = primes[end - 1];
   r.prime_count = end - begin;
   r.mask_counts.assign(std::size_t(1) << config.tracked_ells.size(), 0);
   for(std::size_t i = begin; i < end; ++i) {
      PrimeClassification c = classify_prime(curve, primes[i]);
      if(c.status != ReductionStatus::bad_reduction) {
         ++r.good;
         if(c.status == ReductionStatus::cyclic) {
            ++r.cyclic;
         }
         u64 mask = 0;
         for(std::size_t t = 0; t < config.tracked_ells.size(); ++t) {
            if(std::find(c.obstruction_primes.begin(), c.obstruction_primes.end(), config.tracked_ells[t]) !=
               c.obstruction_primes.end()) {
               mask |= u64(1) << t;
            }
         }
         ++r.mask_counts[mask];
      }
      if(keep != nullptr) {
         (*keep)[i] = std::move(c);
      }
   }
   return r;
}

std::string join(const std::vector<u64>& v) {
   std::string s;
   for(std::size_t i = 0; i < v.size(); ++i) {
      if(i > 0) {
         s += ',';
      }
      s += std::to_string(v[i]);
   }
   return s;
}

[[noreturn]] void corrupt(const std::string& why) {
   throw Error(ErrorCode::CheckpointCorrupt, why);
}

u64 parse_u64(const std::string& s) {
   if(s.empty() || s.size() > 20 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      corrupt("bad unsigned field '" + s + "'");
   }
   try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(s, &pos);
      return v;
   } catch(const std::exception&) {
      corrupt("bad unsigned field '" + s + "'");
   }
}

i64 parse_i64(const std::string& s) {
   const bool neg = !s.empty() && s[0] == '-';
   const u64 mag = parse_u64(neg ? s.substr(1) : s);
   if(mag > (neg ? u64(1) << 63 : (u64(1) << 63) - 1)) {
      corrupt("signed field out of range '" + s + "'");
   }
   return neg ? static_cast<i64>(0 - mag) : static_cast<i64>(mag);
}

std::vector<u64> parse_list(const std::string& s) {
   std::vector<u64> out;
   std::stringstream ss(s);
   std::string item;
   while(std::getline(ss, item, ',')) {
      out.push_back(parse_u64(item));
   }
   if(out.empty() || s.back() == ',') {
      corrupt("bad list '" + s + "'");
   }
   return out;
}

std::string expect_field(std::istream& in, const std::string& key) {
   std::string tok;
   if(!(in >> tok) || tok.rfind(key + "=", 0) != 0) {
      corrupt("expected field '" + key + "'");
   }
   return tok.substr(key.size() + 1);
}

constexpr const char* checkpoint_magic = "cyclored-checkpoint";
constexpr int checkpoint_version = 1;

}  // namespace

std::string format_checkpoint_header(const CheckpointHeader& h) {
   return std::string(checkpoint_magic) + " v" + std::to_string(checkpoint_version) + " A=" + std::to_string(h.A) +
          " B=" + std::to_string(h.B) + " chunk=" + std::to_string(h.chunk_size) + " ells=" + join(h.tracked_ells);
}

std::string format_chunk_record(const ChunkRecord& r) {
   return "chunk " + std::to_string(r.index) + " first=" + std::to_string(r.first_prime) +
          " last=" + std::to_string(r.last_prime) + " primes=" + std::to_string(r.prime_count) +
          " good=" + std::to_string(r.good) + " cyclic=" + std::to_string(r.cyclic) + " masks=" + join(r.mask_counts);
}

Checkpoint parse_checkpoint(std::istream& in) {
   Checkpoint cp;
   std::string line;
   if(!std::getline(in, line)) {
      corrupt("empty checkpoint");
   }
   {
      std::istringstream hs(line);
      std::string magic, version;
      if(!(hs >> magic >> version) || magic != checkpoint_magic || version != "v" + std::to_string(checkpoint_version)) {
         corrupt("bad header line");
      }
      cp.header.A = parse_i64(expect_field(hs, "A"));
      cp.header.B = parse_i64(expect_field(hs, "B"));
      cp.header.chunk_size = parse_u64(expect_field(hs, "chunk"));
      cp.header.tracked_ells = parse_list(expect_field(hs, "ells"));
      std::string extra;
      if(hs >> extra || cp.header.chunk_size == 0 || cp.header.tracked_ells.size() > 16) {
         corrupt("bad header line");
      }
      if(format_checkpoint_header(cp.header) != line) {
         corrupt("non-canonical header line");
      }
   }
   while(std::getline(in, line)) {
      std::istringstream rs(line);
      std::string tag, index;
      if(!(rs >> tag >> index) || tag != "chunk") {
         corrupt("bad record line '" + line + "'");
      }
      ChunkRecord r;
      r.index = parse_u64(index);
      r.first_prime = parse_u64(expect_field(rs, "first"));
      r.last_prime = parse_u64(expect_field(rs, "last"));
      r.prime_count = parse_u64(expect_field(rs, "primes"));
      r.good = parse_u64(expect_field(rs, "good"));
      r.cyclic = parse_u64(expect_field(rs, "cyclic"));
      r.mask_counts = parse_list(expect_field(rs, "masks"));
      std::string extra;
      if(rs >> extra) {
         corrupt("trailing data in record");
      }
      u64 mask_total = 0;
      for(u64 c : r.mask_counts) {
         mask_total += c;
      }
      if(r.mask_counts.size() != (std::size_t(1) << cp.header.tracked_ells.size()) || mask_total != r.good ||
         r.cyclic > r.good || r.good > r.prime_count || r.first_prime > r.last_prime ||
         r.prime_count > cp.header.chunk_size || format_chunk_record(r) != line) {
         corrupt("inconsistent record '" + line + "'");
      }
      cp.records.push_back(std::move(r));
   }
   return cp;
}

std::string serialize_checkpoint(const Checkpoint& cp) {
   std::string out = format_checkpoint_header(cp.header) + "\n";
   for(const auto& r : cp.records) {
      out += format_chunk_record(r) + "\n";
   }
   return out;
}

CensusReport run_census(const CurveOverQ& curve, u64 limit, const CensusConfig& config) {
   if(limit < 2) {
      throw Error(ErrorCode::InvalidArgument, "census limit must be at least 2");
   }
   if(config.tracked_ells.size() > 16 || config.chunk_size == 0) {
      throw Error(ErrorCode::InvalidArgument, "at most 16 tracked primes and a positive chunk size");
   }
   const auto start = std::chrono::steady_clock::now();
   const std::vector<u64> primes = sieve_primes(limit);
   const u64 chunk_count = (primes.size() + config.chunk_size - 1) / config.chunk_size;

   const CheckpointHeader header{curve.A, curve.B, config.chunk_size, config.tracked_ells};
   std::vector<std::optional<ChunkRecord>> done(chunk_count);

   std::ofstream checkpoint_out;
   if(config.checkpoint) {
      const bool exists = std::filesystem::exists(*config.checkpoint);
      if(exists) {
         std::ifstream in(*config.checkpoint);
         const Checkpoint cp = parse_checkpoint(in);
         if(!(cp.header == header)) {
            corrupt("checkpoint belongs to a different census configuration");
         }
         if(!config.keep_classifications) {
            for(const auto& r : cp.records) {
               if(r.index >= chunk_count) {
                  continue;
               }
               const std::size_t begin = r.index * config.chunk_size;
               const std::size_t end = std::min<std::size_t>(primes.size(), begin + config.chunk_size);
               if(r.first_prime == primes[begin] && r.last_prime == primes[end - 1] && r.prime_count == end - begin) {
                  done[r.index] = r;
               }
            }
         }
      }
      checkpoint_out.open(*config.checkpoint, std::ios::app);
      if(!checkpoint_out) {
         throw Error(ErrorCode::Io, "cannot open checkpoint " + config.checkpoint->string());
      }
      if(!exists) {
         checkpoint_out << format_checkpoint_header(header) << '\n' << std::flush;
      }
   }

   CensusReport report{curve, limit, 0, 0, 0, {}, {}, {}, {}, 0};
   if(config.keep_classifications) {
      report.classifications.resize(primes.size());
   }

   std::vector<u64> pending;
   for(u64 i = 0; i < chunk_count; ++i) {
      if(!done[i]) {
         pending.push_back(i);
      }
   }

   std::atomic<std::size_t> next{0};
   std::mutex out_mutex;
   std::exception_ptr failure;
   auto worker = [&] {
      for(;;) {
         const std::size_t slot = next.fetch_add(1);
         if(slot >= pending.size()) {
            return;
         }
         try {
            ChunkRecord r = classify_chunk(
               curve, primes, pending[slot], config, config.keep_classifications ? &report.classifications : nullptr);
            std::lock_guard lock(out_mutex);
            if(checkpoint_out.is_open()) {
               checkpoint_out << format_chunk_record(r) << '\n' << std::flush;
            }
            done[r.index] = std::move(r);
         } catch(...) {
            std::lock_guard lock(out_mutex);
            if(!failure) {
               failure = std::current_exception();
            }
            next = pending.size();
         }
      }
   };
   const unsigned nworkers = std::max(1u, config.workers);
   if(nworkers == 1) {
      worker();
   } else {
      std::vector<std::thread> threads;
      for(unsigned t = 0; t < nworkers; ++t) {
         threads.emplace_back(worker);
      }
      for(auto& t : threads) {
         t.join();
      }
   }
   if(failure) {
      std::rethrow_exception(failure);
   }

   report.total_primes = primes.size();
   report.tracked_ells = config.tracked_ells;
   report.mask_counts.assign(std::size_t(1) << config.tracked_ells.size(), 0);
   for(auto& r : done) {
      report.good_primes += r->good;
      report.cyclic_count += r->cyclic;
      for(std::size_t m = 0; m < r->mask_counts.size(); ++m) {
         report.mask_counts[m] += r->mask_counts[m];
      }
      report.chunks.push_back(std::move(*r));
   }
   report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
   return report;
}

u64 split_count(const CurveOverQ& curve, u64 ell, u64 limit) {
   u64 count = 0;
   for(u64 p : sieve_primes(limit)) {
      if(p == 2 || p == ell || curve.discriminant_mod(p) == 0) {
         continue;
      }
      if(has_full_ell_torsion(reduce(curve, p), ell)) {
         ++count;
      }
   }
   return count;
}

InclusionExclusion inclusion_exclusion_check(const CensusReport& report, u64 n) {
   if(moebius(n) == 0) {
      throw Error(ErrorCode::InvalidArgument, "n must be squarefree");
   }
   InclusionExclusion out;
   for(u64 m : divisors(n)) {
      out.recount += moebius(m) * static_cast<i64>(report.full_torsion_count(m));
   }
   u64 forbidden = 0;
   for(const auto& pp : factorize(n)) {
      forbidden |= u64(1) << tracked_index(report.tracked_ells, pp.prime);
   }
   for(u64 mask = 0; mask < report.mask_counts.size(); ++mask) {
      if((mask & forbidden) == 0) {
         out.direct_count += report.mask_counts[mask];
      }
   }
   return out;
}

InclusionExclusion inclusion_exclusion_check(const CurveOverQ& curve, u64 limit, u64 n) {
   CensusConfig config;
   config.tracked_ells.clear();
   for(const auto& pp : factorize(n)) {
      config.tracked_ells.push_back(pp.prime);
   }
   return inclusion_exclusion_check(run_census(curve, limit, config), n);
}

nlohmann::json census_report_to_json(const CensusReport& report) {
   nlohmann::json split = nlohmann::json::object();
   for(u64 ell : report.tracked_ells) {
      split[std::to_string(ell)] = report.split_count(ell);
   }
   char frac[32];
   std::snprintf(frac, sizeof frac, "%.4f", report.fraction());
   return nlohmann::json{
      {"schema_version", 1},
      {"kind", "census"},
      {"curve",
       {{"A", report.curve.A}, {"B", report.curve.B}, {"discriminant", report.curve.discriminant().get_str()}}},
      {"limit", report.limit},
      {"total_primes", report.total_primes},
      {"good_primes", report.good_primes},
      {"cyclic_count", report.cyclic_count},
      {"fraction", report.fraction()},
      {"fraction_4dp", frac},
      {"split_counts", split},
      {"tracked_ells", report.tracked_ells},
      {"torsion_mask_counts", report.mask_counts},
      {"elapsed_seconds", report.elapsed_seconds},
   };
}

void write_classification_csv(const CensusReport& report, std::ostream& out) {
   if(report.classifications.empty() && report.total_primes > 0) {
      throw Error(ErrorCode::InvalidArgument, "census was run without keep_classifications");
   }
   out << "p,status,group_order,obstructions\n";
   for(const auto& c : report.classifications) {
      std::string obs;
      for(std::size_t i = 0; i < c.obstruction_primes.size(); ++i) {
         obs += (i > 0 ? ";" : "") + std::to_string(c.obstruction_primes[i]);
      }
      out << c.p << ',' << to_string(c.status) << ',' << c.group_order << ',' << obs << '\n';
   }
}

void write_running_fraction_csv(const CensusReport& report, std::ostream& out) {
   out << "x,primes,cyclic,fraction\n";
   u64 primes = 0, cyclic = 0;
   char buf[32];
   auto row = [&](u64 x) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(cyclic) / static_cast<double>(primes));
      out << x << ',' << primes << ',' << cyclic << ',' << buf << '\n';
   };
   if(!report.classifications.empty()) {
      for(const auto& c : report.classifications) {
         ++primes;
         cyclic += c.status == ReductionStatus::cyclic ? 1 : 0;
         row(c.p);
      }
   } else {
      for(const auto& r : report.chunks) {
         primes += r.prime_count;
         cyclic += r.cyclic;
         row(r.last_prime);
      }
   }
}

}  // namespace cyclored
