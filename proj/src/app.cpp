#include "cyclored/app.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cyclored/entangle.hpp"
#include "cyclored/error.hpp"
#include "cyclored/galois_image.hpp"

#ifdef CYCLORED_WITH_REMOTE
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#endif

#ifndef CYCLORED_DEFAULT_FIXTURES
#define CYCLORED_DEFAULT_FIXTURES "fixtures"
#endif

namespace cyclored {

int exit_code_for(const Error& e) {
   switch(e.code()) {
      case ErrorCode::Io:
      case ErrorCode::FixtureMissing:
      case ErrorCode::CheckpointCorrupt:
      case ErrorCode::RemoteDisabled:
         return exit_io;
      case ErrorCode::IterationCap:
      case ErrorCode::BadWitness:
      case ErrorCode::Indeterminate:
         return exit_internal;
      default:
         return exit_usage;
   }
}

namespace {

DegreeProfile make_profile(std::map<u64, mpz_class> degrees, std::set<u64> superfluous, std::set<u64> charsum) {
   DegreeProfile p;
   p.degrees = std::move(degrees);
   p.superfluous = std::move(superfluous);
   p.charsum = std::move(charsum);
   return p;
}

}  // namespace

const std::vector<CurveSpec>& registry() {
   static const std::vector<CurveSpec> curves{
      {"serre-ex1", -3, 1, make_profile({{2, 3}}, {}, {}),
       ExpectedValues{1000000, 78498, 51105, "0.6510", "0.6510015", "0.6510015", std::nullopt}},
      {"serre-ex2", 2, 3, make_profile({{2, 2}}, {11}, {}),
       ExpectedValues{1000000, 78498, 38383, "0.4889", "0.48825114", "0.4882881", std::nullopt}},
      {"serre-ex3", -12096, -544752, make_profile({{3, 2}}, {}, {2, 19}),
       ExpectedValues{1000000, 78498, 32652, "0.4159", "0.4155329", "0.4155335", std::nullopt}},
      {"serre-ex4", 1, 3, make_profile({}, {}, {2, 13, 19}),
       ExpectedValues{1000000, 78498, 63910, "0.8141", "0.8137519", std::nullopt, "0.999999999938"}},
      {"serre-ex5", -13392, -1080432, make_profile({{5, 4}}, {}, {2, 11}),
       ExpectedValues{1000000, 78498, 48026, "0.6118", "0.6115881", "0.6115973", std::nullopt}},
   };
   return curves;
}

const CurveSpec& registry_lookup(const std::string& label) {
   for(const auto& c : registry()) {
      if(c.label == label) {
         return c;
      }
   }
   throw Error(ErrorCode::InvalidArgument, "unknown curve label '" + label + "'");
}

bool matches_printed(const Interval& iv, const std::string& printed) {
   const auto dot = printed.find('.');
   const std::size_t digits = dot == std::string::npos ? 0 : printed.size() - dot - 1;
   mpz_class scale;
   mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
   const Rational unit(mpz_class(1), scale);
   const Rational v = decimal(printed);
   return v - unit / 2 <= iv.lo && iv.hi < v + unit;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
   const std::filesystem::path tmp = path.string() + ".tmp";
   {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if(!out) {
         throw Error(ErrorCode::Io, "cannot write " + tmp.string());
      }
      out << content;
      out.flush();
      if(!out) {
         throw Error(ErrorCode::Io, "write failed for " + tmp.string());
      }
   }
   std::error_code ec;
   std::filesystem::rename(tmp, path, ec);
   if(ec) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::Io, "cannot rename onto " + path.string());
   }
}

std::string dump_report(const nlohmann::json& report) {
   return report.dump(2) + "\n";
}

nlohmann::json load_report(const std::filesystem::path& path) {
   std::ifstream in(path);
   if(!in) {
      throw Error(ErrorCode::Io, "cannot read " + path.string());
   }
   try {
      return nlohmann::json::parse(in);
   } catch(const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
   }
}

bool remote_ingestion_enabled() {
#ifdef CYCLORED_WITH_REMOTE
   return true;
#else
   return false;
#endif
}

IngestSource default_ingest_source() {
   IngestSource s;
   const char* env = std::getenv("CYCLORED_FIXTURES");
   s.fixture_dir = env != nullptr && *env != '\0' ? env : CYCLORED_DEFAULT_FIXTURES;
   return s;
}

namespace {

[[noreturn]] void schema(const std::string& what) {
   throw Error(ErrorCode::SchemaMismatch, "degree payload: " + what);
}

// (level, index) from "level.index.genus.n" or {"level": .., "index": ..}.
std::pair<u64, u64> image_level_index(const nlohmann::json& img) {
   if(img.is_object()) {
      if(!img.contains("level") || !img.contains("index") || !img["level"].is_number_unsigned() ||
         !img["index"].is_number_unsigned()) {
         schema("image objects need unsigned 'level' and 'index'");
      }
      return {img["level"].get<u64>(), img["index"].get<u64>()};
   }
   if(!img.is_string()) {
      schema("image entries must be labels or objects");
   }
   const std::string s = img.get<std::string>();
   std::vector<std::string> parts;
   std::stringstream ss(s);
   for(std::string part; std::getline(ss, part, '.');) {
      parts.push_back(part);
   }
   if(parts.size() < 2) {
      schema("image label '" + s + "' is not level.index.*");
   }
   try {
      std::size_t used = 0;
      const u64 level = std::stoull(parts[0], &used);
      if(used != parts[0].size()) {
         schema("image label '" + s + "' has a non-numeric level");
      }
      const u64 index = std::stoull(parts[1], &used);
      if(used != parts[1].size()) {
         schema("image label '" + s + "' has a non-numeric index");
      }
      return {level, index};
   } catch(const std::logic_error&) {
      schema("image label '" + s + "' is not level.index.*");
   }
}

std::filesystem::path fixture_path(const IngestSource& source, const std::string& label) {
   return source.fixture_dir / (label + ".json");
}

#ifdef CYCLORED_WITH_REMOTE
void fetch_remote(const IngestSource& source, const CurveOverQ& curve, const std::filesystem::path& cache) {
   httplib::Client client(source.endpoint);
   client.set_follow_location(true);
   const std::string query = "/api/ec_curvedata/?_format=json&_fields=ainvs,nonmax_primes,modell_images&ainvs=li0,0,0," +
                             std::to_string(curve.A) + "," + std::to_string(curve.B);
   const auto res = client.Get(query);
   if(!res || res->status != 200) {
      throw Error(ErrorCode::Io, "remote fetch failed for " + curve.to_string());
   }
   nlohmann::json payload;
   try {
      payload = nlohmann::json::parse(res->body);
   } catch(const nlohmann::json::parse_error& e) {
      schema(std::string("remote payload is not JSON: ") + e.what());
   }
   degrees_from_payload(payload, curve);
   std::filesystem::create_directories(cache.parent_path());
   atomic_write(cache, dump_report(payload));
}
#endif

}  // namespace

DegreeProfile degrees_from_payload(const nlohmann::json& payload, const std::optional<CurveOverQ>& curve) {
   if(!payload.is_object() || !payload.contains("data") || !payload["data"].is_array() || payload["data"].size() != 1) {
      schema("expected {\"data\": [one record]}");
   }
   const auto& rec = payload["data"][0];
   if(!rec.is_object() || !rec.contains("nonmax_primes") || !rec["nonmax_primes"].is_array() ||
      !rec.contains("modell_images") || !rec["modell_images"].is_array()) {
      schema("record needs 'nonmax_primes' and 'modell_images' arrays");
   }
   if(curve) {
      const std::vector<i64> want{0, 0, 0, curve->A, curve->B};
      if(!rec.contains("ainvs") || !rec["ainvs"].is_array() || rec["ainvs"].get<std::vector<i64>>() != want) {
         schema("ainvs do not match " + curve->to_string());
      }
   }
   std::set<u64> nonmax;
   for(const auto& l : rec["nonmax_primes"]) {
      if(!l.is_number_unsigned() || !is_prime(l.get<u64>())) {
         schema("nonmax_primes must hold primes");
      }
      nonmax.insert(l.get<u64>());
   }
   DegreeProfile profile;
   for(const auto& img : rec["modell_images"]) {
      const auto [level, index] = image_level_index(img);
      if(!nonmax.contains(level)) {
         schema("image at level " + std::to_string(level) + " is not a listed nonmaximal prime");
      }
      const mpz_class gl2 = gl2_order(level);
      if(index == 0 || gl2 % index != 0) {
         schema("index " + std::to_string(index) + " does not divide #GL_2(F_" + std::to_string(level) + ")");
      }
      profile.degrees[level] = gl2 / index;
   }
   for(u64 ell : nonmax) {
      if(!profile.degrees.contains(ell)) {
         schema("no image given for nonmaximal prime " + std::to_string(ell));
      }
   }
   profile.validate();
   return profile;
}

DegreeProfile ingest_degrees(const IngestSource& source, const std::string& label) {
   std::optional<CurveOverQ> curve;
   for(const auto& c : registry()) {
      if(c.label == label) {
         curve = c.curve();
      }
   }
   const auto path = fixture_path(source, label);
   if(!std::filesystem::exists(path)) {
      if(!source.remote) {
         throw Error(ErrorCode::FixtureMissing, "no fixture at " + path.string());
      }
#ifdef CYCLORED_WITH_REMOTE
      if(!curve) {
         throw Error(ErrorCode::InvalidArgument, "remote ingestion needs a registry label");
      }
      fetch_remote(source, *curve, path);
#else
      throw Error(ErrorCode::RemoteDisabled, "built without remote ingestion");
#endif
   }
   return degrees_from_payload(load_report(path), curve);
}

namespace {

CurveSpec resolve_curve(const CurveChoice& c) {
   if(c.label) {
      if(c.A || c.B) {
         throw Error(ErrorCode::InvalidArgument, "give either --label or --a/--b, not both");
      }
      return registry_lookup(*c.label);
   }
   if(!c.A || !c.B) {
      throw Error(ErrorCode::InvalidArgument, "a curve needs --label or both --a and --b");
   }
   CurveSpec spec;
   spec.label = "custom";
   spec.A = *c.A;
   spec.B = *c.B;
   spec.curve();  // rejects singular models
   return spec;
}

void emit(const nlohmann::json& doc, const std::optional<std::filesystem::path>& output, std::ostream& out) {
   if(output) {
      atomic_write(*output, dump_report(doc));
   } else {
      out << dump_report(doc);
   }
}

// Runs `body`, mapping library errors onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
   try {
      return body();
   } catch(const Error& e) {
      err << "error: " << e.what() << '\n';
      return exit_code_for(e);
   } catch(const std::filesystem::filesystem_error& e) {
      err << "error: " << e.what() << '\n';
      return exit_io;
   }
}

Rational fraction_of(const CensusReport& r) {
   Rational q(mpz_class(static_cast<unsigned long>(r.cyclic_count)), mpz_class(static_cast<unsigned long>(r.total_primes)));
   q.canonicalize();
   return q;
}

}  // namespace

nlohmann::json census_document(const CurveSpec& spec, const CensusReport& report) {
   nlohmann::json doc = census_report_to_json(report);
   doc["label"] = spec.label;
   if(spec.expected && spec.expected->limit == report.limit) {
      const auto& e = *spec.expected;
      doc["expected"] = {{"total_primes", e.total_primes},
                         {"cyclic_count", e.cyclic_count},
                         {"fraction", e.fraction},
                         {"matches", report.total_primes == e.total_primes && report.cyclic_count == e.cyclic_count &&
                                        matches_printed(Interval::point(fraction_of(report)), e.fraction)}};
   }
   return doc;
}

int cli_census(const CensusOptions& opt, std::ostream& out, std::ostream& err) {
   return guarded(err, [&] {
      const CurveSpec spec = resolve_curve(opt.curve);
      if(opt.limit < 2) {
         throw Error(ErrorCode::InvalidArgument, "--limit must be at least 2");
      }
      CensusConfig cfg;
      cfg.workers = opt.workers != 0 ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
      cfg.chunk_size = opt.chunk_size;
      cfg.checkpoint = opt.checkpoint;
      cfg.keep_classifications = opt.classification_csv.has_value() || opt.running_csv.has_value();
      const CensusReport report = run_census(spec.curve(), opt.limit, cfg);
      const nlohmann::json doc = census_document(spec, report);
      emit(doc, opt.output, out);
      if(opt.classification_csv) {
         std::ostringstream csv;
         write_classification_csv(report, csv);
         atomic_write(*opt.classification_csv, csv.str());
      }
      if(opt.running_csv) {
         std::ostringstream csv;
         write_running_fraction_csv(report, csv);
         atomic_write(*opt.running_csv, csv.str());
      }
      std::ostream& log = opt.output ? out : err;
      log << spec.label << ' ' << spec.curve().to_string() << " x=" << report.limit
          << " primes=" << report.total_primes << " good=" << report.good_primes << " cyclic=" << report.cyclic_count
          << " fraction=" << doc["fraction_4dp"].get<std::string>() << " (" << report.elapsed_seconds << " s)\n";
      if(doc.contains("expected") && !doc["expected"]["matches"].get<bool>()) {
         err << "mismatch: expected cyclic=" << spec.expected->cyclic_count << " fraction=" << spec.expected->fraction
             << '\n';
         return int(exit_mismatch);
      }
      return int(exit_ok);
   });
}

nlohmann::json density_document(const CurveSpec* spec, const DegreeProfile& profile, const DensityReport& report) {
   nlohmann::json doc = density_report_to_json(report);
   doc["profile"] = profile_to_json(profile);
   if(spec == nullptr) {
      return doc;
   }
   doc["label"] = spec->label;
   const CurveOverQ curve = spec->curve();
   doc["curve"] = {{"A", curve.A}, {"B", curve.B}, {"discriminant", curve.discriminant().get_str()}};
   nlohmann::json images = nlohmann::json::array();
   for(u64 ell : {5, 7}) {
      images.push_back(fingerprint_to_json(certify_surjective(curve, ell)));
   }
   doc["provenance"] = {{"entanglement_modulus", entanglement_modulus(curve, profile.nonmaximal())},
                        {"two_division_degree", two_division_degree(curve)},
                        {"images", images}};
   if(spec->expected) {
      const auto& e = *spec->expected;
      bool ok = matches_printed(report.naive, e.naive);
      nlohmann::json exp = {{"naive", e.naive}};
      if(e.delta) {
         exp["delta"] = *e.delta;
         ok = ok && matches_printed(report.delta, *e.delta);
      }
      if(e.alpha) {
         exp["alpha"] = *e.alpha;
         ok = ok && matches_printed(Interval::point(report.alpha), *e.alpha);
      }
      exp["matches"] = ok;
      doc["expected"] = exp;
   }
   return doc;
}

int cli_density(const DensityOptions& opt, std::ostream& out, std::ostream& err) {
   return guarded(err, [&] {
      if(opt.label && opt.profile) {
         throw Error(ErrorCode::InvalidArgument, "give either --label or --profile, not both");
      }
      const CurveSpec* spec = nullptr;
      DegreeProfile profile;
      if(opt.label) {
         spec = &registry_lookup(*opt.label);
         profile = spec->profile;
      } else if(opt.profile) {
         profile = profile_from_json(load_report(*opt.profile));
      }
      bool modified = false;
      if(opt.from_fixtures) {
         if(!opt.label) {
            throw Error(ErrorCode::InvalidArgument, "--from-fixtures needs --label");
         }
         IngestSource src = default_ingest_source();
         if(opt.fixture_dir) {
            src.fixture_dir = *opt.fixture_dir;
         }
         const DegreeProfile ingested = ingest_degrees(src, *opt.label);
         modified = ingested.degrees != profile.degrees;
         profile.degrees = ingested.degrees;
      }
      if(opt.charsum) {
         profile.charsum = std::set<u64>(opt.charsum->begin(), opt.charsum->end());
         modified = true;
      }
      if(opt.superfluous) {
         profile.superfluous = std::set<u64>(opt.superfluous->begin(), opt.superfluous->end());
         modified = true;
      }
      const DensityReport report = compute_density(profile, opt.truncation);
      CurveSpec adjusted;
      if(spec != nullptr && modified) {
         adjusted = *spec;
         adjusted.expected.reset();
         spec = &adjusted;
      }
      const nlohmann::json doc = density_document(spec, profile, report);
      emit(doc, opt.output, out);

      std::ostream& log = opt.output ? out : err;
      log << "delta  in [" << decimal_floor(report.delta.lo) << ", " << decimal_ceil(report.delta.hi) << "]\n"
          << "naive  in [" << decimal_floor(report.naive.lo) << ", " << decimal_ceil(report.naive.hi) << "]\n"
          << "A_inf  in [" << decimal_floor(report.A_inf.lo) << ", " << decimal_ceil(report.A_inf.hi) << "]\n"
          << "alpha  = " << report.alpha.get_str() << '\n'
          << "c      = " << report.c_factor.get_str() << '\n'
          << "vanishing: " << to_string(report.vanishing) << '\n';
      if(doc.contains("expected") && !doc["expected"]["matches"].get<bool>()) {
         err << "mismatch against the registry's printed values\n";
         return int(exit_mismatch);
      }
      return int(exit_ok);
   });
}

int cli_galois(const GaloisOptions& opt, std::ostream& out, std::ostream& err) {
   return guarded(err, [&] {
      const CurveSpec spec = resolve_curve(opt.curve);
      const CurveOverQ curve = spec.curve();
      nlohmann::json images = nlohmann::json::array();
      for(u64 ell : opt.ells) {
         images.push_back(fingerprint_to_json(certify_surjective(curve, ell, opt.sample_bound)));
      }
      const nlohmann::json doc = {{"schema_version", 1},
                                  {"kind", "galois"},
                                  {"label", spec.label},
                                  {"curve", {{"A", curve.A}, {"B", curve.B}}},
                                  {"two_division_degree", two_division_degree(curve)},
                                  {"sample_bound", opt.sample_bound},
                                  {"images", images}};
      emit(doc, opt.output, out);
      std::ostream& log = opt.output ? out : err;
      log << spec.label << " [K_2:Q] = " << two_division_degree(curve) << '\n';
      for(const auto& img : images) {
         log << "ell=" << img["ell"] << ": " << img["verdict"].get<std::string>() << " after " << img["samples"]
             << " primes (heuristic)\n";
      }
      return int(exit_ok);
   });
}

int cli_entangle(const EntangleOptions& opt, std::ostream& out, std::ostream& err) {
   return guarded(err, [&] {
      const EntangleResult r = run_group_description(load_report(opt.input));
      emit(entangle_result_to_json(r), opt.output, out);
      std::ostream& log = opt.output ? out : err;
      log << r.construction << ": |G| = " << r.order.get_str() << ", delta = " << r.delta.get_str()
          << ", naive = " << r.naive.get_str() << '\n';
      return int(exit_ok);
   });
}

int cli_constants(const ConstantsOptions& opt, std::ostream& out, std::ostream& err) {
   return guarded(err, [&] {
      if(opt.truncation < 2) {
         throw Error(ErrorCode::InvalidArgument, "--L must be at least 2");
      }
      const Interval a = artin_constant(opt.truncation);
      const nlohmann::json doc = {{"schema_version", 1},
                                  {"kind", "constants"},
                                  {"truncation", opt.truncation},
                                  {"A_inf", {{"lo", decimal_floor(a.lo)}, {"hi", decimal_ceil(a.hi)}}},
                                  {"width_upper", decimal_ceil(a.width(), 25)}};
      emit(doc, opt.output, out);
      std::ostream& log = opt.output ? out : err;
      log << "A_inf in [" << decimal_floor(a.lo) << ", " << decimal_ceil(a.hi) << "]\n";
      return int(exit_ok);
   });
}

}  // namespace cyclored
