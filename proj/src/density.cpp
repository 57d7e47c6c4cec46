#include "cyclored/density.hpp"

#include <algorithm>
#include <mutex>

#include "cyclored/error.hpp"

namespace cyclored {

Interval operator*(const Interval& iv, const Rational& r) {
   if(r < 0) {
      throw Error(ErrorCode::InvalidArgument, "interval scaling by a negative rational");
   }
   return {iv.lo * r, iv.hi * r};
}

Interval operator*(const Rational& r, const Interval& iv) {
   return iv * r;
}

bool operator==(const Interval& a, const Interval& b) {
   return a.lo == b.lo && a.hi == b.hi;
}

Rational decimal(const std::string& literal) {
   const auto dot = literal.find('.');
   if(dot == std::string::npos) {
      return Rational(mpz_class(literal, 10));
   }
   const std::string digits = literal.substr(0, dot) + literal.substr(dot + 1);
   mpz_class scale;
   mpz_ui_pow_ui(scale.get_mpz_t(), 10, literal.size() - dot - 1);
   Rational q(mpz_class(digits, 10), scale);
   q.canonicalize();
   return q;
}

mpz_class gl2_order(u64 ell) {
   const mpz_class l(static_cast<unsigned long>(ell));
   return (l * l - 1) * (l * l - l);
}

mpz_class DegreeProfile::degree(u64 ell) const {
   auto it = degrees.find(ell);
   return it == degrees.end() ? gl2_order(ell) : it->second;
}

std::set<u64> DegreeProfile::nonmaximal() const {
   std::set<u64> out;
   for(const auto& [ell, deg] : degrees) {
      if(deg != gl2_order(ell)) {
         out.insert(ell);
      }
   }
   return out;
}

bool DegreeProfile::has_trivial_prime() const {
   return std::any_of(degrees.begin(), degrees.end(), [](const auto& kv) { return kv.second == 1; });
}

namespace {

[[noreturn]] void invalid(const std::string& why) {
   throw Error(ErrorCode::InvalidArgument, why);
}

std::vector<u64> prime_factors(u64 m) {
   std::vector<u64> out;
   for(const auto& pp : factorize(m)) {
      out.push_back(pp.prime);
   }
   return out;
}

}  // namespace

void DegreeProfile::validate() const {
   for(const auto& [ell, deg] : degrees) {
      if(!is_prime(ell)) {
         invalid("degree key " + std::to_string(ell) + " is not prime");
      }
      if(deg < 1 || gl2_order(ell) % deg != 0) {
         invalid("[K_" + std::to_string(ell) + ":K] = " + deg.get_str() + " does not divide #GL_2");
      }
   }
   for(u64 ell : superfluous) {
      if(!is_prime(ell) || charsum.count(ell) != 0) {
         invalid("superfluous prime " + std::to_string(ell) + " is not prime or also carries a character");
      }
   }
   for(u64 ell : charsum) {
      if(!is_prime(ell)) {
         invalid("charsum entry " + std::to_string(ell) + " is not prime");
      }
   }
   if(charsum.size() == 1) {
      invalid("a quadratic-character entanglement needs at least two primes");
   }
   for(const auto& [m, deg] : overrides) {
      const auto ps = prime_factors(m);
      if(ps.size() < 2 || moebius(m) == 0) {
         invalid("override key " + std::to_string(m) + " is not a squarefree composite");
      }
      mpz_class prod = 1, l = 1;
      for(u64 ell : ps) {
         const mpz_class d = degree(ell);
         prod *= d;
         mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
      }
      if(deg < 1 || deg % l != 0 || prod % deg != 0) {
         invalid("[K_" + std::to_string(m) + ":K] = " + deg.get_str() + " is not between lcm and product of its prime degrees");
      }
   }
}

namespace {

mpz_class parse_exact(const nlohmann::json& v, const std::string& what) {
   if(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
      return mpz_class(std::to_string(v.get<unsigned long long>()));
   }
   if(v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      if(!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
         return mpz_class(s);
      }
   }
   throw Error(ErrorCode::SchemaMismatch, what + " must be a non-negative integer");
}

u64 parse_key(const std::string& key) {
   if(key.empty() || key.size() > 19 || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw Error(ErrorCode::SchemaMismatch, "bad integer key '" + key + "'");
   }
   return std::stoull(key);
}

}  // namespace

DegreeProfile profile_from_json(const nlohmann::json& j) {
   if(!j.is_object()) {
      throw Error(ErrorCode::SchemaMismatch, "degree profile must be a JSON object");
   }
   DegreeProfile p;
   for(const auto& [key, value] : j.items()) {
      if(key == "degrees" || key == "overrides") {
         if(!value.is_object()) {
            throw Error(ErrorCode::SchemaMismatch, key + " must be an object");
         }
         auto& target = key == "degrees" ? p.degrees : p.overrides;
         for(const auto& [k, v] : value.items()) {
            target[parse_key(k)] = parse_exact(v, key + "." + k);
         }
      } else if(key == "superfluous" || key == "charsum") {
         if(!value.is_array()) {
            throw Error(ErrorCode::SchemaMismatch, key + " must be an array");
         }
         auto& target = key == "superfluous" ? p.superfluous : p.charsum;
         for(const auto& v : value) {
            const mpz_class z = parse_exact(v, key);
            if(!z.fits_ulong_p()) {
               throw Error(ErrorCode::SchemaMismatch, key + " entry too large");
            }
            target.insert(z.get_ui());
         }
      } else if(key != "label" && key != "comment") {
         throw Error(ErrorCode::SchemaMismatch, "unknown profile field '" + key + "'");
      }
   }
   p.validate();
   return p;
}

nlohmann::json profile_to_json(const DegreeProfile& profile) {
   auto num = [](const mpz_class& z) -> nlohmann::json {
      if(z.fits_ulong_p()) {
         return z.get_ui();
      }
      return z.get_str();
   };
   nlohmann::json degrees = nlohmann::json::object();
   for(const auto& [ell, d] : profile.degrees) {
      degrees[std::to_string(ell)] = num(d);
   }
   nlohmann::json overrides = nlohmann::json::object();
   for(const auto& [m, d] : profile.overrides) {
      overrides[std::to_string(m)] = num(d);
   }
   return {{"degrees", degrees},
           {"superfluous", profile.superfluous},
           {"charsum", profile.charsum},
           {"overrides", overrides}};
}

namespace {

mpz_class product_tree(std::vector<mpz_class>& v, std::size_t lo, std::size_t hi) {
   if(hi - lo == 0) {
      return 1;
   }
   if(hi - lo == 1) {
      return v[lo];
   }
   const std::size_t mid = (lo + hi) / 2;
   return product_tree(v, lo, mid) * product_tree(v, mid, hi);
}

Interval compute_artin_constant(u64 L) {
   std::vector<mpz_class> nums, dens;
   for(u64 ell : sieve_primes(L)) {
      const mpz_class g = gl2_order(ell);
      nums.push_back(g - 1);
      dens.push_back(g);
   }
   Rational partial(product_tree(nums, 0, nums.size()), product_tree(dens, 0, dens.size()));
   partial.canonicalize();
   // sum_{n > L} 1/((n^2-1)(n^2-n)) <= 1/L^3 by telescoping against 1/(n-1)^3 - 1/n^3.
   mpz_class cube = static_cast<unsigned long>(L);
   cube = cube * cube * cube;
   const Rational keep(cube - 1, cube);
   return {partial * keep, partial};
}

}  // namespace

Interval artin_constant(u64 L) {
   if(L < 2) {
      throw Error(ErrorCode::InvalidArgument, "truncation bound must be at least 2");
   }
   static std::mutex mutex;
   static std::map<u64, Interval> cache;
   {
      std::lock_guard lock(mutex);
      if(auto it = cache.find(L); it != cache.end()) {
         return it->second;
      }
   }
   Interval iv = compute_artin_constant(L);
   std::lock_guard lock(mutex);
   return cache.emplace(L, std::move(iv)).first->second;
}

namespace {

Rational euler_factor(const mpz_class& deg) {
   return Rational(deg - 1, deg);
}

Rational naive_ratio(const DegreeProfile& profile) {
   Rational r = 1;
   for(u64 ell : profile.nonmaximal()) {
      r *= euler_factor(profile.degree(ell)) / euler_factor(gl2_order(ell));
   }
   return r;
}

}  // namespace

Interval naive_density(const DegreeProfile& profile, u64 L) {
   return artin_constant(L) * naive_ratio(profile);
}

mpz_class composite_degree(u64 m, const DegreeProfile& profile) {
   const auto ps = prime_factors(m);
   if(ps.size() == 1) {
      return profile.degree(ps.front());
   }
   if(auto it = profile.overrides.find(m); it != profile.overrides.end()) {
      return it->second;
   }
   mpz_class prod = 1;
   for(u64 ell : ps) {
      if(ps.size() > 1 && profile.superfluous.count(ell) != 0) {
         throw Error(ErrorCode::MissingDegree,
                     "[K_" + std::to_string(m) + ":K] involves the containment at " + std::to_string(ell) +
                        "; supply an override");
      }
      prod *= profile.degree(ell);
   }
   const bool covers_character = !profile.charsum.empty() &&
                                 std::all_of(profile.charsum.begin(), profile.charsum.end(), [&](u64 ell) {
                                    return std::find(ps.begin(), ps.end(), ell) != ps.end();
                                 });
   if(covers_character) {
      prod /= 2;
   }
   return prod;
}

Rational delta_partial(u64 n, const DegreeProfile& profile) {
   if(n == 0 || moebius(n) == 0) {
      throw Error(ErrorCode::InvalidArgument, "delta_partial needs a squarefree positive n");
   }
   Rational sum = 0;
   for(u64 m : divisors(n)) {
      sum += Rational(moebius(m), composite_degree(m, profile));
   }
   return sum;
}

Interval delta_factored(u64 N, const Rational& deltaN, const DegreeProfile& profile, u64 L) {
   if(N == 0 || moebius(N) == 0) {
      throw Error(ErrorCode::InvalidArgument, "delta_factored needs a squarefree modulus");
   }
   for(u64 ell : profile.nonmaximal()) {
      if(N % ell != 0) {
         throw Error(ErrorCode::ProfileLeak, "nonmaximal prime " + std::to_string(ell) + " does not divide N");
      }
   }
   // The factors for ell | N are removed from the generic product.
   Rational removed = 1;
   for(u64 ell : prime_factors(N)) {
      removed *= euler_factor(gl2_order(ell));
   }
   return artin_constant(L) * (deltaN / removed);
}

Rational c_factor(const DegreeProfile& profile, const Rational& alpha) {
   return alpha * naive_ratio(profile);
}

Rational charsum_alpha(std::span<const mpz_class> degrees) {
   if(degrees.size() < 2) {
      throw Error(ErrorCode::InvalidArgument, "character sum needs at least two degrees");
   }
   Rational prod = 1;
   for(const auto& d : degrees) {
      if(d == 1) {
         throw Error(ErrorCode::DegreeOne, "degree 1 in the character-sum formula");
      }
      prod *= Rational(-1, d - 1);
   }
   return 1 + prod;
}

Rational charsum_alpha(const std::map<u64, mpz_class>& degrees) {
   std::vector<mpz_class> v;
   for(const auto& [ell, d] : degrees) {
      v.push_back(d);
   }
   return charsum_alpha(v);
}

Rational superfluous_correction(const DegreeProfile& profile) {
   Rational r = 1;
   for(u64 ell : profile.superfluous) {
      const mpz_class d = profile.degree(ell);
      if(d == 1) {
         throw Error(ErrorCode::DegreeOne, "superfluous prime with degree 1");
      }
      r /= euler_factor(d);
   }
   return r;
}

Rational override_alpha(const DegreeProfile& profile) {
   if(profile.overrides.empty()) {
      return 1;
   }
   DegreeProfile plain = profile;
   plain.charsum.clear();
   std::set<u64> primes;
   for(const auto& [m, deg] : profile.overrides) {
      for(u64 ell : prime_factors(m)) {
         primes.insert(ell);
      }
   }
   u64 M = 1;
   Rational naive_part = 1;
   for(u64 ell : primes) {
      M *= ell;
      naive_part *= euler_factor(plain.degree(ell));
   }
   if(naive_part == 0) {
      return 1;  // undefined under trivial vanishing; the naive factor is already zero
   }
   return delta_partial(M, plain) / naive_part;
}

u64 entanglement_modulus(const CurveOverQ& curve, const std::set<u64>& nonmaximal, i64 disc_K) {
   std::set<u64> primes{2, 3, 5};
   if(disc_K == 0) {
      throw Error(ErrorCode::InvalidArgument, "field discriminant must be nonzero");
   }
   const u64 dk = disc_K < 0 ? static_cast<u64>(-(disc_K + 1)) + 1 : static_cast<u64>(disc_K);
   for(u64 ell : prime_factors(dk)) {
      primes.insert(ell);
   }
   mpz_class delta = abs(curve.discriminant());
   for(unsigned long q = 2; q < 1000000 && q * q <= delta; ++q) {
      if(mpz_divisible_ui_p(delta.get_mpz_t(), q)) {
         primes.insert(q);
         while(mpz_divisible_ui_p(delta.get_mpz_t(), q)) {
            delta /= q;
         }
      }
   }
   if(delta > 1) {
      if(!delta.fits_ulong_p() || delta.get_ui() >= (u64(1) << 62)) {
         throw Error(ErrorCode::InvalidArgument, "discriminant cofactor too large to factor: " + delta.get_str());
      }
      for(u64 ell : prime_factors(delta.get_ui())) {
         primes.insert(ell);
      }
   }
   for(u64 ell : nonmaximal) {
      primes.insert(ell);
   }
   u64 N = 1;
   for(u64 ell : primes) {
      if(N > UINT64_MAX / ell) {
         throw Error(ErrorCode::InvalidArgument, "entanglement modulus overflows 64 bits");
      }
      N *= ell;
   }
   return N;
}

std::string_view to_string(Vanishing v) {
   switch(v) {
      case Vanishing::positive: return "positive";
      case Vanishing::trivial: return "trivial";
      case Vanishing::non_trivial: return "non_trivial";
   }
   return "?";
}

Vanishing classify_vanishing(const Interval& naive, const Rational& alpha, const DegreeProfile& profile) {
   if(profile.has_trivial_prime()) {
      return Vanishing::trivial;
   }
   if(naive.lo > 0 && alpha == 0) {
      return Vanishing::non_trivial;
   }
   if(naive.lo > 0 && alpha > 0) {
      return Vanishing::positive;
   }
   throw Error(ErrorCode::Indeterminate, "naive density enclosure does not separate from zero");
}

DensityReport compute_density(const DegreeProfile& profile, u64 L) {
   profile.validate();
   DensityReport r;
   r.truncation = L;
   r.A_inf = artin_constant(L);
   r.naive_ratio = naive_ratio(profile);
   r.naive = r.A_inf * r.naive_ratio;
   if(!profile.charsum.empty()) {
      std::vector<mpz_class> degs;
      for(u64 ell : profile.charsum) {
         degs.push_back(profile.degree(ell));
      }
      r.charsum_factor = charsum_alpha(degs);
   } else {
      r.charsum_factor = 1;
   }
   r.superfluous_factor = superfluous_correction(profile);
   r.override_factor = override_alpha(profile);
   r.alpha = r.charsum_factor * r.superfluous_factor * r.override_factor;
   r.c_factor = c_factor(profile, r.alpha);
   r.delta = r.naive * r.alpha;
   r.vanishing = classify_vanishing(r.naive, r.alpha, profile);
   return r;
}

namespace {

std::string fixed_point(const mpz_class& scaled, unsigned digits) {
   std::string s = mpz_class(abs(scaled)).get_str();
   if(s.size() <= digits) {
      s.insert(0, digits + 1 - s.size(), '0');
   }
   s.insert(s.size() - digits, ".");
   return (scaled < 0 ? "-" : "") + s;
}

mpz_class ten_pow(unsigned digits) {
   mpz_class scale;
   mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
   return scale;
}

}  // namespace

std::string decimal_floor(const Rational& q, unsigned digits) {
   const Rational scaled = q * ten_pow(digits);
   mpz_class f;
   mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
   return fixed_point(f, digits);
}

std::string decimal_ceil(const Rational& q, unsigned digits) {
   const Rational scaled = q * ten_pow(digits);
   mpz_class c;
   mpz_cdiv_q(c.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
   return fixed_point(c, digits);
}

namespace {

nlohmann::json rational_json(const Rational& q) {
   return {{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}, {"decimal", decimal_floor(q)}};
}

nlohmann::json interval_json(const Interval& iv) {
   return {{"lo", decimal_floor(iv.lo)}, {"hi", decimal_ceil(iv.hi)}};
}

}  // namespace

nlohmann::json density_report_to_json(const DensityReport& r) {
   return {
      {"schema_version", 1},
      {"kind", "density"},
      {"truncation", r.truncation},
      {"A_inf", interval_json(r.A_inf)},
      {"naive", interval_json(r.naive)},
      {"naive_ratio", rational_json(r.naive_ratio)},
      {"charsum_factor", rational_json(r.charsum_factor)},
      {"superfluous_factor", rational_json(r.superfluous_factor)},
      {"override_factor", rational_json(r.override_factor)},
      {"alpha", rational_json(r.alpha)},
      {"c_factor", rational_json(r.c_factor)},
      {"delta", interval_json(r.delta)},
      {"vanishing", std::string(to_string(r.vanishing))},
   };
}

}  // namespace cyclored
