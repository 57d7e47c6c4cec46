#include "cyclored/galois_image.hpp"

#include <cmath>

#include "cyclored/error.hpp"

namespace cyclored {

namespace {

bool is_square(const mpz_class& v) {
   return v >= 0 && mpz_perfect_square_p(v.get_mpz_t()) != 0;
}

}  // namespace

unsigned two_division_degree(const CurveOverQ& curve) {
   const mpz_class A(static_cast<long>(curve.A));
   const mpz_class B(static_cast<long>(curve.B));
   unsigned roots = 0;
   if(curve.B == 0) {
      // x (x^2 + A)
      roots = is_square(-A) ? 3 : 1;
   } else {
      // Rational roots of a monic integral cubic are integers dividing B.
      const u64 absB = curve.B < 0 ? static_cast<u64>(-(curve.B + 1)) + 1 : static_cast<u64>(curve.B);
      for(u64 d : divisors(absB)) {
         for(int sign : {1, -1}) {
            const mpz_class r = sign * mpz_class(static_cast<unsigned long>(d));
            if(r * r * r + A * r + B == 0) {
               ++roots;
            }
         }
      }
   }
   if(roots == 3) {
      return 1;
   }
   if(roots == 1) {
      return 2;
   }
   return is_square(-4 * A * A * A - 27 * B * B) ? 3 : 6;
}

i64 frobenius_trace(const CurveOverQ& curve, u64 p) {
   const ReducedCurve C = reduce(curve, p);
   return static_cast<i64>(p + 1) - static_cast<i64>(group_order(C));
}

SurjectivityResult certify_surjective(const CurveOverQ& curve, u64 ell, u64 sample_bound) {
   if(ell < 3 || !is_prime(ell)) {
      throw Error(ErrorCode::InvalidPrime,
                  "certification needs a prime ell >= 5 (ell = 2: use two_division_degree), got " + std::to_string(ell));
   }
   SurjectivityResult result;
   ImageFingerprint& fp = result.fingerprint;
   fp.ell = ell;
   const PrimeModulus L(ell);
   for(u64 p : sieve_primes(sample_bound)) {
      if(p == 2 || p == ell || curve.discriminant_mod(p) == 0) {
         continue;
      }
      const i64 ap = frobenius_trace(curve, p);
      if(static_cast<long double>(std::llabs(ap)) > 2 * std::sqrt(static_cast<long double>(p))) {
         throw Error(ErrorCode::BadWitness, "trace outside the Hasse bound at p = " + std::to_string(p));
      }
      ++fp.samples;
      const u64 t = reduce_signed(ap, ell);
      const u64 d = p % ell;
      fp.trace_det_pairs.emplace(t, d);
      if(t != 0) {
         const u64 disc = sub_mod(mul_mod(t, t, ell), mul_mod(4, d, ell), ell);
         const int chi = legendre(disc, L);
         fp.w1 = fp.w1 || chi == -1;
         fp.w2 = fp.w2 || chi == 1;
         const u64 u = mul_mod(mul_mod(t, t, ell), inv_mod(d, ell), ell);
         const u64 golden = add_mod(sub_mod(mul_mod(u, u, ell), mul_mod(3, u, ell), ell), 1, ell);
         const bool exceptional = u == 0 || u == 1 || u == 2 % ell || u == 4 % ell || golden == 0;
         fp.w3 = fp.w3 || !exceptional;
      }
      if(ell >= 5 && fp.w1 && fp.w2 && fp.w3) {
         result.verdict = SurjectivityVerdict::Certified;
         break;
      }
   }
   return result;
}

nlohmann::json fingerprint_to_json(const SurjectivityResult& result) {
   const auto& fp = result.fingerprint;
   nlohmann::json pairs = nlohmann::json::array();
   for(const auto& [t, d] : fp.trace_det_pairs) {
      pairs.push_back({t, d});
   }
   return {{"ell", fp.ell},
           {"verdict", result.certified() ? "certified" : "inconclusive"},
           {"heuristic", true},
           {"samples", fp.samples},
           {"witnesses", {{"W1", fp.w1}, {"W2", fp.w2}, {"W3", fp.w3}}},
           {"trace_det_pairs", pairs}};
}

}  // namespace cyclored
