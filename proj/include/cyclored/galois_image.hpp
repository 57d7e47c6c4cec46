#pragma once

// Division-field degree data from the curve itself: the exact degree of the
// 2-division field, Frobenius traces, and a one-sided witness test for
// surjectivity of the mod-ell representation.

#include <cstdint>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "cyclored/curve.hpp"

namespace cyclored {

/// Degree of the splitting field of x^3 + Ax + B over Q: 1, 2, 3 or 6.
unsigned two_division_degree(const CurveOverQ& curve);

/// a_p = p + 1 - #E(F_p). Throws BadReduction.
i64 frobenius_trace(const CurveOverQ& curve, u64 p);

struct ImageFingerprint {
      u64 ell = 0;
      u64 samples = 0;
      bool w1 = false;  ///< t != 0 and t^2 - 4d a nonzero nonsquare: not Borel, not split-Cartan normalizer
      bool w2 = false;  ///< t != 0 and t^2 - 4d a nonzero square: not nonsplit-Cartan normalizer
      bool w3 = false;  ///< t != 0 and u = t^2/d outside the exceptional values
      /// Observed (a_p mod ell, p mod ell).
      std::set<std::pair<u64, u64>> trace_det_pairs;
};

enum class SurjectivityVerdict { Certified, Inconclusive };

struct SurjectivityResult {
      SurjectivityVerdict verdict = SurjectivityVerdict::Inconclusive;
      ImageFingerprint fingerprint;

      bool certified() const { return verdict == SurjectivityVerdict::Certified; }
};

/// Samples good primes p <= sample_bound in increasing order and stops at
/// the first prime completing all three witnesses. Certified is a proof
/// (given surjective determinant); Inconclusive claims nothing. ell = 3 only
/// collects a fingerprint. Throws InvalidPrime for ell < 3 or composite ell.
SurjectivityResult certify_surjective(const CurveOverQ& curve, u64 ell, u64 sample_bound = 10000);

nlohmann::json fingerprint_to_json(const SurjectivityResult& result);

}  // namespace cyclored
