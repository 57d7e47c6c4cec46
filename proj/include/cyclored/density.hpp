#pragma once

// Exact densities of cyclic reduction: the elliptic Artin constant as a
// rigorous interval, naive Euler products over division-field degrees,
// inclusion-exclusion partial sums and the rational entanglement
// corrections. Infinite products are intervals; everything else is an
// exact rational.

#include <gmpxx.h>

#include <map>
#include <set>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "cyclored/curve.hpp"

namespace cyclored {

using Rational = mpq_class;

/// Closed interval [lo, hi] of rationals enclosing a real number.
struct Interval {
      Rational lo;
      Rational hi;

      static Interval point(const Rational& v) { return {v, v}; }

      Rational width() const { return hi - lo; }
      bool contains(const Rational& v) const { return lo <= v && v <= hi; }
      bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

/// Scale by a non-negative rational.
Interval operator*(const Interval& iv, const Rational& r);
Interval operator*(const Rational& r, const Interval& iv);
bool operator==(const Interval& a, const Interval& b);

/// Parses a decimal literal such as "0.8137519" into an exact rational.
Rational decimal(const std::string& literal);

/// Division-field degree data [K_ell : K]. Primes not listed are maximal.
struct DegreeProfile {
      std::map<u64, mpz_class> degrees;
      /// Primes whose non-splitting condition is implied by a smaller division field.
      std::set<u64> superfluous;
      /// Primes of 2D carrying one index-2 quadratic-character entanglement.
      std::set<u64> charsum;
      /// [K_m : K] for squarefree composite m where multiplicativity fails.
      std::map<u64, mpz_class> overrides;

      /// [K_ell : K], defaulting to #GL_2(F_ell).
      mpz_class degree(u64 ell) const;

      /// Primes with degree below #GL_2(F_ell), increasing.
      std::set<u64> nonmaximal() const;

      bool has_trivial_prime() const;

      /// Throws InvalidArgument when an invariant is violated.
      void validate() const;
};

DegreeProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DegreeProfile& profile);

/// (ell^2 - 1)(ell^2 - ell).
mpz_class gl2_order(u64 ell);

/// Enclosure of prod over primes (1 - 1/#GL_2(F_ell)) truncated at L with the
/// tail bound 1/L^3. Memoized per L.
Interval artin_constant(u64 L);

/// prod over all primes (1 - 1/[K_ell : K]).
Interval naive_density(const DegreeProfile& profile, u64 L);

/// [K_m : K] for squarefree m, resolved from the profile annotations.
mpz_class composite_degree(u64 m, const DegreeProfile& profile);

/// sum over m | n of mu(m) / [K_m : K], exact.
Rational delta_partial(u64 n, const DegreeProfile& profile);

/// deltaN * prod over ell not dividing N of (1 - 1/[K_ell : K]).
Interval delta_factored(u64 N, const Rational& deltaN, const DegreeProfile& profile, u64 L);

/// alpha * prod over nonmaximal ell of (1 - 1/deg) / (1 - 1/#GL_2), so that delta = c * A_inf.
Rational c_factor(const DegreeProfile& profile, const Rational& alpha);

/// 1 + prod (-1 / (deg - 1)). Needs at least two degrees; throws DegreeOne on a pole.
Rational charsum_alpha(std::span<const mpz_class> degrees);
Rational charsum_alpha(const std::map<u64, mpz_class>& degrees);

/// prod over superfluous ell of 1 / (1 - 1/[K_ell : K]).
Rational superfluous_correction(const DegreeProfile& profile);

/// delta_partial(M) / prod over ell | M of (1 - 1/deg), M the product of
/// primes named in composite overrides (1 when there are none).
Rational override_alpha(const DegreeProfile& profile);

/// Squarefree N collecting ell | 30 disc_K, ell | disc(E), and the nonmaximal primes.
u64 entanglement_modulus(const CurveOverQ& curve, const std::set<u64>& nonmaximal, i64 disc_K = 1);

enum class Vanishing { positive, trivial, non_trivial };
std::string_view to_string(Vanishing v);

Vanishing classify_vanishing(const Interval& naive, const Rational& alpha, const DegreeProfile& profile);

struct DensityReport {
      u64 truncation = 0;
      Interval A_inf;
      Interval naive;
      Rational naive_ratio;  ///< naive = naive_ratio * A_inf
      Rational charsum_factor;
      Rational superfluous_factor;
      Rational override_factor;
      Rational alpha;  ///< product of the three factors above
      Rational c_factor;
      Interval delta;
      Vanishing vanishing = Vanishing::positive;
};

DensityReport compute_density(const DegreeProfile& profile, u64 L = 100000);

/// Outward-rounded fixed-point rendering with the given number of decimals.
std::string decimal_floor(const Rational& q, unsigned digits = 20);
std::string decimal_ceil(const Rational& q, unsigned digits = 20);

nlohmann::json density_report_to_json(const DensityReport& report);

}  // namespace cyclored
