#pragma once

// Short Weierstrass curves y^2 = x^3 + Ax + B: the rational model, its
// reductions modulo odd primes, the affine group law, and exact group
// order / structure determination.

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cyclored/modmath.hpp"

namespace cyclored {

/// Integral model y^2 = x^3 + Ax + B over the rationals.
struct CurveOverQ {
      i64 A = 0;
      i64 B = 0;

      /// Throws InvalidArgument for a singular model.
      CurveOverQ(i64 a, i64 b);

      /// -16(4A^3 + 27B^2), exact.
      mpz_class discriminant() const;

      /// Residue of the discriminant modulo m.
      u64 discriminant_mod(u64 m) const;

      std::string to_string() const;

      bool operator==(const CurveOverQ&) const = default;
};

struct ReducedCurve {
      PrimeModulus p;
      u64 a;
      u64 b;

      /// Right-hand side x^3 + ax + b.
      u64 rhs(u64 x) const;
};

struct Point {
      u64 x = 0;
      u64 y = 0;
      bool infinity = true;

      static Point at_infinity() { return Point{}; }
      static Point affine(u64 x, u64 y) { return Point{x, y, false}; }

      bool operator==(const Point&) const = default;
};

/// Invariants of E(F_p) = Z/d x Z/e with d | e.
struct GroupStructure {
      u64 order = 0;
      u64 d = 1;
      u64 e = 0;

      bool cyclic() const { return d == 1; }
      bool operator==(const GroupStructure&) const = default;
};

/// Throws BadReduction when p = 2 or p divides the discriminant.
ReducedCurve reduce(const CurveOverQ& curve, u64 p);

bool on_curve(const Point& P, const ReducedCurve& C);
Point negate(const Point& P, const ReducedCurve& C);
Point add(const Point& P, const Point& Q, const ReducedCurve& C);
Point scalar_mul(u64 k, const Point& P, const ReducedCurve& C);

/// Deterministic per-curve seed derived from (p, a, b).
u64 curve_seed(const ReducedCurve& C, u64 stream = 0);

/// Random affine point: x uniform until x^3 + ax + b is a square, then one
/// of the two roots picked by the next bit of the generator.
Point random_point(const ReducedCurve& C, std::mt19937_64& rng);
Point random_point(const ReducedCurve& C, u64 seed);

/// #E(F_p). Exhaustive character sum below 2^10, baby-step giant-step above.
u64 group_order(const ReducedCurve& C);

/// Exact order of P given a multiple N of it. Throws BadWitness if N*P != O.
u64 point_order(const Point& P, u64 N, const ReducedCurve& C);

/// Exact (N, d, e), certified. Throws IterationCap if the sample budget runs out.
GroupStructure group_structure(const ReducedCurve& C);

/// True iff the reduced group contains (Z/ell)^2.
bool has_full_ell_torsion(const ReducedCurve& C, u64 ell);

bool is_cyclic(const ReducedCurve& C);

/// Quadratic twist y^2 = x^3 + a g^2 x + b g^3 for the least non-residue g.
ReducedCurve quadratic_twist(const ReducedCurve& C);

namespace detail {

/// Number of sampled points before group_order or the Sylow search gives up.
inline constexpr unsigned sample_budget = 64;

/// Some k in the Hasse interval with k*P = O (exists whenever P is on C).
u64 hasse_multiple(const Point& P, const ReducedCurve& C);

/// Exponent a of the ell-Sylow subgroup Z/ell^a x Z/ell^b (a <= b) of a
/// group of order N.
unsigned sylow_rank_two_exponent(const ReducedCurve& C, u64 N, u64 ell);

}  // namespace detail

}  // namespace cyclored
