#include "cyclored/curve.hpp"

#include <algorithm>
#include <optional>

#include "cyclored/error.hpp"

namespace cyclored {

CurveOverQ::CurveOverQ(i64 a, i64 b) : A(a), B(b) {
   if(discriminant() == 0) {
      throw Error(ErrorCode::InvalidArgument, "singular model " + to_string());
   }
}

mpz_class CurveOverQ::discriminant() const {
   const mpz_class a(static_cast<long>(A));
   const mpz_class b(static_cast<long>(B));
   return -16 * (4 * a * a * a + 27 * b * b);
}

u64 CurveOverQ::discriminant_mod(u64 m) const {
   const u64 a = reduce_signed(A, m);
   const u64 b = reduce_signed(B, m);
   const u64 a3 = mul_mod(mul_mod(a, a, m), a, m);
   const u64 b2 = mul_mod(b, b, m);
   const u64 inner = add_mod(mul_mod(4 % m, a3, m), mul_mod(27 % m, b2, m), m);
   return sub_mod(0, mul_mod(16 % m, inner, m), m);
}

std::string CurveOverQ::to_string() const {
   auto term = [](i64 v, const char* suffix) {
      std::string s = v < 0 ? " - " : " + ";
      const u64 mag = v < 0 ? static_cast<u64>(-(v + 1)) + 1 : static_cast<u64>(v);
      return s + std::to_string(mag) + suffix;
   };
   return "y^2 = x^3" + term(A, "x") + term(B, "");
}

u64 ReducedCurve::rhs(u64 x) const {
   const u64 m = p.value();
   const u64 x2 = mul_mod(x, x, m);
   return add_mod(mul_mod(add_mod(x2, a, m), x, m), b, m);
}

ReducedCurve reduce(const CurveOverQ& curve, u64 p) {
   if(p == 2) {
      throw Error(ErrorCode::BadReduction, "p = 2 is never good for a short Weierstrass model");
   }
   if(curve.discriminant_mod(p) == 0) {
      throw Error(ErrorCode::BadReduction, std::to_string(p) + " divides the discriminant");
   }
   return ReducedCurve{PrimeModulus(p), reduce_signed(curve.A, p), reduce_signed(curve.B, p)};
}

bool on_curve(const Point& P, const ReducedCurve& C) {
   if(P.infinity) {
      return true;
   }
   return P.x < C.p && P.y < C.p && mul_mod(P.y, P.y, C.p) == C.rhs(P.x);
}

Point negate(const Point& P, const ReducedCurve& C) {
   if(P.infinity) {
      return P;
   }
   return Point::affine(P.x, P.y == 0 ? 0 : C.p.value() - P.y);
}

Point add(const Point& P, const Point& Q, const ReducedCurve& C) {
   if(P.infinity) {
      return Q;
   }
   if(Q.infinity) {
      return P;
   }
   const u64 p = C.p;
   u64 lambda;
   if(P.x == Q.x) {
      if(P.y != Q.y || P.y == 0) {
         return Point::at_infinity();
      }
      const u64 num = add_mod(mul_mod(3, mul_mod(P.x, P.x, p), p), C.a, p);
      lambda = mul_mod(num, inv_mod(add_mod(P.y, P.y, p), p), p);
   } else {
      lambda = mul_mod(sub_mod(Q.y, P.y, p), inv_mod(sub_mod(Q.x, P.x, p), p), p);
   }
   const u64 x3 = sub_mod(sub_mod(mul_mod(lambda, lambda, p), P.x, p), Q.x, p);
   const u64 y3 = sub_mod(mul_mod(lambda, sub_mod(P.x, x3, p), p), P.y, p);
   return Point::affine(x3, y3);
}

Point scalar_mul(u64 k, const Point& P, const ReducedCurve& C) {
   Point result = Point::at_infinity();
   Point base = P;
   while(k > 0) {
      if(k & 1) {
         result = add(result, base, C);
      }
      k >>= 1;
      if(k > 0) {
         base = add(base, base, C);
      }
   }
   return result;
}

u64 curve_seed(const ReducedCurve& C, u64 stream) {
   return mix64(mix64(mix64(C.p.value()) ^ C.a) ^ mix64(C.b + 0x51ed27aULL) ^ stream);
}

Point random_point(const ReducedCurve& C, std::mt19937_64& rng) {
   const u64 p = C.p;
   for(;;) {
      const u64 x = rng() % p;
      const u64 f = C.rhs(x);
      if(legendre(f, C.p) < 0) {
         continue;
      }
      u64 y = sqrt_mod(f, C.p);
      if(y != 0 && (rng() & 1)) {
         y = p - y;
      }
      return Point::affine(x, y);
   }
}

Point random_point(const ReducedCurve& C, u64 seed) {
   std::mt19937_64 rng(seed);
   return random_point(C, rng);
}

ReducedCurve quadratic_twist(const ReducedCurve& C) {
   const u64 p = C.p;
   u64 g = 2;
   while(legendre(g, C.p) != -1) {
      ++g;
   }
   const u64 g2 = mul_mod(g, g, p);
   return ReducedCurve{C.p, mul_mod(C.a, g2, p), mul_mod(C.b, mul_mod(g2, g, p), p)};
}

namespace {

struct HasseInterval {
      u64 lo;
      u64 hi;
};

HasseInterval hasse_interval(u64 p) {
   const u64 w = isqrt(4 * p);  // floor(2 sqrt p)
   return {p + 1 - w, p + 1 + w};
}

u64 exhaustive_order(const ReducedCurve& C) {
   i64 total = static_cast<i64>(C.p.value()) + 1;
   for(u64 x = 0; x < C.p; ++x) {
      total += legendre(C.rhs(x), C.p);
   }
   return static_cast<u64>(total);
}

std::vector<u64> multiples_in(u64 L, const HasseInterval& h) {
   std::vector<u64> out;
   for(u64 k = (h.lo + L - 1) / L * L; k <= h.hi; k += L) {
      out.push_back(k);
   }
   return out;
}

// Membership of R in the cyclic group <G> of order ell^r, digit by digit:
// each step only enumerates the ell multiples of the order-ell point.
bool in_cyclic_ell_group(const Point& R, const Point& G, u64 ell, unsigned r, const ReducedCurve& C) {
   if(R.infinity) {
      return true;
   }
   if(r == 0) {
      return false;
   }
   std::vector<u64> ell_pow(r + 1, 1);
   for(unsigned i = 1; i <= r; ++i) {
      ell_pow[i] = ell_pow[i - 1] * ell;
   }
   const Point G0 = scalar_mul(ell_pow[r - 1], G, C);
   std::vector<Point> g0_multiples;
   g0_multiples.reserve(ell);
   Point acc = Point::at_infinity();
   for(u64 j = 0; j < ell; ++j) {
      g0_multiples.push_back(acc);
      acc = add(acc, G0, C);
   }
   u64 log = 0;
   for(unsigned i = 0; i < r; ++i) {
      const Point rest = add(R, negate(scalar_mul(log, G, C), C), C);
      const Point T = scalar_mul(ell_pow[r - 1 - i], rest, C);
      auto it = std::find(g0_multiples.begin(), g0_multiples.end(), T);
      if(it == g0_multiples.end()) {
         return false;
      }
      log += static_cast<u64>(it - g0_multiples.begin()) * ell_pow[i];
   }
   return scalar_mul(log, G, C) == R;
}

unsigned valuation(u64 n, u64 ell) {
   unsigned v = 0;
   while(n % ell == 0) {
      n /= ell;
      ++v;
   }
   return v;
}

}  // namespace

u64 detail::hasse_multiple(const Point& P, const ReducedCurve& C) {
   const HasseInterval h = hasse_interval(C.p);
   if(P.infinity) {
      return h.lo;
   }
   const u64 width = h.hi - h.lo + 1;
   const u64 m = isqrt(width - 1) + 1;  // m^2 >= width

   // Baby steps jP, 1 <= j <= m, keyed by x. Matching x(R) = x(jP) means R = +-jP.
   std::vector<std::pair<u64, u64>> baby;
   baby.reserve(m);
   Point jP = P;
   for(u64 j = 1; j <= m; ++j) {
      if(jP.infinity) {
         return j;  // small order; any multiple of ord(P) will do
      }
      baby.emplace_back(jP.x, j);
      jP = add(jP, P, C);
   }
   std::sort(baby.begin(), baby.end());

   const Point stride = scalar_mul(2 * m, P, C);
   u64 base = h.lo + m;
   Point R = scalar_mul(base, P, C);
   // R = (lo + m + 2mi) P covers lo + m + 2mi +- j, i.e. [lo + 2mi, lo + 2m(i+1)].
   for(u64 i = 0; base <= h.hi + 2 * m; ++i) {
      if(R.infinity) {
         return base;
      }
      auto it = std::lower_bound(baby.begin(), baby.end(), std::make_pair(R.x, u64(0)));
      for(; it != baby.end() && it->first == R.x; ++it) {
         const u64 j = it->second;
         // Same x as jP: R = jP or R = -jP.
         const Point jPoint = scalar_mul(j, P, C);
         if(jPoint == R) {
            return base - j;
         }
         return base + j;
      }
      R = add(R, stride, C);
      base += 2 * m;
   }
   throw Error(ErrorCode::BadWitness, "no multiple of the point order in the Hasse interval");
}

u64 point_order(const Point& P, u64 N, const ReducedCurve& C) {
   if(!scalar_mul(N, P, C).infinity) {
      throw Error(ErrorCode::BadWitness, std::to_string(N) + " is not a multiple of the point order");
   }
   u64 order = N;
   for(const auto& [q, e] : factorize(N)) {
      for(unsigned i = 0; i < e; ++i) {
         if(!scalar_mul(order / q, P, C).infinity) {
            break;
         }
         order /= q;
      }
   }
   return order;
}

u64 group_order(const ReducedCurve& C) {
   const u64 p = C.p;
   if(p < 1024) {
      return exhaustive_order(C);
   }
   const HasseInterval h = hasse_interval(p);
   std::mt19937_64 rng(curve_seed(C, 1));

   u64 L = 1;
   for(unsigned n = 0; n < 8; ++n) {
      const Point P = random_point(C, rng);
      L = lcm(L, point_order(P, detail::hasse_multiple(P, C), C));
      const auto candidates = multiples_in(L, h);
      if(candidates.size() == 1) {
         return candidates.front();
      }
   }

   // Orders of E and its twist sum to 2p + 2.
   const ReducedCurve T = quadratic_twist(C);
   std::mt19937_64 twist_rng(curve_seed(T, 2));
   u64 Lt = 1;
   for(unsigned n = 8; n < detail::sample_budget; n += 2) {
      const Point Q = random_point(T, twist_rng);
      Lt = lcm(Lt, point_order(Q, detail::hasse_multiple(Q, T), T));
      std::optional<u64> found;
      unsigned count = 0;
      for(u64 k : multiples_in(L, h)) {
         if((2 * p + 2 - k) % Lt == 0) {
            found = k;
            ++count;
         }
      }
      if(count == 1) {
         return *found;
      }
      const Point P = random_point(C, rng);
      L = lcm(L, point_order(P, detail::hasse_multiple(P, C), C));
   }
   throw Error(ErrorCode::IterationCap, "group order ambiguous for p = " + std::to_string(p));
}

unsigned detail::sylow_rank_two_exponent(const ReducedCurve& C, u64 N, u64 ell) {
   const unsigned k = valuation(N, ell);
   if(k < 2 || (C.p.value() - 1) % ell != 0) {
      return 0;
   }
   u64 cofactor = N;
   for(unsigned i = 0; i < k; ++i) {
      cofactor /= ell;
   }
   std::mt19937_64 rng(curve_seed(C, 0x100 + ell));

   auto ell_order = [&](const Point& Q) {
      unsigned v = 0;
      Point R = Q;
      while(!R.infinity) {
         R = scalar_mul(ell, R, C);
         ++v;
      }
      return v;
   };

   Point P1 = Point::at_infinity();
   unsigned b1 = 0;
   for(unsigned n = 0; n < sample_budget; ++n) {
      Point Q = scalar_mul(cofactor, random_point(C, rng), C);
      unsigned bq = ell_order(Q);
      if(bq > b1) {
         std::swap(P1, Q);
         std::swap(b1, bq);
      }
      if(b1 == k) {
         return 0;
      }
      // Least s with ell^s Q in <P1>; then |<P1, Q>| = ell^(b1 + s).
      unsigned s = 0;
      Point R = Q;
      while(!in_cyclic_ell_group(R, P1, ell, b1, C)) {
         R = scalar_mul(ell, R, C);
         ++s;
      }
      if(b1 + s == k) {
         return k - b1;
      }
   }
   throw Error(ErrorCode::IterationCap, "ell-Sylow structure unresolved for p = " + std::to_string(C.p.value()));
}

GroupStructure group_structure(const ReducedCurve& C) {
   const u64 N = group_order(C);
   const u64 g = gcd(N, C.p.value() - 1);
   u64 d = 1;
   for(const auto& [ell, e] : factorize(g)) {
      if(N % (ell * ell) != 0) {
         continue;
      }
      const unsigned a = detail::sylow_rank_two_exponent(C, N, ell);
      for(unsigned i = 0; i < a; ++i) {
         d *= ell;
      }
   }
   return GroupStructure{N, d, N / d};
}

bool has_full_ell_torsion(const ReducedCurve& C, u64 ell) {
   if(ell == C.p.value() || (C.p.value() - 1) % ell != 0) {
      return false;
   }
   const u64 N = group_order(C);
   if(N % (ell * ell) != 0) {
      return false;
   }
   return detail::sylow_rank_two_exponent(C, N, ell) > 0;
}

bool is_cyclic(const ReducedCurve& C) {
   return group_structure(C).cyclic();
}

}  // namespace cyclored
