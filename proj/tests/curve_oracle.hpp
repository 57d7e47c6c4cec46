#pragma once

// Exhaustive-enumeration oracle for E(F_p): lists every point by direct
// search and reads the invariants off the maximal point order.

#include <vector>

#include "cyclored/curve.hpp"

namespace cyclored::testing {

inline std::vector<Point> all_points(const ReducedCurve& C) {
   const u64 p = C.p;
   std::vector<Point> pts{Point::at_infinity()};
   std::vector<std::vector<u64>> roots(p);
   for(u64 y = 0; y < p; ++y) {
      roots[y * y % p].push_back(y);
   }
   for(u64 x = 0; x < p; ++x) {
      const u64 f = (x * x % p * x + C.a * x + C.b) % p;
      for(u64 y : roots[f]) {
         pts.push_back(Point::affine(x, y));
      }
   }
   return pts;
}

inline u64 order_by_repeated_addition(const Point& P, const ReducedCurve& C) {
   u64 n = 1;
   Point Q = P;
   while(!Q.infinity) {
      Q = add(Q, P, C);
      ++n;
   }
   return n;
}

/// (N, d, e) by brute force: e is the group exponent = max point order.
inline GroupStructure exhaustive_structure(const ReducedCurve& C) {
   const auto pts = all_points(C);
   u64 e = 1;
   for(const auto& P : pts) {
      e = std::max(e, order_by_repeated_addition(P, C));
      if(e == pts.size()) {
         break;
      }
   }
   return GroupStructure{pts.size(), pts.size() / e, e};
}

struct TableCurve {
      const char* label;
      i64 A;
      i64 B;
};

inline constexpr TableCurve table_curves[] = {
   {"serre-ex1", -3, 1},
   {"serre-ex2", 2, 3},
   {"serre-ex3", -12096, -544752},
   {"serre-ex4", 1, 3},
   {"serre-ex5", -13392, -1080432},
};

}  // namespace cyclored::testing
