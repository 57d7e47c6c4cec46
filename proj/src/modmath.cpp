#include "cyclored/modmath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "cyclored/error.hpp"

namespace cyclored {

PrimeModulus::PrimeModulus(u64 p) : m_p(p) {
   if(p <= 2 || p >= (u64(1) << 62) || !is_prime(p)) {
      throw Error(ErrorCode::NotPrime, std::to_string(p) + " is not an odd prime below 2^62");
   }
}

u64 pow_mod(u64 base, u64 exp, u64 m) {
   if(m == 1) {
      return 0;
   }
   u64 result = 1;
   base %= m;
   while(exp > 0) {
      if(exp & 1) {
         result = mul_mod(result, base, m);
      }
      base = mul_mod(base, base, m);
      exp >>= 1;
   }
   return result;
}

u64 inv_mod(u64 a, u64 m) {
   i64 t = 0, new_t = 1;
   u64 r = m, new_r = a % m;
   while(new_r != 0) {
      const u64 q = r / new_r;
      const i64 tmp_t = t - static_cast<i64>(q) * new_t;
      t = new_t;
      new_t = tmp_t;
      const u64 tmp_r = r - q * new_r;
      r = new_r;
      new_r = tmp_r;
   }
   if(r != 1) {
      throw Error(ErrorCode::InvalidArgument, "value not invertible");
   }
   return t < 0 ? static_cast<u64>(t + static_cast<i64>(m)) : static_cast<u64>(t);
}

int legendre(u64 a, const PrimeModulus& pm) {
   // Binary Jacobi symbol; equals the Legendre symbol for prime modulus.
   u64 n = pm.value();
   a %= n;
   int t = 1;
   while(a != 0) {
      const int tz = std::countr_zero(a);
      a >>= tz;
      if((tz & 1) && (n % 8 == 3 || n % 8 == 5)) {
         t = -t;
      }
      if(a % 4 == 3 && n % 4 == 3) {
         t = -t;
      }
      std::swap(a, n);
      a %= n;
   }
   return n == 1 ? t : 0;
}

u64 sqrt_mod(u64 a, const PrimeModulus& pm) {
   const u64 p = pm.value();
   a %= p;
   if(a == 0) {
      return 0;
   }
   if(legendre(a, pm) != 1) {
      throw Error(ErrorCode::NotAResidue, std::to_string(a) + " mod " + std::to_string(p));
   }
   u64 r;
   if(p % 4 == 3) {
      r = pow_mod(a, (p + 1) / 4, p);
   } else {
      // Tonelli-Shanks
      u64 q = p - 1;
      unsigned s = 0;
      while((q & 1) == 0) {
         q >>= 1;
         ++s;
      }
      u64 z = 2;
      while(legendre(z, pm) != -1) {
         ++z;
      }
      u64 m = s;
      u64 c = pow_mod(z, q, p);
      u64 t = pow_mod(a, q, p);
      r = pow_mod(a, (q + 1) / 2, p);
      while(t != 1) {
         u64 i = 0;
         u64 t2 = t;
         while(t2 != 1) {
            t2 = mul_mod(t2, t2, p);
            ++i;
         }
         u64 b = c;
         for(u64 j = 0; j + i + 1 < m; ++j) {
            b = mul_mod(b, b, p);
         }
         m = i;
         c = mul_mod(b, b, p);
         t = mul_mod(t, c, p);
         r = mul_mod(r, b, p);
      }
   }
   return std::min(r, p - r);
}

bool is_prime(u64 n) {
   if(n < 2) {
      return false;
   }
   for(u64 sp : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
      if(n % sp == 0) {
         return n == sp;
      }
   }
   u64 d = n - 1;
   unsigned s = 0;
   while((d & 1) == 0) {
      d >>= 1;
      ++s;
   }
   // Jim Sinclair's base set, deterministic below 2^64.
   for(u64 base : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
      const u64 a = base % n;
      if(a == 0) {
         continue;
      }
      u64 x = pow_mod(a, d, n);
      if(x == 1 || x == n - 1) {
         continue;
      }
      bool composite = true;
      for(unsigned r = 1; r < s; ++r) {
         x = mul_mod(x, x, n);
         if(x == n - 1) {
            composite = false;
            break;
         }
      }
      if(composite) {
         return false;
      }
   }
   return true;
}

std::vector<u64> sieve_primes(u64 x) {
   constexpr u64 max_limit = u64(1) << 32;
   if(x > max_limit) {
      throw Error(ErrorCode::LimitTooLarge, std::to_string(x) + " exceeds 2^32");
   }
   std::vector<u64> primes;
   if(x < 2) {
      return primes;
   }
   const u64 root = isqrt(x);
   std::vector<bool> small(root + 1, true);
   std::vector<u64> base;
   for(u64 i = 2; i <= root; ++i) {
      if(small[i]) {
         base.push_back(i);
         for(u64 j = i * i; j <= root; j += i) {
            small[j] = false;
         }
      }
   }
   if(x > 1000) {
      primes.reserve(static_cast<std::size_t>(1.1 * x / std::log(static_cast<double>(x))));
   }

   // Segmented sieve over odd numbers.
   primes.push_back(2);
   constexpr u64 segment = u64(1) << 18;
   std::vector<char> mark(segment);
   for(u64 lo = 3; lo <= x; lo += 2 * segment) {
      const u64 hi = std::min(x, lo + 2 * segment - 1);
      const u64 count = (hi - lo) / 2 + 1;
      std::fill(mark.begin(), mark.begin() + count, 1);
      for(u64 q : base) {
         if(q == 2) {
            continue;
         }
         if(q * q > hi) {
            break;
         }
         u64 start = std::max(q * q, (lo + q - 1) / q * q);
         if(start % 2 == 0) {
            start += q;
         }
         for(u64 j = start; j <= hi; j += 2 * q) {
            mark[(j - lo) / 2] = 0;
         }
      }
      for(u64 i = 0; i < count; ++i) {
         if(mark[i]) {
            primes.push_back(lo + 2 * i);
         }
      }
   }
   return primes;
}

namespace {

u64 pollard_brent(u64 n, u64 seed) {
   if(n % 2 == 0) {
      return 2;
   }
   u64 state = seed;
   for(;;) {
      state = mix64(state);
      const u64 c = state % (n - 1) + 1;
      state = mix64(state);
      u64 y = state % n;
      const u64 m = 128;
      u64 g = 1, r = 1, q = 1;
      u64 x = 0, ys = 0;
      auto f = [&](u64 v) { return add_mod(mul_mod(v, v, n), c, n); };
      do {
         x = y;
         for(u64 i = 0; i < r; ++i) {
            y = f(y);
         }
         u64 k = 0;
         while(k < r && g == 1) {
            ys = y;
            for(u64 i = 0; i < std::min(m, r - k); ++i) {
               y = f(y);
               q = mul_mod(q, x > y ? x - y : y - x, n);
            }
            g = gcd(q, n);
            k += m;
         }
         r *= 2;
      } while(g == 1);
      if(g == n) {
         do {
            ys = f(ys);
            g = gcd(x > ys ? x - ys : ys - x, n);
         } while(g == 1);
      }
      if(g != n) {
         return g;
      }
   }
}

void split_into(u64 n, std::vector<u64>& out) {
   if(n == 1) {
      return;
   }
   if(is_prime(n)) {
      out.push_back(n);
      return;
   }
   const u64 d = pollard_brent(n, 0x5eed0f5eedULL ^ n);
   split_into(d, out);
   split_into(n / d, out);
}

}  // namespace

std::vector<PrimePower> factorize(u64 n) {
   std::vector<PrimePower> result;
   if(n <= 1) {
      return result;
   }
   auto strip = [&](u64 q) {
      if(n % q == 0) {
         unsigned e = 0;
         while(n % q == 0) {
            n /= q;
            ++e;
         }
         result.push_back({q, e});
      }
   };
   strip(2);
   strip(3);
   constexpr u64 trial_bound = 100000;
   for(u64 q = 5; q <= trial_bound && q * q <= n; q += 6) {
      strip(q);
      strip(q + 2);
   }
   if(n > 1) {
      std::vector<u64> rest;
      split_into(n, rest);
      std::sort(rest.begin(), rest.end());
      for(std::size_t i = 0; i < rest.size();) {
         std::size_t j = i;
         while(j < rest.size() && rest[j] == rest[i]) {
            ++j;
         }
         result.push_back({rest[i], static_cast<unsigned>(j - i)});
         i = j;
      }
   }
   return result;
}

int moebius(u64 m) {
   int sign = 1;
   for(const auto& pp : factorize(m)) {
      if(pp.exponent > 1) {
         return 0;
      }
      sign = -sign;
   }
   return sign;
}

std::vector<u64> divisors(u64 n) {
   std::vector<u64> divs{1};
   for(const auto& [q, e] : factorize(n)) {
      const std::size_t base = divs.size();
      u64 pw = 1;
      for(unsigned k = 1; k <= e; ++k) {
         pw *= q;
         for(std::size_t i = 0; i < base; ++i) {
            divs.push_back(divs[i] * pw);
         }
      }
   }
   std::sort(divs.begin(), divs.end());
   return divs;
}

u64 gcd(u64 a, u64 b) {
   return std::gcd(a, b);
}

u64 lcm(u64 a, u64 b) {
   return a / gcd(a, b) * b;
}

u64 isqrt(u64 n) {
   u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
   while(r > 0 && r * r > n) {
      --r;
   }
   while((r + 1) * (r + 1) <= n) {
      ++r;
   }
   return r;
}

u64 mix64(u64 x) {
   x += 0x9e3779b97f4a7c15ULL;
   x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
   x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
   return x ^ (x >> 31);
}

}  // namespace cyclored
