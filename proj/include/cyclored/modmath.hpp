#pragma once

// 64-bit modular arithmetic, primality, sieving and factorization.
//
// Residues are always the least non-negative representative. Products go
// through unsigned __int128, so every modulus below 2^63 is safe.

#include <cstdint>
#include <utility>
#include <vector>

namespace cyclored {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

/// An odd prime 2 < p < 2^62. Construction runs the deterministic primality test.
class PrimeModulus {
   public:
      explicit PrimeModulus(u64 p);

      u64 value() const noexcept { return m_p; }
      operator u64() const noexcept { return m_p; }

   private:
      u64 m_p;
};

inline u64 mul_mod(u64 a, u64 b, u64 m) {
   return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 add_mod(u64 a, u64 b, u64 m) {
   u64 s = a + b;
   return (s >= m || s < a) ? s - m : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 m) {
   return a >= b ? a - b : a + (m - b);
}

/// Least non-negative residue of a signed integer.
inline u64 reduce_signed(i64 a, u64 m) {
   const i64 r = a % static_cast<i64>(m);
   return r < 0 ? static_cast<u64>(r + static_cast<i64>(m)) : static_cast<u64>(r);
}

u64 pow_mod(u64 base, u64 exp, u64 m);

/// Inverse of a modulo m; requires gcd(a, m) = 1.
u64 inv_mod(u64 a, u64 m);

/// Legendre symbol (a/p) in {-1, 0, 1}.
int legendre(u64 a, const PrimeModulus& p);

/// Square root of a quadratic residue, canonicalized to min(r, p - r).
/// Throws NotAResidue when legendre(a, p) = -1.
u64 sqrt_mod(u64 a, const PrimeModulus& p);

/// Deterministic Miller-Rabin for the whole 64-bit range.
bool is_prime(u64 n);

/// All primes <= x in increasing order. Throws LimitTooLarge above 2^32.
std::vector<u64> sieve_primes(u64 x);

struct PrimePower {
      u64 prime;
      unsigned exponent;

      bool operator==(const PrimePower&) const = default;
};

/// Prime factorization, primes increasing. n = 1 gives an empty list.
std::vector<PrimePower> factorize(u64 n);

int moebius(u64 m);

/// All positive divisors of n, increasing.
std::vector<u64> divisors(u64 n);

u64 gcd(u64 a, u64 b);
u64 lcm(u64 a, u64 b);
u64 isqrt(u64 n);

/// splitmix64 finalizer; the fixed mixing function behind every deterministic seed.
u64 mix64(u64 x);

}  // namespace cyclored
