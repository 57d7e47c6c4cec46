#include "doctest.h"

#include <random>

#include "cyclored/error.hpp"
#include "profile_gen.hpp"

using namespace cyclored;
using namespace cyclored::testing;

namespace {

// True when every point of the enclosure rounds or truncates to `printed` at
// its number of decimals.
bool rounds_to(const Interval& iv, const std::string& printed) {
   const auto digits = printed.size() - printed.find('.') - 1;
   mpz_class ulp = 1;
   for(std::size_t i = 0; i < digits; ++i) {
      ulp *= 10;
   }
   const Rational half(1, 2 * ulp);
   const Rational v = decimal(printed);
   return v - half <= iv.lo && iv.hi < v + 2 * half;
}

// sum over m | n of mu(m) / deg(m), with deg multiplicative over the prime degrees.
Rational mu_sum(u64 n, const std::map<u64, u64>& deg) {
   Rational s = 0;
   for(u64 m : divisors(n)) {
      if(moebius(m) == 0) {
         continue;
      }
      u64 d = 1;
      for(const auto& pp : factorize(m)) {
         d *= deg.at(pp.prime);
      }
      s += Rational(moebius(m)) / Rational(static_cast<unsigned long>(d));
   }
   return s;
}

DegreeProfile ex1() {
   DegreeProfile p;
   p.degrees[2] = 3;
   return p;
}

DegreeProfile ex2() {
   DegreeProfile p;
   p.degrees[2] = 2;
   p.superfluous = {11};
   return p;
}

DegreeProfile ex3() {
   DegreeProfile p;
   p.degrees[3] = 2;
   p.charsum = {2, 19};
   return p;
}

DegreeProfile ex4() {
   DegreeProfile p;
   p.charsum = {2, 13, 19};
   return p;
}

DegreeProfile ex5() {
   DegreeProfile p;
   p.degrees[5] = 4;
   p.charsum = {2, 11};
   return p;
}

// Three quadratic division fields with compositum of degree 4.
DegreeProfile klein() {
   DegreeProfile p;
   p.degrees = {{7, 2}, {11, 2}, {13, 2}};
   p.overrides = {{77, 4}, {91, 4}, {143, 4}, {1001, 4}};
   return p;
}

}  // namespace

TEST_CASE("gl2_order") {
   CHECK(gl2_order(2) == 6);
   CHECK(gl2_order(3) == 48);
   CHECK(gl2_order(5) == 480);
   CHECK(gl2_order(11) == 13200);
   CHECK(gl2_order(19) == 123120);
}

TEST_CASE("artin_constant enclosures") {
   const Interval a2 = artin_constant(2);
   CHECK(a2.hi == Rational(5, 6));
   CHECK(a2.lo == Rational(5, 6) * Rational(7, 8));

   Interval prev = a2;
   for(u64 L : {3, 5, 10, 100, 1000, 10000, 100000}) {
      const Interval cur = artin_constant(L);
      CHECK(cur.lo <= cur.hi);
      CHECK(prev.contains(cur));
      const Rational v = decimal("0.8137519"), half(1, 20000000);
      if(cur.width() < Rational(1, 1000000)) {
         CHECK(cur.lo < v + 2 * half);
         CHECK(cur.hi >= v - half);
      }
      if(cur.width() < Rational(1, 100000000)) {
         CHECK(rounds_to(cur, "0.8137519"));
      }
      prev = cur;
   }
   CHECK(prev.width() < Rational(1, 1000000000));
   CHECK(rounds_to(prev, "0.8137519"));
}

TEST_CASE("naive densities of the five registry profiles") {
   const u64 L = 100000;
   const Interval A = artin_constant(L);
   CHECK(naive_density(DegreeProfile{}, L) == A);
   CHECK(naive_density(ex1(), L) == A * (Rational(2, 3) * Rational(6, 5)));
   CHECK(naive_density(ex5(), L) == A * (Rational(3, 4) * Rational(480, 479)));
   CHECK(rounds_to(naive_density(ex1(), L), "0.6510015"));
   CHECK(rounds_to(naive_density(ex2(), L), "0.48825114"));
   CHECK(rounds_to(naive_density(ex3(), L), "0.4155329"));
   CHECK(rounds_to(naive_density(ex5(), L), "0.6115881"));
}

TEST_CASE("delta_partial small cases") {
   DegreeProfile p;
   CHECK(delta_partial(1, p) == 1);
   CHECK(delta_partial(2, p) == Rational(5, 6));
   p.overrides[6] = 288;
   CHECK(delta_partial(6, p) == Rational(235, 288));
   CHECK(delta_partial(6, p) == mu_sum(6, {{2, 6}, {3, 48}}));
   CHECK(delta_partial(6, p) == Rational(5, 6) * Rational(47, 48));
   CHECK_THROWS_AS(delta_partial(4, p), Error);
}

TEST_CASE("delta_partial against a direct Moebius sum") {
   std::mt19937_64 rng(5);
   for(int trial = 0; trial < 50; ++trial) {
      DegreeProfile p;
      std::map<u64, u64> deg;
      for(u64 ell : {2, 3, 5, 7, 11}) {
         const auto divs = divisors(gl2_order(ell).get_ui());
         deg[ell] = divs[1 + rng() % (divs.size() - 1)];
         p.degrees[ell] = deg[ell];
      }
      for(u64 n : divisors(2310)) {
         CHECK(delta_partial(n, p) == mu_sum(n, deg));
      }
   }
}

TEST_CASE("c_factor") {
   CHECK(c_factor(DegreeProfile{}, 1) == 1);
   CHECK(c_factor(ex1(), 1) == Rational(4, 5));
   DegreeProfile trivial;
   trivial.degrees[2] = 1;
   CHECK(c_factor(trivial, 1) == 0);
}

TEST_CASE("charsum_alpha") {
   using M = std::map<u64, mpz_class>;
   CHECK(charsum_alpha(M{{2, 6}, {19, 123120}}) == Rational(615596, 615595));
   CHECK(charsum_alpha(M{{2, 6}, {11, 13200}}) == Rational(1) + Rational(1, 5 * 13199));
   const Rational a4 = charsum_alpha(M{{2, 6}, {13, 26208}, {19, 123120}});
   CHECK(a4 == Rational(1) - Rational(1, mpz_class(5) * 26207 * 123119));
   CHECK(rounds_to(Interval::point(a4), "0.999999999938"));
   CHECK_THROWS_AS(charsum_alpha(M{{2, 1}, {3, 48}}), Error);
   CHECK_THROWS_AS(charsum_alpha(M{{2, 6}}), Error);
}

TEST_CASE("superfluous_correction") {
   CHECK(superfluous_correction(DegreeProfile{}) == 1);
   CHECK(superfluous_correction(ex2()) == Rational(13200, 13199));
   DegreeProfile two = ex2();
   two.superfluous.insert(13);
   CHECK(superfluous_correction(two) == Rational(13200, 13199) * Rational(26208, 26207));
}

TEST_CASE("entanglement_modulus") {
   CHECK(entanglement_modulus(CurveOverQ(-3, 1), {2}) == 30);
   CHECK(entanglement_modulus(CurveOverQ(2, 3), {2}) == 330);
   CHECK(entanglement_modulus(CurveOverQ(1, 3), {}) == 2 * 3 * 5 * 13 * 19);
   CHECK(entanglement_modulus(CurveOverQ(1, 3), {}, -7) == 2 * 3 * 5 * 7 * 13 * 19);
}

TEST_CASE("delta_factored") {
   const u64 L = 100000;
   CHECK(delta_factored(2, Rational(5, 6), DegreeProfile{}, L) == artin_constant(L));
   CHECK(delta_factored(30, 0, ex1(), L) == Interval::point(0));
   CHECK_THROWS_AS(delta_factored(3, 1, ex1(), L), Error);

   // K_2 is the quadratic subfield of K_11: every composite containing both
   // 2 and 11 has the degree of K_11 times the other factors.
   DegreeProfile contained;
   contained.degrees[2] = 2;
   contained.overrides = {{22, 13200}, {66, 13200 * 48}, {110, 13200 * 480}, {330, mpz_class(13200) * 48 * 480}};
   const Interval d = delta_factored(330, delta_partial(330, contained), contained, L);
   CHECK(rounds_to(d, "0.4882881"));
   const DensityReport r2 = compute_density(ex2(), L);
   CHECK(r2.delta == d);
}

TEST_CASE("classify_vanishing") {
   const u64 L = 1000;
   DegreeProfile trivial;
   trivial.degrees[2] = 1;
   CHECK(classify_vanishing(naive_density(trivial, L), 1, trivial) == Vanishing::trivial);
   CHECK(compute_density(trivial, L).vanishing == Vanishing::trivial);

   const DensityReport k = compute_density(klein(), L);
   CHECK(k.override_factor == 0);
   CHECK(k.naive.lo > 0);
   CHECK(k.vanishing == Vanishing::non_trivial);
   CHECK(k.delta == Interval::point(0));

   CHECK(compute_density(ex1(), L).vanishing == Vanishing::positive);
   CHECK_THROWS_AS(classify_vanishing(Interval{-1, 1}, 1, DegreeProfile{}), Error);
}

TEST_CASE("density reports of the registry profiles") {
   const u64 L = 100000;
   const DensityReport r1 = compute_density(ex1(), L);
   CHECK(r1.alpha == 1);
   CHECK(rounds_to(r1.delta, "0.6510015"));

   const DensityReport r2 = compute_density(ex2(), L);
   CHECK(r2.superfluous_factor == Rational(13200, 13199));
   CHECK(rounds_to(r2.naive, "0.48825114"));
   CHECK(rounds_to(r2.delta, "0.4882881"));

   const DensityReport r3 = compute_density(ex3(), L);
   CHECK(r3.alpha == Rational(615596, 615595));
   CHECK(rounds_to(r3.delta, "0.4155335"));

   const DensityReport r4 = compute_density(ex4(), L);
   CHECK(r4.naive == artin_constant(L));
   CHECK(rounds_to(Interval::point(r4.alpha), "0.999999999938"));

   const DensityReport r5 = compute_density(ex5(), L);
   CHECK(r5.alpha == Rational(1) + Rational(1, 5 * 13199));
   CHECK(rounds_to(r5.naive, "0.6115881"));
   CHECK(rounds_to(r5.delta, "0.6115973"));

   for(const auto* r : {&r1, &r2, &r3, &r4, &r5}) {
      CHECK(r->delta == r->A_inf * r->c_factor);
      CHECK(r->delta == r->naive * r->alpha);
      CHECK(r->alpha == r->charsum_factor * r->superfluous_factor * r->override_factor);
   }
}

TEST_CASE("profile json round trip and validation") {
   const DegreeProfile p = profile_from_json(nlohmann::json::parse(
      R"({"degrees": {"2": 3}, "superfluous": [11], "charsum": [3, 19], "overrides": {"6": 144}})"));
   CHECK(p.degree(2) == 3);
   CHECK(p.degree(7) == gl2_order(7));
   CHECK(profile_to_json(profile_from_json(profile_to_json(p))) == profile_to_json(p));
   CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"degrees": {"2": 4}})")), Error);
   CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"charsum": [2]})")), Error);
   CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"superfluous": [2], "charsum": [2, 3]})")), Error);
   CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"degree": {}})")), Error);
   CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(R"({"degrees": {"2": 1.5}})")), Error);
}

TEST_CASE("property: monotone under divisibility for random admissible profiles") {
   std::mt19937_64 rng(2024);
   const auto ns = divisors(210);
   for(int trial = 0; trial < 100; ++trial) {
      const DegreeProfile p = random_profile(rng);
      for(u64 n : ns) {
         const Rational dn = delta_partial(n, p);
         CHECK(dn >= 0);
         for(u64 m : divisors(n)) {
            CHECK(delta_partial(m, p) >= dn);
         }
      }
   }
}

TEST_CASE("property: multiplicative over coprime parts") {
   std::mt19937_64 rng(77);
   for(int trial = 0; trial < 100; ++trial) {
      DegreeProfile p = random_profile(rng);
      p.charsum.clear();
      for(u64 n1 : divisors(210)) {
         const u64 n2 = 210 / n1;
         CHECK(delta_partial(n1 * n2, p) == delta_partial(n1, p) * delta_partial(n2, p));
      }
   }
}

TEST_CASE("property: factored form reproduces the naive density") {
   std::mt19937_64 rng(9);
   for(int trial = 0; trial < 30; ++trial) {
      DegreeProfile p = random_profile(rng);
      p.charsum.clear();
      CHECK(delta_factored(210, delta_partial(210, p), p, 1000) == naive_density(p, 1000));
   }
}

TEST_CASE("property: charsum profiles give delta = alpha * naive with alpha from the formula") {
   std::mt19937_64 rng(31);
   for(int trial = 0; trial < 30; ++trial) {
      const DegreeProfile p = random_profile(rng);
      const DensityReport r = compute_density(p, 1000);
      CHECK(r.delta == r.A_inf * r.c_factor);
      if(!p.charsum.empty()) {
         std::map<u64, mpz_class> degs;
         for(u64 ell : p.charsum) {
            degs[ell] = p.degree(ell);
         }
         CHECK(r.charsum_factor == charsum_alpha(degs));
         // Charsum primes all divide 210 here, so delta(210) carries the whole correction.
         Rational naive210 = 1;
         for(u64 ell : {2, 3, 5, 7}) {
            naive210 *= Rational(1) - Rational(mpz_class(1), p.degree(ell));
         }
         CHECK(delta_partial(210, p) == r.charsum_factor * naive210);
      }
   }
}

TEST_CASE("decimal rendering") {
   CHECK(decimal_floor(Rational(2, 3), 5) == "0.66666");
   CHECK(decimal_ceil(Rational(2, 3), 5) == "0.66667");
   CHECK(decimal_floor(Rational(-1, 3), 3) == "-0.334");
   CHECK(decimal_ceil(Rational(5), 2) == "5.00");
   CHECK(decimal("0.125") == Rational(1, 8));
}
