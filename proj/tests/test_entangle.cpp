#include "doctest.h"

#include <random>

#include "cyclored/error.hpp"
#include "cyclored/entangle.hpp"

using namespace cyclored;

namespace {

Rational full_product_density(const std::vector<u64>& moduli) {
   Rational r = 1;
   for(u64 l : moduli) {
      r *= Rational(1) - Rational(mpz_class(1), gl2_order(l));
   }
   return r;
}

// Every modulus set over primes <= 60 whose full product has order <= bound.
std::vector<std::vector<u64>> modulus_sets(u64 bound) {
   const auto primes = sieve_primes(60);
   std::vector<std::vector<u64>> out;
   std::vector<u64> cur;
   auto rec = [&](auto&& self, std::size_t from, u64 order) -> void {
      if(!cur.empty()) {
         out.push_back(cur);
      }
      for(std::size_t j = from; j < primes.size(); ++j) {
         const u64 o = gl2_order(primes[j]).get_ui();
         if(order * o <= bound) {
            cur.push_back(primes[j]);
            self(self, j + 1, order * o);
            cur.pop_back();
         }
      }
   };
   rec(rec, 0, 1);
   return out;
}

// Explicit enumeration of the product-character kernel over labeled factors
// {0, ..., n_i - 1} with identity 0 and character -1 on the upper half.
Rational enumerate_index2(const std::vector<u64>& sizes) {
   u64 total = 1;
   for(u64 n : sizes) {
      total *= n;
   }
   u64 kernel = 0, good = 0;
   for(u64 code = 0; code < total; ++code) {
      u64 c = code;
      int chi = 1;
      bool nontrivial = true;
      for(u64 n : sizes) {
         const u64 x = c % n;
         c /= n;
         chi *= x >= n / 2 ? -1 : 1;
         nontrivial = nontrivial && x != 0;
      }
      if(chi == 1) {
         ++kernel;
         good += nontrivial;
      }
   }
   Rational r(static_cast<unsigned long>(good), static_cast<unsigned long>(kernel));
   r.canonicalize();
   return r;
}

const Mat2 minus_one(u64 l) {
   return {l - 1, 0, 0, l - 1};
}

}  // namespace

TEST_CASE("closure basics") {
   const MatrixTupleGroup trivial({3}, {});
   CHECK(trivial.order() == 1);
   CHECK(delta_exact(trivial) == 0);

   CHECK(full_product({2}).order() == 6);
   CHECK(full_product({3}).order() == 48);
   CHECK(full_product({5}).order() == 480);
   CHECK(full_product({2, 3}).order() == 288);

   const MatrixTupleGroup u({7}, {{Mat2{1, 1, 0, 1}}});
   CHECK(u.order() == 7);
   CHECK(std::is_sorted(u.keys().begin(), u.keys().end()));
   CHECK(u.contains({Mat2{1, 3, 0, 1}}));
   CHECK_FALSE(u.contains({Mat2{1, 0, 1, 1}}));
   CHECK(u.element(0) == MatrixTuple{Mat2{1, 0, 0, 1}});

   CHECK_THROWS_AS(full_product({11}, 1000), Error);
   CHECK_THROWS_AS(MatrixTupleGroup({3}, {{Mat2{1, 1, 1, 1}}}), Error);
   CHECK_THROWS_AS(MatrixTupleGroup({3, 3}, {}), Error);
   CHECK_THROWS_AS(MatrixTupleGroup({4}, {}), Error);
}

TEST_CASE("closure is a group") {
   const MatrixTupleGroup g({5, 7}, {{Mat2{2, 0, 0, 1}, Mat2{1, 1, 0, 1}}, {Mat2{0, 1, 4, 0}, Mat2{3, 0, 0, 3}}});
   std::mt19937_64 rng(1);
   for(int i = 0; i < 2000; ++i) {
      const MatrixTuple x = g.element(rng() % g.order());
      const MatrixTuple y = g.element(rng() % g.order());
      MatrixTuple xy(2);
      for(std::size_t c = 0; c < 2; ++c) {
         xy[c] = mat_mul(x[c], y[c], g.moduli()[c]);
      }
      CHECK(g.contains(xy));
   }
   const u64 full = gl2_order(5).get_ui() * gl2_order(7).get_ui();
   CHECK(full % g.order() == 0);
}

TEST_CASE("delta_exact on small groups") {
   CHECK(delta_exact(full_product({2, 3})) == Rational(235, 288));
   const MatrixTupleGroup g2 = full_product({2});
   const MatrixTupleGroup g3 = full_product({3});
   CHECK(delta_exact(direct_product(g2, g3)) == delta_exact(g2) * delta_exact(g3));
   CHECK(naive_product(full_product({2, 3})) == Rational(235, 288));
}

TEST_CASE("delta_exact on full products up to order 10^6") {
   const auto sets = modulus_sets(1000000);
   CHECK(sets.size() > 10);
   for(const auto& s : sets) {
      CHECK(delta_exact(full_product(s)) == full_product_density(s));
   }
}

TEST_CASE("property: direct products are multiplicative") {
   std::mt19937_64 rng(8);
   const std::vector<u64> primes{2, 3, 5, 7};
   for(int trial = 0; trial < 20; ++trial) {
      const u64 l1 = primes[rng() % 4];
      u64 l2 = primes[rng() % 4];
      while(l2 == l1) {
         l2 = primes[rng() % 4];
      }
      auto random_group = [&](u64 l) {
         std::vector<MatrixTuple> gens;
         const auto standard = gl2_generators(l);
         for(const Mat2& m : standard) {
            if(rng() % 2) {
               gens.push_back({m});
            }
         }
         return MatrixTupleGroup({l}, gens);
      };
      const MatrixTupleGroup g1 = random_group(l1), g2 = random_group(l2);
      const MatrixTupleGroup g = direct_product(g1, g2);
      CHECK(g.order() == g1.order() * g2.order());
      CHECK(delta_exact(g) == delta_exact(g1) * delta_exact(g2));
   }
}

TEST_CASE("norm-one construction") {
   const std::vector<u64> moduli{7, 11, 13};
   std::vector<MatrixTuple> hgens;
   for(std::size_t i = 0; i < 3; ++i) {
      MatrixTuple t(3, mat_identity());
      t[i] = minus_one(moduli[i]);
      hgens.push_back(t);
   }
   const MatrixTupleGroup Hp(moduli, hgens);
   CHECK(Hp.order() == 8);
   CHECK(delta_exact(Hp) == Rational(1, 8));

   const std::array<Mat2, 3> e{minus_one(7), minus_one(11), minus_one(13)};
   const MatrixTupleGroup H = norm_one_construction(e, Hp);
   CHECK(H.order() == 4);
   CHECK(delta_exact(H) == 0);
   CHECK(naive_product(H) == Rational(1, 8));
   for(u64 k = 0; k < H.order(); ++k) {
      const MatrixTuple x = H.element(k);
      const int trivial = is_identity(x[0]) + is_identity(x[1]) + is_identity(x[2]);
      CHECK((trivial == 3 || trivial == 1));
   }

   CHECK_THROWS_AS(norm_one_construction({mat_identity(), minus_one(11), minus_one(13)}, Hp), Error);
   CHECK_THROWS_AS(norm_one_construction({Mat2{2, 0, 0, 1}, minus_one(11), minus_one(13)}, Hp), Error);
}

TEST_CASE("norm-one construction rejects non-central involutions") {
   const std::vector<u64> moduli{2, 3, 5};
   const MatrixTupleGroup G = full_product(moduli);
   try {
      norm_one_construction({Mat2{0, 1, 1, 0}, minus_one(3), minus_one(5)}, G);
      FAIL("expected NotCentral");
   } catch(const Error& err) {
      CHECK(err.code() == ErrorCode::NotCentral);
   }
   // Any commuting involutions work, not only -1: here [[1, 1], [0, 1]] over F_2.
   const Mat2 I = mat_identity();
   const MatrixTupleGroup ambient(moduli, {{Mat2{1, 1, 0, 1}, I, I}, {I, minus_one(3), I}, {I, I, minus_one(5)}});
   const MatrixTupleGroup H = norm_one_construction({Mat2{1, 1, 0, 1}, minus_one(3), minus_one(5)}, ambient);
   CHECK(H.order() == 4);
   CHECK(delta_exact(H) == 0);
}

TEST_CASE("index-2 character subgroup") {
   const Index2Model m = index2_character_subgroup({sign_factor(2), sign_factor(2)});
   CHECK(m.order == 2);
   CHECK(m.density == Rational(1, 2));
   CHECK(m.density == charsum_alpha(std::map<u64, mpz_class>{{2, 2}, {3, 2}}) * Rational(1, 4));

   const Index2Model e5 = index2_character_subgroup({sign_factor(6), sign_factor(13200)});
   CHECK(e5.density == charsum_alpha(std::map<u64, mpz_class>{{2, 6}, {11, 13200}}) * Rational(5, 6) * Rational(13199, 13200));

   const Index2Model e3 = index2_character_subgroup({sign_factor(6), sign_factor(123120)});
   CHECK(e3.density / (Rational(5, 6) * Rational(123119, 123120)) == Rational(615596, 615595));

   CHECK_THROWS_AS(index2_character_subgroup({sign_factor(6)}), Error);
   CHECK_THROWS_AS(sign_factor(7), Error);
   CHECK_THROWS_AS(labeled_factor({1, 1, 1}, 0), Error);
   CHECK_THROWS_AS(labeled_factor({-1, 1}, 0), Error);
   CHECK(labeled_factor({1, -1, -1, 1}, 3).kernel == 2);
}

TEST_CASE("property: fiber convolution equals explicit enumeration") {
   std::mt19937_64 rng(12);
   for(int trial = 0; trial < 40; ++trial) {
      std::vector<u64> sizes;
      std::vector<CharacterFactor> factors;
      const std::size_t k = 2 + rng() % 3;
      for(std::size_t i = 0; i < k; ++i) {
         sizes.push_back(2 * (1 + rng() % 12));
         factors.push_back(sign_factor(sizes.back()));
      }
      CHECK(index2_character_subgroup(factors).density == enumerate_index2(sizes));
   }
}

TEST_CASE("property: index-2 density equals charsum alpha times the naive product") {
   std::mt19937_64 rng(20);
   for(int trial = 0; trial < 20; ++trial) {
      const std::size_t k = 2 + rng() % 4;
      std::vector<CharacterFactor> factors;
      std::map<u64, mpz_class> degrees;
      Rational naive = 1;
      for(std::size_t i = 0; i < k; ++i) {
         const u64 n = 2 * (1 + rng() % 5000);
         factors.push_back(sign_factor(n));
         degrees[i + 1] = n;
         naive *= Rational(1) - Rational(1, static_cast<unsigned long>(n));
      }
      CHECK(index2_character_subgroup(factors).density == charsum_alpha(degrees) * naive);
   }
}

TEST_CASE("group description documents") {
   const auto klein = nlohmann::json::parse(R"({
      "moduli": [7, 11, 13],
      "construction": {"type": "norm_one", "elements": [[6,0,0,6], [10,0,0,10], [12,0,0,12]]},
      "generators": [[[6,0,0,6],[1,0,0,1],[1,0,0,1]], [[1,0,0,1],[10,0,0,10],[1,0,0,1]], [[1,0,0,1],[1,0,0,1],[12,0,0,12]]]
   })");
   const EntangleResult r = run_group_description(klein);
   CHECK(r.order == 4);
   CHECK(r.delta == 0);
   CHECK(r.naive == Rational(1, 8));

   const EntangleResult f = run_group_description(nlohmann::json::parse(R"({"moduli": [2, 3], "construction": {"type": "full_product"}})"));
   CHECK(f.delta == Rational(235, 288));

   const EntangleResult i2 = run_group_description(nlohmann::json::parse(R"({"construction": {"type": "index2", "factor_sizes": [2, 2]}})"));
   CHECK(i2.delta == Rational(1, 2));

   const EntangleResult g = run_group_description(nlohmann::json::parse(R"({"moduli": [5], "generators": [[[1,1,0,1]]]})"));
   CHECK(g.order == 5);
   CHECK(g.delta == Rational(4, 5));

   CHECK_THROWS_AS(run_group_description(nlohmann::json::parse(R"({"moduli": [5], "extra": 1})")), Error);
   CHECK_THROWS_AS(run_group_description(nlohmann::json::parse(R"({"moduli": [5], "generators": [[[1,1,0]]]})")), Error);
   CHECK_THROWS_AS(run_group_description(nlohmann::json::parse(R"({"moduli": [5], "construction": {"type": "nope"}})")), Error);
}
