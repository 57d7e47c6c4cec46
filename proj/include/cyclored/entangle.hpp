#pragma once

// Explicit finite subgroups of prod GL_2(F_ell_i): closure enumeration, exact
// everywhere-nontrivial densities, the three-component norm-one (Klein four)
// construction, and the index-2 character-kernel model.

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclored/density.hpp"
#include "cyclored/modmath.hpp"

namespace cyclored {

/// Row-major [[a, b], [c, d]] with entries reduced mod the component prime.
using Mat2 = std::array<u64, 4>;

/// Component i lives in GL_2(F_{moduli[i]}).
using MatrixTuple = std::vector<Mat2>;

Mat2 mat_mul(const Mat2& x, const Mat2& y, u64 ell);
Mat2 mat_identity();
bool is_identity(const Mat2& m);

/// Generators of GL_2(F_ell): diag(g, 1) for a primitive root g, [[-1, 1], [-1, 0]], [[1, 1], [0, 1]].
std::vector<Mat2> gl2_generators(u64 ell);

inline constexpr u64 default_closure_cap = 10'000'000;

class MatrixTupleGroup {
   public:
      /// Enumerates the subgroup generated by `generators`. Throws
      /// ClosureCapExceeded, or InvalidArgument on a singular or misshapen generator.
      MatrixTupleGroup(std::vector<u64> moduli, std::vector<MatrixTuple> generators, u64 cap = default_closure_cap);

      const std::vector<u64>& moduli() const { return moduli_; }
      const std::vector<MatrixTuple>& generators() const { return generators_; }
      u64 order() const { return keys_.size(); }

      /// Elements in increasing key order, which is lexicographic in the
      /// concatenated entries (a, b, c, d) of component 0, then 1, ...
      const std::vector<u64>& keys() const { return keys_; }
      MatrixTuple element(u64 index) const;

      u64 encode(const MatrixTuple& t) const;
      MatrixTuple decode(u64 key) const;
      bool contains(const MatrixTuple& t) const;

      /// Distinct images of the projection to component i.
      u64 projection_order(std::size_t i) const;

   private:
      std::vector<u64> moduli_;
      std::vector<MatrixTuple> generators_;
      std::vector<u64> keys_;
};

/// Subgroup generated by the full standard generating sets, i.e. prod GL_2(F_ell).
MatrixTupleGroup full_product(const std::vector<u64>& moduli, u64 cap = default_closure_cap);

/// G1 x G2 over the concatenated moduli (which must stay distinct).
MatrixTupleGroup direct_product(const MatrixTupleGroup& g1, const MatrixTupleGroup& g2, u64 cap = default_closure_cap);

/// Fraction of elements whose projection to every component is nontrivial.
Rational delta_exact(const MatrixTupleGroup& g);

/// prod over components of (1 - 1/|pi_i(G)|).
Rational naive_product(const MatrixTupleGroup& g);

/// The order-4 subgroup of <e_1> x <e_2> x <e_3> with an even number of
/// nontrivial entries. Each e_i must be an involution commuting with the
/// ambient generators' i-th components, and the result must lie in `ambient`.
MatrixTupleGroup norm_one_construction(const std::array<Mat2, 3>& elements, const MatrixTupleGroup& ambient);

/// A finite group reduced to what the fiber count needs: its order and the
/// size of the kernel of a surjective quadratic character. The identity is
/// always in the kernel.
struct CharacterFactor {
      mpz_class order;
      mpz_class kernel;
};

/// Sign character on an abstract group of even order.
CharacterFactor sign_factor(const mpz_class& order);

/// From explicit character values on a labeled set; values[identity] must be +1
/// and the two fibers must have equal size.
CharacterFactor labeled_factor(const std::vector<int>& values, std::size_t identity);

struct Index2Model {
      std::vector<CharacterFactor> factors;
      mpz_class order;                  ///< |kernel of the product character| = prod |G_i| / 2
      mpz_class everywhere_nontrivial;  ///< kernel elements with every coordinate nontrivial
      Rational density;
};

/// Counts the kernel of prod chi_i by a parity convolution over factor fibers.
/// Needs at least two factors.
Index2Model index2_character_subgroup(const std::vector<CharacterFactor>& factors);

/// Result of running a group-description document.
struct EntangleResult {
      std::vector<u64> moduli;
      mpz_class order;
      Rational delta;
      Rational naive;
      std::string construction;  ///< "generators", "full_product", "norm_one" or "index2"
};

/// Document shape:
///   {"moduli": [7, 11, 13], "generators": [[[a,b,c,d], ...], ...], "cap": 10000000,
///    "construction": {"type": "norm_one", "elements": [[a,b,c,d] x3]}
///                  | {"type": "full_product"}
///                  | {"type": "index2", "factor_sizes": [6, 13200]}}
/// For norm_one the ambient group is the one generated by "generators", or
/// prod <e_i> when none are given. Throws SchemaMismatch on unexpected structure.
EntangleResult run_group_description(const nlohmann::json& doc);
nlohmann::json entangle_result_to_json(const EntangleResult& r);

}  // namespace cyclored
