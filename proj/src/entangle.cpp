#include "cyclored/entangle.hpp"

#include <algorithm>
#include <bit>

#include "cyclored/error.hpp"

namespace cyclored {

Mat2 mat_mul(const Mat2& x, const Mat2& y, u64 ell) {
   return {add_mod(mul_mod(x[0], y[0], ell), mul_mod(x[1], y[2], ell), ell),
           add_mod(mul_mod(x[0], y[1], ell), mul_mod(x[1], y[3], ell), ell),
           add_mod(mul_mod(x[2], y[0], ell), mul_mod(x[3], y[2], ell), ell),
           add_mod(mul_mod(x[2], y[1], ell), mul_mod(x[3], y[3], ell), ell)};
}

Mat2 mat_identity() {
   return {1, 0, 0, 1};
}

bool is_identity(const Mat2& m) {
   return m == mat_identity();
}

namespace {

u64 det_mod(const Mat2& m, u64 ell) {
   return sub_mod(mul_mod(m[0], m[3], ell), mul_mod(m[1], m[2], ell), ell);
}

u64 primitive_root(u64 ell) {
   if(ell == 2) {
      return 1;
   }
   const auto fac = factorize(ell - 1);
   for(u64 g = 2;; ++g) {
      bool ok = true;
      for(const auto& pp : fac) {
         ok = ok && pow_mod(g, (ell - 1) / pp.prime, ell) != 1;
      }
      if(ok) {
         return g;
      }
   }
}

// Open addressing over u64 keys, storing key + 1 so that 0 marks an empty slot.
class KeySet {
   public:
      explicit KeySet(u64 expected) : slots_(std::bit_ceil(std::max<u64>(16, 2 * expected)), 0), mask_(slots_.size() - 1) {}

      bool insert(u64 key) {
         if(2 * (size_ + 1) > slots_.size()) {
            grow();
         }
         const u64 stored = key + 1;
         for(u64 i = mix64(key) & mask_;; i = (i + 1) & mask_) {
            if(slots_[i] == stored) {
               return false;
            }
            if(slots_[i] == 0) {
               slots_[i] = stored;
               ++size_;
               return true;
            }
         }
      }

   private:
      void grow() {
         std::vector<u64> old(slots_.size() * 2, 0);
         old.swap(slots_);
         mask_ = slots_.size() - 1;
         size_ = 0;
         for(u64 s : old) {
            if(s != 0) {
               insert(s - 1);
            }
         }
      }

      std::vector<u64> slots_;
      u64 mask_;
      u64 size_ = 0;
};

// Key spaces up to this many bits use a flat bitmap (which also yields the sorted order).
constexpr u64 bitmap_limit = u64(1) << 31;

struct Radix {
      std::vector<u64> block;   // ell_i^4
      std::vector<u64> stride;  // product of later blocks
      u128 space = 1;
};

Radix make_radix(const std::vector<u64>& moduli) {
   Radix r;
   r.block.resize(moduli.size());
   r.stride.resize(moduli.size());
   for(std::size_t i = moduli.size(); i-- > 0;) {
      r.stride[i] = static_cast<u64>(r.space);
      r.block[i] = moduli[i] * moduli[i] * moduli[i] * moduli[i];
      r.space *= r.block[i];
      if(r.space > static_cast<u128>(~u64(0))) {
         throw Error(ErrorCode::InvalidArgument, "modulus set too large for 64-bit element keys");
      }
   }
   return r;
}

}  // namespace

std::vector<Mat2> gl2_generators(u64 ell) {
   return {Mat2{primitive_root(ell) % ell, 0, 0, 1}, Mat2{ell - 1, 1, ell - 1, 0}, Mat2{1, 1, 0, 1}};
}

MatrixTupleGroup::MatrixTupleGroup(std::vector<u64> moduli, std::vector<MatrixTuple> generators, u64 cap)
      : moduli_(std::move(moduli)), generators_(std::move(generators)) {
   if(moduli_.empty()) {
      throw Error(ErrorCode::InvalidArgument, "a matrix tuple group needs at least one modulus");
   }
   for(std::size_t i = 0; i < moduli_.size(); ++i) {
      if(moduli_[i] >= (u64(1) << 16) || !is_prime(moduli_[i])) {
         throw Error(ErrorCode::InvalidArgument, "moduli must be primes below 2^16");
      }
      for(std::size_t j = 0; j < i; ++j) {
         if(moduli_[i] == moduli_[j]) {
            throw Error(ErrorCode::InvalidArgument, "moduli must be distinct");
         }
      }
   }
   for(auto& g : generators_) {
      if(g.size() != moduli_.size()) {
         throw Error(ErrorCode::InvalidArgument, "generator has the wrong number of components");
      }
      for(std::size_t i = 0; i < g.size(); ++i) {
         for(auto& entry : g[i]) {
            entry %= moduli_[i];
         }
         if(det_mod(g[i], moduli_[i]) == 0) {
            throw Error(ErrorCode::InvalidArgument, "generator component is singular");
         }
      }
   }

   const Radix radix = make_radix(moduli_);
   // Breadth-first closure under right multiplication by generators; in a
   // finite group the generated monoid is the generated group.
   const bool flat = radix.space <= bitmap_limit;
   std::vector<u64> bitmap(flat ? static_cast<std::size_t>((radix.space + 63) / 64) : 0, 0);
   KeySet hashed(flat ? 0 : 1024);
   auto insert = [&](u64 key) {
      if(flat) {
         u64& word = bitmap[key / 64];
         const u64 bit = u64(1) << (key % 64);
         if(word & bit) {
            return false;
         }
         word |= bit;
         return true;
      }
      return hashed.insert(key);
   };

   // Generators usually act on few components; only those blocks of the key change.
   struct Action {
         std::vector<std::size_t> components;
         const MatrixTuple* g;
   };
   std::vector<Action> actions;
   for(const auto& g : generators_) {
      Action a{{}, &g};
      for(std::size_t i = 0; i < g.size(); ++i) {
         if(!is_identity(g[i])) {
            a.components.push_back(i);
         }
      }
      actions.push_back(std::move(a));
   }

   const u64 id = encode(MatrixTuple(moduli_.size(), mat_identity()));
   insert(id);
   keys_.push_back(id);
   for(std::size_t head = 0; head < keys_.size(); ++head) {
      const u64 x = keys_[head];
      for(const Action& a : actions) {
         u64 key = x;
         for(std::size_t i : a.components) {
            const u64 l = moduli_[i];
            const u64 block = (x / radix.stride[i]) % radix.block[i];
            const u64 m0 = block / (l * l * l), m1 = block / (l * l) % l, m2 = block / l % l, m3 = block % l;
            const Mat2& g = (*a.g)[i];
            const u64 y0 = (m0 * g[0] + m1 * g[2]) % l, y1 = (m0 * g[1] + m1 * g[3]) % l;
            const u64 y2 = (m2 * g[0] + m3 * g[2]) % l, y3 = (m2 * g[1] + m3 * g[3]) % l;
            key += (((y0 * l + y1) * l + y2) * l + y3 - block) * radix.stride[i];
         }
         if(insert(key)) {
            if(keys_.size() >= cap) {
               throw Error(ErrorCode::ClosureCapExceeded,
                           "closure exceeds " + std::to_string(cap) + " elements");
            }
            keys_.push_back(key);
         }
      }
   }

   if(flat) {
      std::size_t out = 0;
      for(std::size_t w = 0; w < bitmap.size(); ++w) {
         for(u64 bits = bitmap[w]; bits != 0; bits &= bits - 1) {
            keys_[out++] = w * 64 + static_cast<u64>(std::countr_zero(bits));
         }
      }
   } else {
      std::sort(keys_.begin(), keys_.end());
   }
}

u64 MatrixTupleGroup::encode(const MatrixTuple& t) const {
   u64 key = 0;
   for(std::size_t i = 0; i < moduli_.size(); ++i) {
      const u64 l = moduli_[i];
      key = key * (l * l * l * l) + ((t[i][0] * l + t[i][1]) * l + t[i][2]) * l + t[i][3];
   }
   return key;
}

MatrixTuple MatrixTupleGroup::decode(u64 key) const {
   MatrixTuple t(moduli_.size());
   for(std::size_t i = moduli_.size(); i-- > 0;) {
      const u64 l = moduli_[i];
      for(std::size_t e = 4; e-- > 0;) {
         t[i][e] = key % l;
         key /= l;
      }
   }
   return t;
}

MatrixTuple MatrixTupleGroup::element(u64 index) const {
   return decode(keys_.at(index));
}

bool MatrixTupleGroup::contains(const MatrixTuple& t) const {
   if(t.size() != moduli_.size()) {
      return false;
   }
   MatrixTuple r = t;
   for(std::size_t i = 0; i < r.size(); ++i) {
      for(auto& entry : r[i]) {
         entry %= moduli_[i];
      }
   }
   return std::binary_search(keys_.begin(), keys_.end(), encode(r));
}

u64 MatrixTupleGroup::projection_order(std::size_t i) const {
   const Radix radix = make_radix(moduli_);
   std::vector<bool> seen(radix.block.at(i), false);
   u64 count = 0;
   for(u64 key : keys_) {
      const u64 b = (key / radix.stride[i]) % radix.block[i];
      if(!seen[b]) {
         seen[b] = true;
         ++count;
      }
   }
   return count;
}

MatrixTupleGroup full_product(const std::vector<u64>& moduli, u64 cap) {
   std::vector<MatrixTuple> gens;
   for(std::size_t i = 0; i < moduli.size(); ++i) {
      for(const Mat2& m : gl2_generators(moduli[i])) {
         MatrixTuple t(moduli.size(), mat_identity());
         t[i] = m;
         gens.push_back(std::move(t));
      }
   }
   return MatrixTupleGroup(moduli, std::move(gens), cap);
}

MatrixTupleGroup direct_product(const MatrixTupleGroup& g1, const MatrixTupleGroup& g2, u64 cap) {
   std::vector<u64> moduli = g1.moduli();
   moduli.insert(moduli.end(), g2.moduli().begin(), g2.moduli().end());
   std::vector<MatrixTuple> gens;
   for(const auto& g : g1.generators()) {
      MatrixTuple t = g;
      t.resize(moduli.size(), mat_identity());
      gens.push_back(std::move(t));
   }
   for(const auto& g : g2.generators()) {
      MatrixTuple t(g1.moduli().size(), mat_identity());
      t.insert(t.end(), g.begin(), g.end());
      gens.push_back(std::move(t));
   }
   return MatrixTupleGroup(std::move(moduli), std::move(gens), cap);
}

Rational delta_exact(const MatrixTupleGroup& g) {
   const Radix radix = make_radix(g.moduli());
   std::vector<u64> id_block(g.moduli().size());
   for(std::size_t i = 0; i < id_block.size(); ++i) {
      const u64 l = g.moduli()[i];
      id_block[i] = l * l * l + 1;
   }
   u64 count = 0;
   for(u64 key : g.keys()) {
      bool everywhere = true;
      for(std::size_t i = 0; i < id_block.size() && everywhere; ++i) {
         everywhere = (key / radix.stride[i]) % radix.block[i] != id_block[i];
      }
      count += everywhere;
   }
   Rational r(mpz_class(static_cast<unsigned long>(count)), mpz_class(static_cast<unsigned long>(g.order())));
   r.canonicalize();
   return r;
}

Rational naive_product(const MatrixTupleGroup& g) {
   Rational r = 1;
   for(std::size_t i = 0; i < g.moduli().size(); ++i) {
      r *= Rational(1) - Rational(1, static_cast<unsigned long>(g.projection_order(i)));
   }
   return r;
}

MatrixTupleGroup norm_one_construction(const std::array<Mat2, 3>& elements, const MatrixTupleGroup& ambient) {
   const auto& moduli = ambient.moduli();
   if(moduli.size() != 3) {
      throw Error(ErrorCode::InvalidArgument, "norm-one construction needs exactly three components");
   }
   std::array<Mat2, 3> e = elements;
   for(std::size_t i = 0; i < 3; ++i) {
      const u64 l = moduli[i];
      for(auto& entry : e[i]) {
         entry %= l;
      }
      if(is_identity(e[i]) || !is_identity(mat_mul(e[i], e[i], l))) {
         throw Error(ErrorCode::NotOrderTwo, "component " + std::to_string(i) + " element does not have order 2");
      }
      for(const auto& g : ambient.generators()) {
         if(mat_mul(e[i], g[i], l) != mat_mul(g[i], e[i], l)) {
            throw Error(ErrorCode::NotCentral,
                        "component " + std::to_string(i) + " element does not commute with the ambient projection");
         }
      }
   }
   const Mat2 I = mat_identity();
   std::vector<MatrixTuple> gens{{e[0], e[1], I}, {e[0], I, e[2]}};
   for(const auto& g : gens) {
      if(!ambient.contains(g)) {
         throw Error(ErrorCode::InvalidArgument, "norm-one generator is not in the ambient group");
      }
   }
   return MatrixTupleGroup(moduli, std::move(gens));
}

CharacterFactor sign_factor(const mpz_class& order) {
   if(order < 2 || order % 2 != 0) {
      throw Error(ErrorCode::CharacterNotSurjective,
                  "a group of order " + order.get_str() + " has no surjective quadratic character");
   }
   return {order, order / 2};
}

CharacterFactor labeled_factor(const std::vector<int>& values, std::size_t identity) {
   if(identity >= values.size() || values[identity] != 1) {
      throw Error(ErrorCode::InvalidArgument, "the identity must map to +1");
   }
   u64 plus = 0, minus = 0;
   for(int v : values) {
      if(v == 1) {
         ++plus;
      } else if(v == -1) {
         ++minus;
      } else {
         throw Error(ErrorCode::InvalidArgument, "character values must be +1 or -1");
      }
   }
   if(minus == 0) {
      throw Error(ErrorCode::CharacterNotSurjective, "character never takes the value -1");
   }
   if(plus != minus) {
      throw Error(ErrorCode::InvalidArgument, "character fibers differ in size");
   }
   return {mpz_class(static_cast<unsigned long>(values.size())), mpz_class(static_cast<unsigned long>(plus))};
}

Index2Model index2_character_subgroup(const std::vector<CharacterFactor>& factors) {
   if(factors.size() < 2) {
      throw Error(ErrorCode::InvalidArgument, "the index-2 model needs at least two factors");
   }
   Index2Model m;
   m.factors = factors;
   m.order = 1;
   // count[s]: tuples of nontrivial coordinates whose character product is (-1)^s.
   mpz_class count[2] = {1, 0};
   for(const auto& f : factors) {
      if(f.order < 2 || 2 * f.kernel != f.order) {
         throw Error(ErrorCode::CharacterNotSurjective, "factor character is not a surjection onto +-1");
      }
      const mpz_class plus = f.kernel - 1;
      const mpz_class minus = f.order - f.kernel;
      const mpz_class even = count[0] * plus + count[1] * minus;
      const mpz_class odd = count[0] * minus + count[1] * plus;
      count[0] = even;
      count[1] = odd;
      m.order *= f.order;
   }
   m.order /= 2;
   m.everywhere_nontrivial = count[0];
   m.density = Rational(m.everywhere_nontrivial, m.order);
   m.density.canonicalize();
   return m;
}

namespace {

[[noreturn]] void schema(const std::string& what) {
   throw Error(ErrorCode::SchemaMismatch, "group description: " + what);
}

Mat2 parse_mat(const nlohmann::json& j) {
   if(!j.is_array() || j.size() != 4) {
      schema("matrix must be an array of four integers");
   }
   Mat2 m{};
   for(std::size_t k = 0; k < 4; ++k) {
      if(!j[k].is_number_unsigned()) {
         schema("matrix entries must be non-negative residues");
      }
      m[k] = j[k].get<u64>();
   }
   return m;
}

}  // namespace

EntangleResult run_group_description(const nlohmann::json& doc) {
   if(!doc.is_object()) {
      schema("document must be an object");
   }
   for(const auto& [key, value] : doc.items()) {
      if(key != "moduli" && key != "generators" && key != "cap" && key != "construction" && key != "label" &&
         key != "comment") {
         schema("unknown key '" + key + "'");
      }
   }
   std::string type = "generators";
   const nlohmann::json* construction = nullptr;
   if(doc.contains("construction")) {
      construction = &doc["construction"];
      if(!construction->is_object() || !construction->contains("type") || !(*construction)["type"].is_string()) {
         schema("construction needs a string 'type'");
      }
      type = (*construction)["type"].get<std::string>();
   }

   EntangleResult r;
   r.construction = type;
   if(type == "index2") {
      if(!construction->contains("factor_sizes") || !(*construction)["factor_sizes"].is_array()) {
         schema("index2 needs 'factor_sizes'");
      }
      std::vector<CharacterFactor> factors;
      r.naive = 1;
      for(const auto& s : (*construction)["factor_sizes"]) {
         if(!s.is_number_unsigned()) {
            schema("factor sizes must be positive integers");
         }
         const mpz_class n(static_cast<unsigned long>(s.get<u64>()));
         factors.push_back(sign_factor(n));
         r.naive *= Rational(1) - Rational(mpz_class(1), n);
      }
      const Index2Model m = index2_character_subgroup(factors);
      r.order = m.order;
      r.delta = m.density;
      return r;
   }

   if(!doc.contains("moduli") || !doc["moduli"].is_array()) {
      schema("'moduli' must be an array");
   }
   for(const auto& l : doc["moduli"]) {
      if(!l.is_number_unsigned()) {
         schema("moduli must be positive integers");
      }
      r.moduli.push_back(l.get<u64>());
   }
   u64 cap = default_closure_cap;
   if(doc.contains("cap")) {
      if(!doc["cap"].is_number_unsigned()) {
         schema("'cap' must be a positive integer");
      }
      cap = doc["cap"].get<u64>();
   }
   std::vector<MatrixTuple> gens;
   if(doc.contains("generators")) {
      if(!doc["generators"].is_array()) {
         schema("'generators' must be an array");
      }
      for(const auto& g : doc["generators"]) {
         if(!g.is_array() || g.size() != r.moduli.size()) {
            schema("each generator needs one matrix per modulus");
         }
         MatrixTuple t;
         for(const auto& m : g) {
            t.push_back(parse_mat(m));
         }
         gens.push_back(std::move(t));
      }
   }

   auto finish = [&r](const MatrixTupleGroup& g) {
      r.order = mpz_class(static_cast<unsigned long>(g.order()));
      r.delta = delta_exact(g);
      r.naive = naive_product(g);
      return r;
   };
   if(type == "generators") {
      return finish(MatrixTupleGroup(r.moduli, std::move(gens), cap));
   }
   if(type == "full_product") {
      return finish(full_product(r.moduli, cap));
   }
   if(type == "norm_one") {
      if(!construction->contains("elements") || !(*construction)["elements"].is_array() ||
         (*construction)["elements"].size() != 3) {
         schema("norm_one needs three 'elements'");
      }
      std::array<Mat2, 3> e;
      for(std::size_t i = 0; i < 3; ++i) {
         e[i] = parse_mat((*construction)["elements"][i]);
      }
      if(!doc.contains("generators")) {
         // Default ambient: prod <e_i>, of order 8.
         for(std::size_t i = 0; i < 3 && i < r.moduli.size(); ++i) {
            MatrixTuple t(r.moduli.size(), mat_identity());
            t[i] = e[i];
            gens.push_back(std::move(t));
         }
      }
      const MatrixTupleGroup ambient(r.moduli, std::move(gens), cap);
      return finish(norm_one_construction(e, ambient));
   }
   schema("unknown construction type '" + type + "'");
}

nlohmann::json entangle_result_to_json(const EntangleResult& r) {
   auto rat = [](const Rational& q) {
      return nlohmann::json{{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}};
   };
   return {{"schema_version", 1},
           {"kind", "entangle"},
           {"construction", r.construction},
           {"moduli", r.moduli},
           {"order", r.order.get_str()},
           {"delta", rat(r.delta)},
           {"naive", rat(r.naive)}};
}

}  // namespace cyclored
