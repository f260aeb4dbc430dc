#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "akns/field.hpp"
#include "akns/rational.hpp"

namespace akns {

/// Abstract block dimensions; numeric sizes bind only at evaluation time.
enum class Space : std::uint8_t { N, M };

/// u, û and the auxiliary diagonal Darboux symbols 𝒜 (N×N), 𝒟 (M×M).
enum class Base : std::uint8_t { U, UHat, AuxA, AuxD };

struct Symbol {
  Base base = Base::U;
  int order = 0;  // ∂ₓ^order applied to base

  Space row() const;
  Space col() const;
  bool is_aux() const { return base == Base::AuxA || base == Base::AuxD; }
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

inline Symbol sym_u(int k = 0) { return {Base::U, k}; }
inline Symbol sym_uh(int k = 0) { return {Base::UHat, k}; }
inline Symbol sym_A(int k = 0) { return {Base::AuxA, k}; }
inline Symbol sym_D(int k = 0) { return {Base::AuxD, k}; }

using Word = std::vector<Symbol>;

/// Canonical word order: shorter first, then lexicographic on (base, order).
struct WordLess {
  bool operator()(const Word& a, const Word& b) const;
};

struct Shape {
  Space row = Space::N;
  Space col = Space::N;
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline constexpr Shape kShapeNN{Space::N, Space::N};
inline constexpr Shape kShapeNM{Space::N, Space::M};
inline constexpr Shape kShapeMN{Space::M, Space::N};
inline constexpr Shape kShapeMM{Space::M, Space::M};

std::string to_string(Shape s);

/// Exact noncommutative differential polynomial of a declared block shape.
/// Terms are kept in canonical order with nonzero coefficients, so equal
/// polynomials compare equal. The empty word is the identity (square shapes).
class NcPoly {
 public:
  using Terms = std::map<Word, Rational, WordLess>;

  explicit NcPoly(Shape s) : shape_(s) {}
  static NcPoly symbol(Symbol s, Rational c = 1);
  static NcPoly identity(Space s, Rational c = 1);
  static NcPoly word(const Word& w, Rational c = 1);

  Shape shape() const { return shape_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Adds c·w; throws ShapeMismatch if w is not composable or has the wrong shape.
  NcPoly& add_term(const Word& w, const Rational& c);

  /// Highest derivative order over all factors (-1 for zero / identity only).
  int max_order() const;
  bool has_aux() const;
  /// Every monomial has weight `w` under deg ∂ₓ = deg u = deg û = 1.
  bool homogeneous(int w) const;

  NcPoly operator-() const;
  NcPoly& operator+=(const NcPoly& o);
  NcPoly& operator-=(const NcPoly& o);
  NcPoly& operator*=(const Rational& c);
  friend NcPoly operator+(NcPoly a, const NcPoly& b) { return a += b; }
  friend NcPoly operator-(NcPoly a, const NcPoly& b) { return a -= b; }
  friend NcPoly operator*(const Rational& c, NcPoly a) { return a *= c; }
  friend NcPoly operator*(NcPoly a, const Rational& c) { return a *= c; }
  friend bool operator==(const NcPoly&, const NcPoly&) = default;

 private:
  Shape shape_;
  Terms terms_;
};

/// Shape of a nonempty word (throws ShapeMismatch if not composable).
Shape word_shape(const Word& w);
int word_weight(const Word& w);

NcPoly nc_mul(const NcPoly& a, const NcPoly& b);
inline NcPoly operator*(const NcPoly& a, const NcPoly& b) { return nc_mul(a, b); }

/// Leibniz derivative. Auxiliary symbols get their order raised like any other.
NcPoly nc_derive(const NcPoly& p);
NcPoly nc_derive(const NcPoly& p, int times);

/// Canonical form; terms are always stored canonically so this is a copy.
NcPoly normalize(const NcPoly& p);

/// Rewrite rules eliminating 𝒜, 𝒟: derivatives ∂𝒜 = dA, ∂𝒟 = dD and the
/// contractions u·𝒜 = uA, û·𝒟 = uhD (all aux-free).
struct AuxRules {
  NcPoly dA{kShapeNN};
  NcPoly dD{kShapeMM};
  NcPoly uA{kShapeMN};
  NcPoly uhD{kShapeNM};

  /// Rules implied by ∂ₓ𝒦 = Q𝒦 for the matrix Darboux 𝒦 = [[𝒜, −û], [u, 𝒟]].
  static AuxRules matrix_darboux();
};

/// Eliminates every auxiliary symbol using `rules`. An auxiliary factor that
/// leads a word has nothing to contract with: ResidualAuxiliarySymbols.
NcPoly eliminate_aux(const NcPoly& p, const AuxRules& rules);

/// Stable text form, e.g. "-2 * u * u.hat * u + d2(u)".
std::string to_string(const Symbol& s);
std::string to_string(const Word& w);
std::string to_string(const NcPoly& p);

/// Numeric value of a symbol; must return an M×N / N×M / N×N / M×M matrix.
using SymbolValue = std::function<MatC(const Symbol&)>;

/// Substitutes symbol values and multiplies out; linear in p.
MatC nc_eval(const NcPoly& p, const SymbolValue& value, int N, int M);
/// Substitutes FD derivatives of the sampled field at grid index i.
MatC nc_eval(const NcPoly& p, const FieldJet& jet, int i);
MatC nc_eval(const NcPoly& p, const GridField& field, int i, const FdScheme& fd);

}  // namespace akns
