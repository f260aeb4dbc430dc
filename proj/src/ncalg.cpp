#include "akns/ncalg.hpp"

#include <algorithm>
#include <sstream>

#include "akns/errors.hpp"

namespace akns {

Space Symbol::row() const {
  switch (base) {
    case Base::U: return Space::M;
    case Base::UHat: return Space::N;
    case Base::AuxA: return Space::N;
    case Base::AuxD: return Space::M;
  }
  return Space::N;
}

Space Symbol::col() const {
  switch (base) {
    case Base::U: return Space::N;
    case Base::UHat: return Space::M;
    case Base::AuxA: return Space::N;
    case Base::AuxD: return Space::M;
  }
  return Space::N;
}

bool WordLess::operator()(const Word& a, const Word& b) const {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::string to_string(Shape s) {
  auto c = [](Space x) { return x == Space::N ? "N" : "M"; };
  return std::string(c(s.row)) + "x" + c(s.col);
}

Shape word_shape(const Word& w) {
  if (w.empty()) throw ShapeMismatch("empty word has no intrinsic shape");
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i - 1].col() != w[i].row()) {
      throw ShapeMismatch("factors " + to_string(w[i - 1]) + " and " + to_string(w[i]) + " do not compose");
    }
  }
  return {w.front().row(), w.back().col()};
}

int word_weight(const Word& w) {
  int s = 0;
  for (const auto& f : w) s += 1 + f.order;
  return s;
}

NcPoly NcPoly::symbol(Symbol s, Rational c) { return word({s}, c); }

NcPoly NcPoly::identity(Space s, Rational c) {
  NcPoly p({s, s});
  p.add_term({}, c);
  return p;
}

NcPoly NcPoly::word(const Word& w, Rational c) {
  NcPoly p(word_shape(w));
  p.add_term(w, c);
  return p;
}

NcPoly& NcPoly::add_term(const Word& w, const Rational& c) {
  if (w.empty()) {
    if (shape_.row != shape_.col) throw ShapeMismatch("identity term in non-square polynomial " + to_string(shape_));
  } else if (!(word_shape(w) == shape_)) {
    throw ShapeMismatch("word " + to_string(w) + " is " + to_string(word_shape(w)) + ", polynomial is " +
                        to_string(shape_));
  }
  if (c.is_zero()) return *this;
  auto [it, fresh] = terms_.try_emplace(w, c);
  if (!fresh) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
  return *this;
}

int NcPoly::max_order() const {
  int m = -1;
  for (const auto& [w, c] : terms_)
    for (const auto& f : w) m = std::max(m, f.order);
  return m;
}

bool NcPoly::has_aux() const {
  for (const auto& [w, c] : terms_)
    for (const auto& f : w)
      if (f.is_aux()) return true;
  return false;
}

bool NcPoly::homogeneous(int weight) const {
  return std::all_of(terms_.begin(), terms_.end(), [&](const auto& t) { return word_weight(t.first) == weight; });
}

NcPoly NcPoly::operator-() const {
  NcPoly r = *this;
  for (auto& [w, c] : r.terms_) c = -c;
  return r;
}

NcPoly& NcPoly::operator+=(const NcPoly& o) {
  if (!(o.shape_ == shape_)) throw ShapeMismatch("adding " + to_string(o.shape_) + " to " + to_string(shape_));
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

NcPoly& NcPoly::operator-=(const NcPoly& o) { return *this += -o; }

NcPoly& NcPoly::operator*=(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, k] : terms_) k *= c;
  return *this;
}

NcPoly nc_mul(const NcPoly& a, const NcPoly& b) {
  if (a.shape().col != b.shape().row) {
    throw ShapeMismatch("cannot multiply " + to_string(a.shape()) + " by " + to_string(b.shape()));
  }
  NcPoly r({a.shape().row, b.shape().col});
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      r.add_term(w, ca * cb);
    }
  }
  return r;
}

NcPoly nc_derive(const NcPoly& p) {
  NcPoly r(p.shape());
  for (const auto& [w, c] : p.terms()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      Word d = w;
      ++d[i].order;
      r.add_term(d, c);
    }
  }
  return r;
}

NcPoly nc_derive(const NcPoly& p, int times) {
  NcPoly r = p;
  for (int k = 0; k < times; ++k) r = nc_derive(r);
  return r;
}

NcPoly normalize(const NcPoly& p) { return p; }

AuxRules AuxRules::matrix_darboux() {
  AuxRules r;
  r.dA = NcPoly::word({sym_uh(), sym_u()});
  r.dD = NcPoly::word({sym_u(), sym_uh()}, -1);
  r.uA = NcPoly::symbol(sym_u(1));
  r.uhD = NcPoly::symbol(sym_uh(1), -1);
  return r;
}

namespace {

class AuxEliminator {
 public:
  explicit AuxEliminator(const AuxRules& r) : rules_(r) {
    if (r.dA.has_aux() || r.dD.has_aux() || r.uA.has_aux() || r.uhD.has_aux()) {
      throw ResidualAuxiliarySymbols("rewrite rules must be free of auxiliary symbols");
    }
  }

  NcPoly run(const NcPoly& p) {
    NcPoly cur = p;
    while (cur.has_aux()) {
      NcPoly next(cur.shape());
      for (const auto& [w, c] : cur.terms()) next += c * rewrite_once(w);
      cur = std::move(next);
    }
    return cur;
  }

 private:
  // ∂ᵏ𝒜 and the contractions ∂ᵏu·𝒜, ∂ᵏû·𝒟, memoized by k.
  const NcPoly& aux_derivative(Base b, int k) {
    auto& cache = b == Base::AuxA ? dA_ : dD_;
    while (static_cast<int>(cache.size()) < k) {
      cache.push_back(cache.empty() ? (b == Base::AuxA ? rules_.dA : rules_.dD) : nc_derive(cache.back()));
    }
    return cache[static_cast<std::size_t>(k - 1)];
  }

  const NcPoly& contraction(Base b, int k) {
    const bool a = b == Base::AuxA;
    auto& cache = a ? rA_ : rD_;
    while (static_cast<int>(cache.size()) <= k) {
      const int j = static_cast<int>(cache.size());
      if (j == 0) {
        cache.push_back(a ? rules_.uA : rules_.uhD);
      } else {
        NcPoly prev = nc_derive(cache.back());
        prev -= NcPoly::symbol(a ? sym_u(j - 1) : sym_uh(j - 1)) * (a ? rules_.dA : rules_.dD);
        cache.push_back(std::move(prev));
      }
    }
    return cache[static_cast<std::size_t>(k)];
  }

  NcPoly splice(const Word& w, std::size_t from, std::size_t to, const NcPoly& mid) {
    NcPoly r = mid;
    if (from > 0) r = NcPoly::word(Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(from))) * r;
    if (to < w.size()) r = r * NcPoly::word(Word(w.begin() + static_cast<std::ptrdiff_t>(to), w.end()));
    return r;
  }

  NcPoly rewrite_once(const Word& w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].is_aux() && w[i].order > 0) return splice(w, i, i + 1, aux_derivative(w[i].base, w[i].order));
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_aux()) continue;
      if (i == 0) throw ResidualAuxiliarySymbols("auxiliary symbol leads word " + to_string(w));
      const Symbol& prev = w[i - 1];
      const Base want = w[i].base == Base::AuxA ? Base::U : Base::UHat;
      if (prev.base != want) throw ResidualAuxiliarySymbols("no contraction rule for " + to_string(w));
      return splice(w, i - 1, i + 1, contraction(w[i].base, prev.order));
    }
    return NcPoly::word(w);
  }

  const AuxRules& rules_;
  std::vector<NcPoly> dA_, dD_, rA_, rD_;
};

}  // namespace

NcPoly eliminate_aux(const NcPoly& p, const AuxRules& rules) { return AuxEliminator(rules).run(p); }

std::string to_string(const Symbol& s) {
  std::string name;
  switch (s.base) {
    case Base::U: name = "u"; break;
    case Base::UHat: name = "u.hat"; break;
    case Base::AuxA: name = "A"; break;
    case Base::AuxD: name = "D"; break;
  }
  return s.order == 0 ? name : "d" + std::to_string(s.order) + "(" + name + ")";
}

std::string to_string(const Word& w) {
  if (w.empty()) return "I";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? " * " : "") + to_string(w[i]);
  return out;
}

std::string to_string(const NcPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : p.terms()) {
    const bool neg = c < Rational(0);
    const Rational mag = neg ? -c : c;
    if (first) {
      os << (neg ? "-" : "");
    } else {
      os << (neg ? " - " : " + ");
    }
    if (mag != Rational(1)) os << mag.str() << " * ";
    os << to_string(w);
    first = false;
  }
  return os.str();
}

MatC nc_eval(const NcPoly& p, const SymbolValue& value, int N, int M) {
  auto dim = [&](Space s) { return s == Space::N ? N : M; };
  const int rows = dim(p.shape().row), cols = dim(p.shape().col);
  MatC out = MatC::Zero(rows, cols);
  std::map<Symbol, MatC> cache;
  auto get = [&](const Symbol& s) -> const MatC& {
    auto it = cache.find(s);
    if (it == cache.end()) {
      MatC v = value(s);
      if (v.rows() != dim(s.row()) || v.cols() != dim(s.col())) {
        throw ShapeMismatch("value of " + to_string(s) + " has wrong dimensions");
      }
      it = cache.emplace(s, std::move(v)).first;
    }
    return it->second;
  };
  for (const auto& [w, c] : p.terms()) {
    const cplx k(c.to_double(), 0.0);
    if (w.empty()) {
      out.diagonal().array() += k;
      continue;
    }
    MatC prod = get(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) prod = prod * get(w[i]);
    out += k * prod;
  }
  return out;
}

MatC nc_eval(const NcPoly& p, const FieldJet& jet, int i) {
  const GridField& f = jet.field();
  return nc_eval(
      p,
      [&](const Symbol& s) -> MatC {
        if (s.is_aux()) throw ResidualAuxiliarySymbols("cannot evaluate " + to_string(s) + " from field samples");
        return jet.derivative(s.base == Base::UHat, s.order, i);
      },
      f.N, f.M);
}

MatC nc_eval(const NcPoly& p, const GridField& field, int i, const FdScheme& fd) {
  FieldJet jet(field, fd);
  return nc_eval(p, jet, i);
}

}  // namespace akns
