#pragma once

// Forward propagation of lexicographic directional derivatives (LD-derivatives)
// through compositions of smooth and nonsmooth elemental functions.
//
// An LdScalar carries a value together with a row of k directional derivatives
// taken along the columns of a fixed directions matrix M in lexicographic
// order. Smooth elementals propagate the row by the classical chain rule;
// min/max/abs use the first-sign (fsign) and shifted-lexicographic-minimum
// (slmin) selection rules, which make the propagated rows valid generalized
// derivative information even at kinks.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nsoc/errors.hpp"

namespace nsoc {

// Records which branch each nonsmooth selection took during one evaluation.
// Sites are identified by call order, which is fixed for a given model.
class BranchRecorder {
 public:
  void record(std::int8_t code) { codes_.push_back(code); }
  void clear() { codes_.clear(); }
  const std::vector<std::int8_t>& codes() const { return codes_; }

 private:
  std::vector<std::int8_t> codes_;
};

struct LdScalar {
  double val = 0.0;
  Eigen::RowVectorXd der;  // k directional derivatives, lexicographic order

  LdScalar() = default;
  LdScalar(double v, Eigen::RowVectorXd d) : val(v), der(std::move(d)) {}

  // Quantity that does not depend on the probing directions.
  static LdScalar constant(double v, Eigen::Index k) {
    return LdScalar(v, Eigen::RowVectorXd::Zero(k));
  }

  // Quantity seeded with the j-th unit direction.
  static LdScalar seeded(double v, Eigen::Index k, Eigen::Index j) {
    Eigen::RowVectorXd d = Eigen::RowVectorXd::Zero(k);
    d(j) = 1.0;
    return LdScalar(v, std::move(d));
  }

  Eigen::Index width() const { return der.size(); }
};

// Value + directions row consumed by fsign and slmin.
struct AugmentedRow {
  double head = 0.0;
  Eigen::RowVectorXd tail;
};

namespace detail {

inline bool row_finite(const Eigen::RowVectorXd& r) {
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r(i))) return false;
  }
  return true;
}

inline const LdScalar& checked(const char* op, const LdScalar& x) {
  if (!std::isfinite(x.val) || !row_finite(x.der)) {
    throw ModelError(std::string("ld ") + op + ": non-finite result");
  }
  return x;
}

inline LdScalar checked(const char* op, LdScalar&& x) {
  checked(op, static_cast<const LdScalar&>(x));
  return std::move(x);
}

inline void require_same_width(const char* op, const LdScalar& a,
                               const LdScalar& b) {
  if (a.width() != b.width()) {
    throw DimensionError(std::string("ld ") + op + ": direction widths " +
                         std::to_string(a.width()) + " and " +
                         std::to_string(b.width()) + " differ");
  }
}

}  // namespace detail

// Sign of the first nonzero entry of [head, tail]; 0 if all entries are zero.
inline int fsign(double head, const Eigen::RowVectorXd& tail) {
  if (!std::isfinite(head) || !detail::row_finite(tail)) {
    throw ModelError("fsign: non-finite entry");
  }
  if (head != 0.0) return head > 0.0 ? 1 : -1;
  for (Eigen::Index i = 0; i < tail.size(); ++i) {
    if (tail(i) != 0.0) return tail(i) > 0.0 ? 1 : -1;
  }
  return 0;
}

inline int fsign(const AugmentedRow& row) { return fsign(row.head, row.tail); }

// Shifted lexicographic minimum: the directions tail of the lexicographically
// smaller augmented row. Exact ties through all entries yield the first
// argument's tail.
inline Eigen::RowVectorXd slmin(const AugmentedRow& a, const AugmentedRow& b) {
  if (a.tail.size() != b.tail.size()) {
    throw DimensionError("slmin: direction widths " +
                         std::to_string(a.tail.size()) + " and " +
                         std::to_string(b.tail.size()) + " differ");
  }
  const int s = fsign(a.head - b.head, a.tail - b.tail);
  return s <= 0 ? a.tail : b.tail;
}

// ---- arithmetic -----------------------------------------------------------

inline LdScalar operator-(const LdScalar& x) {
  return detail::checked("negate", LdScalar(-x.val, -x.der));
}

inline LdScalar operator+(const LdScalar& a, const LdScalar& b) {
  detail::require_same_width("add", a, b);
  return detail::checked("add", LdScalar(a.val + b.val, a.der + b.der));
}

inline LdScalar operator-(const LdScalar& a, const LdScalar& b) {
  detail::require_same_width("subtract", a, b);
  return detail::checked("subtract", LdScalar(a.val - b.val, a.der - b.der));
}

inline LdScalar operator*(const LdScalar& a, const LdScalar& b) {
  detail::require_same_width("multiply", a, b);
  return detail::checked(
      "multiply", LdScalar(a.val * b.val, a.der * b.val + b.der * a.val));
}

inline LdScalar operator/(const LdScalar& a, const LdScalar& b) {
  detail::require_same_width("divide", a, b);
  if (b.val == 0.0) throw ModelError("ld divide: zero denominator");
  return detail::checked(
      "divide", LdScalar(a.val / b.val,
                         (a.der * b.val - b.der * a.val) / (b.val * b.val)));
}

inline LdScalar operator+(const LdScalar& a, double c) {
  return detail::checked("add", LdScalar(a.val + c, a.der));
}
inline LdScalar operator+(double c, const LdScalar& a) { return a + c; }

inline LdScalar operator-(const LdScalar& a, double c) {
  return detail::checked("subtract", LdScalar(a.val - c, a.der));
}
inline LdScalar operator-(double c, const LdScalar& a) {
  return detail::checked("subtract", LdScalar(c - a.val, -a.der));
}

inline LdScalar operator*(const LdScalar& a, double c) {
  return detail::checked("multiply", LdScalar(a.val * c, a.der * c));
}
inline LdScalar operator*(double c, const LdScalar& a) { return a * c; }

inline LdScalar operator/(const LdScalar& a, double c) {
  if (c == 0.0) throw ModelError("ld divide: zero denominator");
  return detail::checked("divide", LdScalar(a.val / c, a.der / c));
}
inline LdScalar operator/(double c, const LdScalar& a) {
  if (a.val == 0.0) throw ModelError("ld divide: zero denominator");
  return detail::checked(
      "divide", LdScalar(c / a.val, a.der * (-c / (a.val * a.val))));
}

// ---- smooth elementals (chain rule: f'(val) * der) ------------------------

inline LdScalar sin(const LdScalar& x) {
  return detail::checked("sin",
                         LdScalar(std::sin(x.val), x.der * std::cos(x.val)));
}

inline LdScalar cos(const LdScalar& x) {
  return detail::checked("cos",
                         LdScalar(std::cos(x.val), x.der * -std::sin(x.val)));
}

inline LdScalar tan(const LdScalar& x) {
  const double c = std::cos(x.val);
  if (c == 0.0) throw ModelError("ld tan: cos(x) = 0");
  return detail::checked("tan",
                         LdScalar(std::tan(x.val), x.der / (c * c)));
}

inline LdScalar exp(const LdScalar& x) {
  const double e = std::exp(x.val);
  return detail::checked("exp", LdScalar(e, x.der * e));
}

inline LdScalar log(const LdScalar& x) {
  if (!(x.val > 0.0)) throw ModelError("ld log: argument must be positive");
  return detail::checked("log", LdScalar(std::log(x.val), x.der / x.val));
}

inline LdScalar sqrt(const LdScalar& x) {
  if (!(x.val > 0.0)) throw ModelError("ld sqrt: argument must be positive");
  const double r = std::sqrt(x.val);
  return detail::checked("sqrt", LdScalar(r, x.der / (2.0 * r)));
}

inline LdScalar tanh(const LdScalar& x) {
  const double th = std::tanh(x.val);
  return detail::checked("tanh", LdScalar(th, x.der * (1.0 - th * th)));
}

inline LdScalar pow(const LdScalar& x, double p) {
  if (!(x.val > 0.0)) {
    throw ModelError("ld pow: base must be positive for real exponent");
  }
  const double v = std::pow(x.val, p);
  return detail::checked("pow",
                         LdScalar(v, x.der * (p * std::pow(x.val, p - 1.0))));
}

// ---- nonsmooth elementals --------------------------------------------------

// abs rule: der = fsign([val, der]) * der.
inline LdScalar ld_abs(const LdScalar& x, BranchRecorder* rec = nullptr) {
  const int s = fsign(x.val, x.der);
  if (rec) rec->record(static_cast<std::int8_t>(s));
  return detail::checked(
      "abs", LdScalar(x.val < 0.0 ? -x.val : x.val, x.der * double(s)));
}

// min rule: value minimum with the tail of the lexicographically smaller row.
inline LdScalar ld_min(const LdScalar& a, const LdScalar& b,
                       BranchRecorder* rec = nullptr) {
  detail::require_same_width("min", a, b);
  const int s = fsign(a.val - b.val, a.der - b.der);
  if (rec) rec->record(static_cast<std::int8_t>(s <= 0 ? 1 : -1));
  const double v = b.val < a.val ? b.val : a.val;
  return detail::checked("min", LdScalar(v, s <= 0 ? a.der : b.der));
}

inline LdScalar ld_max(const LdScalar& a, const LdScalar& b,
                       BranchRecorder* rec = nullptr) {
  return -ld_min(-a, -b, rec);
}

inline LdScalar ld_min(double c, const LdScalar& b,
                       BranchRecorder* rec = nullptr) {
  return ld_min(LdScalar::constant(c, b.width()), b, rec);
}
inline LdScalar ld_min(const LdScalar& a, double c,
                       BranchRecorder* rec = nullptr) {
  return ld_min(a, LdScalar::constant(c, a.width()), rec);
}
inline LdScalar ld_max(double c, const LdScalar& b,
                       BranchRecorder* rec = nullptr) {
  return ld_max(LdScalar::constant(c, b.width()), b, rec);
}
inline LdScalar ld_max(const LdScalar& a, double c,
                       BranchRecorder* rec = nullptr) {
  return ld_max(a, LdScalar::constant(c, a.width()), rec);
}

// ---- selection context for code templated over double / LdScalar ----------
//
// Model right-hand sides are written once, generically in the scalar type.
// Select funnels the nonsmooth elementals so the LdScalar instantiation can
// log branch choices while the plain double instantiation computes values
// with the identical operation order (values of the two paths agree bitwise).

template <class T>
struct Select;

template <>
struct Select<double> {
  BranchRecorder* rec = nullptr;
  static double min(double a, double b) { return b < a ? b : a; }
  static double max(double a, double b) { return b > a ? b : a; }
  static double abs(double a) { return a < 0.0 ? -a : a; }
};

template <>
struct Select<LdScalar> {
  BranchRecorder* rec = nullptr;
  LdScalar min(const LdScalar& a, const LdScalar& b) const {
    return ld_min(a, b, rec);
  }
  LdScalar min(const LdScalar& a, double b) const { return ld_min(a, b, rec); }
  LdScalar min(double a, const LdScalar& b) const { return ld_min(a, b, rec); }
  LdScalar max(const LdScalar& a, const LdScalar& b) const {
    return ld_max(a, b, rec);
  }
  LdScalar max(const LdScalar& a, double b) const { return ld_max(a, b, rec); }
  LdScalar max(double a, const LdScalar& b) const { return ld_max(a, b, rec); }
  LdScalar abs(const LdScalar& a) const { return ld_abs(a, rec); }
};

// Value extraction for generic code.
inline double value_of(double x) { return x; }
inline double value_of(const LdScalar& x) { return x.val; }

using LdVector = std::vector<LdScalar>;

}  // namespace nsoc
