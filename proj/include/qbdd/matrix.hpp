#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qbdd {

using BigInt = mpz_class;
using Rational = mpq_class;
using ZVec = std::vector<BigInt>;
using QVec = std::vector<Rational>;

// Dense row-major integer matrix. Lattice bases store basis vectors as
// columns, so an n x k matrix holds k vectors of Z^n.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols);

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(const std::vector<std::vector<long>>& rows);
  static IntMatrix from_columns(const std::vector<std::vector<long>>& cols);
  static IntMatrix from_columns(const std::vector<ZVec>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  BigInt& operator()(std::size_t i, std::size_t j);
  const BigInt& operator()(std::size_t i, std::size_t j) const;

  ZVec col(std::size_t j) const;
  ZVec row(std::size_t i) const;
  void set_col(std::size_t j, const ZVec& v);
  void swap_cols(std::size_t a, std::size_t b);
  void swap_rows(std::size_t a, std::size_t b);

  IntMatrix transpose() const;
  IntMatrix operator*(const IntMatrix& o) const;
  ZVec operator*(const ZVec& v) const;
  bool operator==(const IntMatrix& o) const;
  bool operator!=(const IntMatrix& o) const { return !(*this == o); }

  // Horizontal concatenation [A | B].
  IntMatrix hcat(const IntMatrix& o) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BigInt> data_;
};

struct RatMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Rational> data;
  Rational& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

BigInt determinant(const IntMatrix& m);
std::size_t rank(const IntMatrix& m);
// Exact inverse of a nonsingular square matrix; throws PreconditionError otherwise.
RatMatrix inverse(const IntMatrix& m);
// Solve B x = v for rational x when B has full column rank and v lies in its span.
bool solve_rational(const IntMatrix& b, const QVec& v, QVec& x);

Rational dot(const QVec& a, const QVec& b);
BigInt dot(const ZVec& a, const ZVec& b);
BigInt norm_sq(const ZVec& v);
Rational norm_sq(const QVec& v);
QVec to_rational(const ZVec& v);
ZVec zvec(const std::vector<long>& v);

// floor(x + 1/2), the rounding used throughout nearest-plane steps.
BigInt round_half_up(const Rational& x);
BigInt floor_q(const Rational& x);
BigInt lcm(const BigInt& a, const BigInt& b);
// Representative of a mod q in [0, q).
BigInt mod_floor(const BigInt& a, const BigInt& q);

// Text format: "rows cols" then row-major integers.
std::string to_text(const IntMatrix& m);
IntMatrix matrix_from_text(const std::string& text);
std::string to_text(const Rational& x);
Rational rational_from_text(const std::string& text);

}  // namespace qbdd
