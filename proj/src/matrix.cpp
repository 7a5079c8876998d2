#include "qbdd/matrix.hpp"

#include <sstream>

#include "qbdd/error.hpp"

namespace qbdd {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, BigInt(0)) {}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
  if (rows.empty()) return {};
  IntMatrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw PreconditionError("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::from_columns(const std::vector<std::vector<long>>& cols) {
  return from_rows(cols).transpose();
}

IntMatrix IntMatrix::from_columns(const std::vector<ZVec>& cols) {
  if (cols.empty()) return {};
  IntMatrix m(cols[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) m.set_col(j, cols[j]);
  return m;
}

BigInt& IntMatrix::operator()(std::size_t i, std::size_t j) {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index");
  return data_[i * cols_ + j];
}

const BigInt& IntMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw std::out_of_range("matrix index");
  return data_[i * cols_ + j];
}

ZVec IntMatrix::col(std::size_t j) const {
  ZVec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

ZVec IntMatrix::row(std::size_t i) const {
  ZVec v(cols_);
  for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
  return v;
}

void IntMatrix::set_col(std::size_t j, const ZVec& v) {
  if (v.size() != rows_) throw PreconditionError("column length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
  if (cols_ != o.rows_) throw PreconditionError("dimension mismatch in product");
  IntMatrix p(rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const BigInt& a = (*this)(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < o.cols_; ++j) p(i, j) += a * o(k, j);
    }
  return p;
}

ZVec IntMatrix::operator*(const ZVec& v) const {
  if (cols_ != v.size()) throw PreconditionError("dimension mismatch in product");
  ZVec r(rows_, BigInt(0));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
  return r;
}

bool IntMatrix::operator==(const IntMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

IntMatrix IntMatrix::hcat(const IntMatrix& o) const {
  if (rows_ != o.rows_) throw PreconditionError("row mismatch in concatenation");
  IntMatrix m(rows_, cols_ + o.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j);
    for (std::size_t j = 0; j < o.cols_; ++j) m(i, cols_ + j) = o(i, j);
  }
  return m;
}

namespace {

RatMatrix to_rat(const IntMatrix& m) {
  RatMatrix r{m.rows(), m.cols(), std::vector<Rational>(m.rows() * m.cols())};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
  return r;
}

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& a, std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < ncols && row < a.rows; ++c) {
    std::size_t p = row;
    while (p < a.rows && a(p, c) == 0) ++p;
    if (p == a.rows) continue;
    if (p != row)
      for (std::size_t j = 0; j < a.cols; ++j) std::swap(a(p, j), a(row, j));
    Rational inv = 1 / a(row, c);
    for (std::size_t j = 0; j < a.cols; ++j) a(row, j) *= inv;
    for (std::size_t i = 0; i < a.rows; ++i) {
      if (i == row || a(i, c) == 0) continue;
      Rational f = a(i, c);
      for (std::size_t j = 0; j < a.cols; ++j) a(i, j) -= f * a(row, j);
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

}  // namespace

BigInt determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw PreconditionError("determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  // Bareiss fraction-free elimination.
  IntMatrix a = m;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        BigInt v = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        a(i, j) = v;
      }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

std::size_t rank(const IntMatrix& m) {
  RatMatrix a = to_rat(m);
  return rref(a, a.cols).size();
}

RatMatrix inverse(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw PreconditionError("inverse of non-square matrix");
  const std::size_t n = m.rows();
  RatMatrix a{n, 2 * n, std::vector<Rational>(2 * n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = m(i, j);
    a(i, n + i) = 1;
  }
  auto piv = rref(a, n);
  if (piv.size() != n) throw PreconditionError("rank deficient");
  RatMatrix inv{n, n, std::vector<Rational>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = a(i, n + j);
  return inv;
}

bool solve_rational(const IntMatrix& b, const QVec& v, QVec& x) {
  const std::size_t n = b.rows(), k = b.cols();
  if (v.size() != n) throw PreconditionError("dimension mismatch in solve");
  RatMatrix a{n, k + 1, std::vector<Rational>(n * (k + 1))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) a(i, j) = b(i, j);
    a(i, k) = v[i];
  }
  auto piv = rref(a, k);
  if (piv.size() != k) throw PreconditionError("rank deficient");
  for (std::size_t i = k; i < n; ++i)
    if (a(i, k) != 0) return false;
  x.assign(k, Rational(0));
  for (std::size_t i = 0; i < k; ++i) x[piv[i]] = a(i, k);
  return true;
}

Rational dot(const QVec& a, const QVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

BigInt dot(const ZVec& a, const ZVec& b) {
  BigInt s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

BigInt norm_sq(const ZVec& v) { return dot(v, v); }
Rational norm_sq(const QVec& v) { return dot(v, v); }

QVec to_rational(const ZVec& v) { return QVec(v.begin(), v.end()); }

ZVec zvec(const std::vector<long>& v) {
  ZVec r;
  r.reserve(v.size());
  for (long x : v) r.emplace_back(x);
  return r;
}

BigInt floor_q(const Rational& x) {
  BigInt r;
  mpz_fdiv_q(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return r;
}

BigInt round_half_up(const Rational& x) { return floor_q(x + Rational(1, 2)); }

BigInt lcm(const BigInt& a, const BigInt& b) {
  BigInt r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

BigInt mod_floor(const BigInt& a, const BigInt& q) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), q.get_mpz_t());
  return r;
}

std::string to_text(const IntMatrix& m) {
  std::ostringstream os;
  os << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
  return os.str();
}

IntMatrix matrix_from_text(const std::string& text) {
  std::istringstream is(text);
  std::size_t r = 0, c = 0;
  if (!(is >> r >> c) || r == 0 || c == 0) throw PreconditionError("bad matrix header");
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      std::string tok;
      if (!(is >> tok)) throw PreconditionError("truncated matrix body");
      if (m(i, j).set_str(tok, 10) != 0) throw PreconditionError("bad integer: " + tok);
    }
  std::string extra;
  if (is >> extra) throw PreconditionError("trailing data after matrix");
  return m;
}

std::string to_text(const Rational& x) {
  Rational y = x;
  y.canonicalize();
  return y.get_num().get_str() + "/" + y.get_den().get_str();
}

Rational rational_from_text(const std::string& text) {
  Rational x;
  if (x.set_str(text, 10) != 0) throw PreconditionError("bad rational: " + text);
  if (x.get_den() == 0) throw PreconditionError("zero denominator");
  x.canonicalize();
  return x;
}

}  // namespace qbdd
