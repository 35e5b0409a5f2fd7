#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace forelli {

using Complex = std::complex<double>;
using Point = Eigen::VectorXcd;
using Polyradius = Eigen::VectorXd;

/// Exponent vector alpha = (alpha_1, ..., alpha_n) with nonnegative entries.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dimension) : entries_(dimension, 0) {}
  explicit MultiIndex(std::vector<int> entries);
  MultiIndex(std::initializer_list<int> entries);

  static MultiIndex unit(std::size_t dimension, std::size_t k);

  std::size_t dimension() const noexcept { return entries_.size(); }
  int order() const noexcept;
  bool is_zero() const noexcept { return order() == 0; }

  int operator[](std::size_t k) const { return entries_[k]; }
  const std::vector<int>& entries() const noexcept { return entries_; }

  MultiIndex operator+(const MultiIndex& other) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
  std::vector<int> entries_;
};

/// Multi-index pair (I, J) labelling the monomial z^I zbar^J.
struct TermKey {
  MultiIndex holo;
  MultiIndex anti;

  int order() const noexcept { return holo.order() + anti.order(); }
  friend bool operator==(const TermKey&, const TermKey&) = default;
};

/// Graded order: total degree first, then (I, J) lexicographically
/// descending so that z1 precedes z2 within a degree.
/// All multi-indices of dimension n and order k, in lexicographic order.
std::vector<MultiIndex> indices_of_order(int n, int k);

struct GradedLex {
  bool operator()(const TermKey& a, const TermKey& b) const;
};

/// Sparse truncated power series sum C_I^J z^I zbar^J with |I|+|J| <= N.
///
/// Instances are canonical: no stored coefficient is exactly zero and no
/// stored term exceeds the truncation order. Equality is structural.
class FormalSeries {
public:
  using TermMap = std::map<TermKey, Complex, GradedLex>;

  FormalSeries(int dimension, int max_order);

  /// Builds a canonical series, dropping zeros and terms of order > N.
  static FormalSeries from_terms(int dimension, int max_order, const TermMap& terms);

  static FormalSeries constant(int dimension, int max_order, Complex value);
  static FormalSeries monomial(int dimension, int max_order, const MultiIndex& holo,
                               const MultiIndex& anti, Complex value = 1.0);
  /// z_k, with k counted from zero.
  static FormalSeries variable(int dimension, int max_order, int k);
  /// zbar_k, with k counted from zero.
  static FormalSeries conj_variable(int dimension, int max_order, int k);

  int dimension() const noexcept { return dimension_; }
  int max_order() const noexcept { return max_order_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  Complex coefficient(const MultiIndex& holo, const MultiIndex& anti) const;

  friend bool operator==(const FormalSeries&, const FormalSeries&) = default;

private:
  int dimension_;
  int max_order_;
  TermMap terms_;
};

struct HolomorphicTypeVerdict {
  bool is_holomorphic_type = true;
  /// A term with J != 0 and nonzero coefficient; present iff the verdict is false.
  std::optional<std::pair<TermKey, Complex>> witness;
};

FormalSeries add(const FormalSeries& s, const FormalSeries& t);
FormalSeries subtract(const FormalSeries& s, const FormalSeries& t);
FormalSeries scale(const FormalSeries& s, Complex c);
FormalSeries mul(const FormalSeries& s, const FormalSeries& t);

inline FormalSeries operator+(const FormalSeries& s, const FormalSeries& t) { return add(s, t); }
inline FormalSeries operator-(const FormalSeries& s, const FormalSeries& t) { return subtract(s, t); }
inline FormalSeries operator*(const FormalSeries& s, const FormalSeries& t) { return mul(s, t); }
inline FormalSeries operator*(Complex c, const FormalSeries& s) { return scale(s, c); }
inline FormalSeries operator-(const FormalSeries& s) { return scale(s, -1.0); }

/// S_m: the terms of total order at most m.
FormalSeries truncate(const FormalSeries& s, int m);

/// E = sum z_k d/dz_k, acting by |I| on z^I zbar^J.
FormalSeries euler_e(const FormalSeries& s);
/// Ebar = sum zbar_k d/dzbar_k, acting by |J| on z^I zbar^J.
FormalSeries euler_ebar(const FormalSeries& s);

HolomorphicTypeVerdict is_holomorphic_type(const FormalSeries& s);

Complex evaluate(const FormalSeries& s, const Point& z);

/// Drops every term whose coefficient modulus is <= threshold.
FormalSeries chop(const FormalSeries& s, double threshold);

/// Text format: header "n=<int> N=<int>", then "i1 .. in | j1 .. jn | re im".
FormalSeries read_series(std::istream& in);
FormalSeries read_series_file(const std::string& path);
void write_series(std::ostream& out, const FormalSeries& s);
std::string to_text(const FormalSeries& s);

/// Shortest decimal representation that round-trips the double.
std::string format_double(double x);

}  // namespace forelli
