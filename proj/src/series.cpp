#include "forelli/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "forelli/errors.hpp"

namespace forelli {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_)
    if (e < 0) throw PreconditionError("multi-index entries must be nonnegative");
}

MultiIndex::MultiIndex(std::initializer_list<int> entries)
    : MultiIndex(std::vector<int>(entries)) {}

std::vector<MultiIndex> indices_of_order(int n, int k) {
  if (n < 1 || k < 0) throw PreconditionError("indices_of_order needs n >= 1 and k >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == n - 1) {
      cur[pos] = left;
      out.emplace_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, k);
  return out;
}

MultiIndex MultiIndex::unit(std::size_t dimension, std::size_t k) {
  MultiIndex m(dimension);
  m.entries_.at(k) = 1;
  return m;
}

int MultiIndex::order() const noexcept {
  return std::accumulate(entries_.begin(), entries_.end(), 0);
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dimension() != other.dimension()) throw DimensionMismatch("multi-index dimensions differ");
  MultiIndex r(*this);
  for (std::size_t k = 0; k < entries_.size(); ++k) r.entries_[k] += other.entries_[k];
  return r;
}

bool GradedLex::operator()(const TermKey& a, const TermKey& b) const {
  const int oa = a.order(), ob = b.order();
  if (oa != ob) return oa < ob;
  if (a.holo != b.holo) return a.holo > b.holo;
  return a.anti > b.anti;
}

FormalSeries::FormalSeries(int dimension, int max_order)
    : dimension_(dimension), max_order_(max_order) {
  if (dimension < 1) throw PreconditionError("series dimension must be >= 1");
  if (max_order < 0) throw PreconditionError("truncation order must be >= 0");
}

FormalSeries FormalSeries::from_terms(int dimension, int max_order, const TermMap& terms) {
  FormalSeries s(dimension, max_order);
  for (const auto& [key, c] : terms) {
    if (key.holo.dimension() != static_cast<std::size_t>(dimension) ||
        key.anti.dimension() != static_cast<std::size_t>(dimension))
      throw DimensionMismatch("term multi-index does not match series dimension");
    if (key.order() > max_order || c == Complex(0.0, 0.0)) continue;
    s.terms_.emplace(key, c);
  }
  return s;
}

FormalSeries FormalSeries::constant(int dimension, int max_order, Complex value) {
  return monomial(dimension, max_order, MultiIndex(dimension), MultiIndex(dimension), value);
}

FormalSeries FormalSeries::monomial(int dimension, int max_order, const MultiIndex& holo,
                                    const MultiIndex& anti, Complex value) {
  TermMap t;
  t.emplace(TermKey{holo, anti}, value);
  return from_terms(dimension, max_order, t);
}

FormalSeries FormalSeries::variable(int dimension, int max_order, int k) {
  return monomial(dimension, max_order, MultiIndex::unit(dimension, k), MultiIndex(dimension));
}

FormalSeries FormalSeries::conj_variable(int dimension, int max_order, int k) {
  return monomial(dimension, max_order, MultiIndex(dimension), MultiIndex::unit(dimension, k));
}

Complex FormalSeries::coefficient(const MultiIndex& holo, const MultiIndex& anti) const {
  auto it = terms_.find(TermKey{holo, anti});
  return it == terms_.end() ? Complex(0.0) : it->second;
}

namespace {

void require_same_dimension(const FormalSeries& s, const FormalSeries& t) {
  if (s.dimension() != t.dimension())
    throw DimensionMismatch("series dimensions differ: " + std::to_string(s.dimension()) +
                            " vs " + std::to_string(t.dimension()));
}

template <class Weight>
FormalSeries graded_map(const FormalSeries& s, Weight weight) {
  FormalSeries::TermMap out;
  for (const auto& [key, c] : s.terms()) out.emplace(key, weight(key) * c);
  return FormalSeries::from_terms(s.dimension(), s.max_order(), out);
}

}  // namespace

FormalSeries add(const FormalSeries& s, const FormalSeries& t) {
  require_same_dimension(s, t);
  const int order = std::min(s.max_order(), t.max_order());
  FormalSeries::TermMap out;
  for (const auto& [key, c] : s.terms())
    if (key.order() <= order) out[key] += c;
  for (const auto& [key, c] : t.terms())
    if (key.order() <= order) out[key] += c;
  return FormalSeries::from_terms(s.dimension(), order, out);
}

FormalSeries subtract(const FormalSeries& s, const FormalSeries& t) { return add(s, scale(t, -1.0)); }

FormalSeries scale(const FormalSeries& s, Complex c) {
  return graded_map(s, [c](const TermKey&) { return c; });
}

FormalSeries mul(const FormalSeries& s, const FormalSeries& t) {
  require_same_dimension(s, t);
  const int order = std::min(s.max_order(), t.max_order());
  FormalSeries::TermMap out;
  for (const auto& [ka, ca] : s.terms()) {
    if (ka.order() > order) break;
    for (const auto& [kb, cb] : t.terms()) {
      if (ka.order() + kb.order() > order) break;
      out[TermKey{ka.holo + kb.holo, ka.anti + kb.anti}] += ca * cb;
    }
  }
  return FormalSeries::from_terms(s.dimension(), order, out);
}

FormalSeries truncate(const FormalSeries& s, int m) {
  if (m < 0 || m > s.max_order())
    throw PreconditionError("truncation order " + std::to_string(m) + " outside [0, " +
                            std::to_string(s.max_order()) + "]");
  return FormalSeries::from_terms(s.dimension(), m, s.terms());
}

FormalSeries euler_e(const FormalSeries& s) {
  return graded_map(s, [](const TermKey& k) { return static_cast<double>(k.holo.order()); });
}

FormalSeries euler_ebar(const FormalSeries& s) {
  return graded_map(s, [](const TermKey& k) { return static_cast<double>(k.anti.order()); });
}

HolomorphicTypeVerdict is_holomorphic_type(const FormalSeries& s) {
  for (const auto& [key, c] : s.terms())
    if (!key.anti.is_zero()) return {false, std::make_pair(key, c)};
  return {};
}

Complex evaluate(const FormalSeries& s, const Point& z) {
  if (z.size() != s.dimension()) throw DimensionMismatch("point dimension differs from series");
  const int n = s.dimension();
  const int N = s.max_order();
  // powers(k, e) = z_k^e, cpowers(k, e) = conj(z_k)^e
  Eigen::MatrixXcd powers(n, N + 1), cpowers(n, N + 1);
  for (int k = 0; k < n; ++k) {
    powers(k, 0) = cpowers(k, 0) = 1.0;
    for (int e = 1; e <= N; ++e) {
      powers(k, e) = powers(k, e - 1) * z[k];
      cpowers(k, e) = cpowers(k, e - 1) * std::conj(z[k]);
    }
  }
  Complex sum = 0.0;
  for (const auto& [key, c] : s.terms()) {
    Complex m = c;
    for (int k = 0; k < n; ++k) m *= powers(k, key.holo[k]) * cpowers(k, key.anti[k]);
    sum += m;
  }
  return sum;
}

FormalSeries chop(const FormalSeries& s, double threshold) {
  FormalSeries::TermMap out;
  for (const auto& [key, c] : s.terms())
    if (std::abs(c) > threshold) out.emplace(key, c);
  return FormalSeries::from_terms(s.dimension(), s.max_order(), out);
}

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("failed to format floating-point value");
  return std::string(buf, end);
}

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

std::vector<int> read_indices(const std::string& field, int n, int line) {
  std::istringstream is(field);
  std::vector<int> out;
  long long v;
  while (is >> v) {
    if (v < 0) throw ParseError("negative exponent", line, 1);
    out.push_back(static_cast<int>(v));
  }
  if (!is.eof()) throw ParseError("malformed exponent list", line, 1);
  if (static_cast<int>(out.size()) != n)
    throw ParseError("expected " + std::to_string(n) + " exponents", line, 1);
  return out;
}

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("malformed coefficient '" + tok + "'", line, 1);
  return v;
}

}  // namespace

FormalSeries read_series(std::istream& in) {
  std::string raw;
  int line_no = 0;
  int n = -1, N = -1;
  FormalSeries::TermMap terms;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (blank(line)) continue;
    if (n < 0) {
      std::istringstream is(line);
      std::string a, b;
      is >> a >> b;
      if (a.rfind("n=", 0) != 0 || b.rfind("N=", 0) != 0)
        throw ParseError("expected header 'n=<int> N=<int>'", line_no, 1);
      try {
        n = std::stoi(a.substr(2));
        N = std::stoi(b.substr(2));
      } catch (const std::exception&) {
        throw ParseError("malformed header", line_no, 1);
      }
      if (n < 1 || N < 0) throw ParseError("header values out of range", line_no, 1);
      continue;
    }
    auto bar1 = line.find('|');
    auto bar2 = bar1 == std::string::npos ? bar1 : line.find('|', bar1 + 1);
    if (bar2 == std::string::npos) throw ParseError("expected 'I | J | re im'", line_no, 1);
    MultiIndex I(read_indices(line.substr(0, bar1), n, line_no));
    MultiIndex J(read_indices(line.substr(bar1 + 1, bar2 - bar1 - 1), n, line_no));
    std::istringstream cs(line.substr(bar2 + 1));
    std::string re, im, extra;
    if (!(cs >> re >> im) || (cs >> extra)) throw ParseError("expected 're im'", line_no, 1);
    TermKey key{I, J};
    if (key.order() > N) throw ParseError("term exceeds truncation order", line_no, 1);
    terms[key] += Complex(parse_double(re, line_no), parse_double(im, line_no));
  }
  if (n < 0) throw ParseError("missing header", line_no + 1, 1);
  return FormalSeries::from_terms(n, N, terms);
}

FormalSeries read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open series file '" + path + "'");
  return read_series(in);
}

void write_series(std::ostream& out, const FormalSeries& s) {
  out << "n=" << s.dimension() << " N=" << s.max_order() << '\n';
  for (const auto& [key, c] : s.terms()) {
    for (int e : key.holo.entries()) out << e << ' ';
    out << '|';
    for (int e : key.anti.entries()) out << ' ' << e;
    out << " | " << format_double(c.real()) << ' ' << format_double(c.imag()) << '\n';
  }
}

std::string to_text(const FormalSeries& s) {
  std::ostringstream os;
  write_series(os, s);
  return os.str();
}

}  // namespace forelli
