#include "forelli/directions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "forelli/errors.hpp"
#include "forelli/expr.hpp"

namespace forelli {

namespace {

Point gaussian_point(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Point v(n);
  for (int k = 0; k < n; ++k) v[k] = Complex(g(rng), g(rng));
  return v;
}

}  // namespace

std::vector<Point> sphere_directions(int n, int count, std::uint64_t seed) {
  if (n < 1 || count < 1) throw PreconditionError("sphere sample needs n >= 1 and count >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Point v = gaussian_point(n, rng);
    const double r = v.norm();
    if (r > 1e-12) out.push_back(v / r);
  }
  return out;
}

std::vector<Point> cap_directions(const Point& center, double theta, int count, std::uint64_t seed) {
  const int n = static_cast<int>(center.size());
  if (n < 1 || count < 1) throw PreconditionError("cap sample needs n >= 1 and count >= 1");
  if (!(theta > 0.0) || theta > M_PI) throw PreconditionError("cap angle must lie in (0, pi]");
  const double cn = center.norm();
  if (!(cn > 0.0)) throw PreconditionError("cap center must be nonzero");
  const Point c = center / cn;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Angle density on S^{d-1}, d = 2n, is proportional to sin^{d-2}(alpha).
  const int power = 2 * n - 2;
  const double peak = theta >= M_PI / 2 ? 1.0 : std::pow(std::sin(theta), power);
  std::vector<Point> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    const double alpha = theta * u(rng);
    if (power > 0 && u(rng) * peak > std::pow(std::sin(alpha), power)) continue;
    // random unit vector real-orthogonal to c
    Point w = gaussian_point(n, rng);
    w -= c * c.dot(w).real();  // Eigen's dot conjugates the first argument
    const double wn = w.norm();
    if (n == 1) {
      // S^1: the orthogonal complement of c is i c
      w = Complex(0.0, u(rng) < 0.5 ? 1.0 : -1.0) * c;
    } else if (wn < 1e-12) {
      continue;
    } else {
      w /= wn;
    }
    Point v = std::cos(alpha) * c + std::sin(alpha) * w;
    out.push_back(v / v.norm());
  }
  return out;
}

Complex parse_complex(const std::string& token) {
  try {
    const Expr e = Expr::parse(token, VariableTable{});
    return e(Point(0));
  } catch (const Error& err) {
    throw ParseError("malformed complex number '" + token + "'", 1, 1);
  }
}

std::vector<Point> parse_directions(const std::string& text, int n, int default_count, std::uint64_t seed) {
  std::istringstream is(text);
  std::string head;
  is >> head;
  std::vector<std::string> rest;
  for (std::string t; is >> t;) rest.push_back(t);
  int count = default_count;
  auto take_count = [&](std::vector<std::string>& toks) {
    for (auto it = toks.begin(); it != toks.end(); ++it)
      if (it->rfind("count=", 0) == 0) {
        count = std::stoi(it->substr(6));
        toks.erase(it);
        return;
      }
  };
  if (head == "sphere") {
    take_count(rest);
    if (rest.size() == 1) count = std::stoi(rest[0]);
    else if (!rest.empty()) throw ParseError("expected 'sphere [count]'", 1, 1);
    return sphere_directions(n, count, seed);
  }
  if (head == "cap") {
    take_count(rest);
    if (static_cast<int>(rest.size()) != n + 1)
      throw ParseError("expected 'cap <theta> <c1> ... <c" + std::to_string(n) + ">'", 1, 1);
    const double theta = parse_complex(rest[0]).real();
    Point c(n);
    for (int k = 0; k < n; ++k) c[k] = parse_complex(rest[k + 1]);
    return cap_directions(c, theta, count, seed);
  }
  std::ifstream in(text);
  if (!in) throw Error("unknown direction preset or unreadable file '" + text + "'");
  std::vector<Point> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != n)
      throw ParseError("expected " + std::to_string(n) + " coordinates", line_no, 1);
    Point v(n);
    for (int k = 0; k < n; ++k) v[k] = parse_complex(toks[k]);
    out.push_back(v);
  }
  if (out.empty()) throw Error("direction file '" + text + "' is empty");
  return out;
}

double real_angle(const Point& u, const Point& v) {
  return std::acos(std::clamp(u.dot(v).real() / (u.norm() * v.norm()), -1.0, 1.0));
}

double line_angle(const Point& u, const Point& v) {
  return std::acos(std::clamp(std::abs(u.dot(v)) / (u.norm() * v.norm()), 0.0, 1.0));
}

}  // namespace forelli
