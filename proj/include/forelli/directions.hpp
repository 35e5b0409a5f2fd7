#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forelli/series.hpp"

namespace forelli {

/// Uniform sample of the unit sphere S^{2n-1} in C^n.
std::vector<Point> sphere_directions(int n, int count, std::uint64_t seed);

/// Uniform sample of the spherical cap {v : angle(v, center) <= theta}, with
/// the real angle arccos Re<v, center> of R^{2n}.
std::vector<Point> cap_directions(const Point& center, double theta, int count, std::uint64_t seed);

/// "sphere [count]", "cap <theta> <c1> ... <cn> [count=<m>]" or the path of a
/// file with one direction per line (n complex tokens such as 1, -0.5i, 2+3i).
std::vector<Point> parse_directions(const std::string& text, int n, int default_count, std::uint64_t seed);

/// Parses a complex literal such as "2", "-1.5i" or "0.3-2i".
Complex parse_complex(const std::string& token);

/// Real angle between unit vectors of C^n seen in R^{2n}.
double real_angle(const Point& u, const Point& v);
/// Angle between the complex lines through u and v: arccos |<u, v>|.
double line_angle(const Point& u, const Point& v);

}  // namespace forelli
