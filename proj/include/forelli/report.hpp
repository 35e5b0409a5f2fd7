#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forelli/series.hpp"

namespace forelli {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Finite values as numbers; infinities and NaN as "inf", "-inf", "nan".
Json json_number(double x);
/// [re, im]
Json json_complex(Complex c);
Json json_point(const Point& p);
Json json_points(const std::vector<Point>& ps);

enum class StageStatus { Pass, Fail, Skipped };
std::string to_string(StageStatus s);

struct Stage {
  std::string name;
  StageStatus status = StageStatus::Skipped;
  std::string summary;
  /// Tolerance the verdict was decided against, if any.
  std::optional<double> tolerance;
  long long samples = 0;
  Json data = Json::object();
};

Json to_json(const Stage& s);

/// Report envelope shared by every subcommand.
///
/// Key order is fixed and nothing time-dependent is written unless timings
/// are requested, so equal inputs give equal bytes.
struct Report {
  std::string command;
  Json config = Json::object();
  std::vector<Stage> stages;
  std::vector<std::string> warnings;
  Json result = Json::object();
  std::string verdict;

  bool passed() const;
  Json to_json() const;
  std::string dump() const;
};

}  // namespace forelli
