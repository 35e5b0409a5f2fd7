#include "forelli/report.hpp"

#include <cmath>

namespace forelli {

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json json_complex(Complex c) { return Json::array({json_number(c.real()), json_number(c.imag())}); }

Json json_point(const Point& p) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < p.size(); ++k) a.push_back(json_complex(p[k]));
  return a;
}

Json json_points(const std::vector<Point>& ps) {
  Json a = Json::array();
  for (const Point& p : ps) a.push_back(json_point(p));
  return a;
}

std::string to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Pass: return "pass";
    case StageStatus::Fail: return "fail";
    case StageStatus::Skipped: return "skipped";
  }
  return "?";
}

Json to_json(const Stage& s) {
  Json j;
  j["name"] = s.name;
  j["status"] = to_string(s.status);
  j["summary"] = s.summary;
  j["tolerance"] = s.tolerance ? json_number(*s.tolerance) : Json(nullptr);
  j["samples"] = s.samples;
  j["data"] = s.data;
  return j;
}

bool Report::passed() const {
  for (const Stage& s : stages)
    if (s.status == StageStatus::Fail) return false;
  return true;
}

Json Report::to_json() const {
  Json j;
  j["tool"] = "forelli-lab";
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;
  Json st = Json::array();
  for (const Stage& s : stages) st.push_back(forelli::to_json(s));
  j["stages"] = st;
  j["warnings"] = warnings;
  j["result"] = result;
  j["verdict"] = verdict.empty() ? (passed() ? "pass" : "fail") : verdict;
  return j;
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

}  // namespace forelli
