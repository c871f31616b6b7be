#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "jhg/types.hpp"

namespace jhg {

enum class ModelKind { TFT, CAB };

inline constexpr std::size_t kTftParams = 7;
inline constexpr std::size_t kCabParams = 30;
inline constexpr double kParamMin = 0.0;
inline constexpr double kParamMax = 100.0;

inline std::size_t param_count(ModelKind kind) { return kind == ModelKind::TFT ? kTftParams : kCabParams; }

inline std::string_view to_string(ModelKind kind) { return kind == ModelKind::TFT ? "TFT" : "CAB"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "TFT" || s == "tft") return ModelKind::TFT;
  if (s == "CAB" || s == "cab") return ModelKind::CAB;
  throw Error("unknown model kind '" + std::string(s) + "'");
}

struct Parameterization {
  ModelKind kind = ModelKind::TFT;
  std::vector<double> values;

  double operator[](std::size_t i) const { return values[i]; }
  /// Parameter i mapped onto [0,1].
  double unit(std::size_t i) const { return values[i] / kParamMax; }

  bool operator==(const Parameterization&) const = default;
};

inline void validate(const Parameterization& p) {
  if (p.values.size() != param_count(p.kind))
    throw Error(std::string(to_string(p.kind)) + " needs " + std::to_string(param_count(p.kind)) + " parameters, got " +
                std::to_string(p.values.size()));
  for (double v : p.values)
    if (!(v >= kParamMin && v <= kParamMax)) throw Error("parameter value outside [0,100]");
}

inline Parameterization sample_parameterization(ModelKind kind, Rng& rng) {
  std::uniform_real_distribution<double> u(kParamMin, kParamMax);
  Parameterization p{kind, std::vector<double>(param_count(kind))};
  for (double& v : p.values) v = u(rng);
  return p;
}

inline double clamp_param(double v) { return std::clamp(v, kParamMin, kParamMax); }

/// Mean absolute per-coordinate difference on the [0,100] scale.
inline double mean_param_distance(const Parameterization& a, const Parameterization& b) {
  if (a.values.size() != b.values.size()) throw Error("parameterization length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
  return s / static_cast<double>(a.values.size());
}

}  // namespace jhg
