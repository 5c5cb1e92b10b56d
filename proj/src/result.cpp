#include "senssolve/result.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "senssolve/error.hpp"
#include "senssolve/normal.hpp"

namespace senssolve {
namespace {

nlohmann::json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kPermT: return "perm_t";
    case Method::kDbar: return "dbar";
    case Method::kKtilde: return "ktilde";
    case Method::kBinaryIp: return "binary_ip";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "perm_t") return Method::kPermT;
  if (name == "dbar") return Method::kDbar;
  if (name == "ktilde") return Method::kKtilde;
  if (name == "binary_ip") return Method::kBinaryIp;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

void apply_normal_reference(SensitivityResult& result) {
  const double excess = result.statistic - result.expectation_bound;
  if (result.se > 0.0) {
    result.deviate = excess / result.se;
    result.p_value = normal_sf(result.deviate);
  } else {
    result.deviate = excess > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    result.p_value = excess > 0.0 ? 0.0 : 1.0;
  }
  result.reject = result.p_value <= result.alpha;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 0.5]");
}

nlohmann::json to_json(const SensitivityResult& result) {
  return {{"method", method_name(result.method)},
          {"gamma", result.gamma},
          {"tau0", result.tau0},
          {"statistic", finite_or_null(result.statistic)},
          {"expectation_bound", finite_or_null(result.expectation_bound)},
          {"se", finite_or_null(result.se)},
          {"deviate", finite_or_null(result.deviate)},
          {"p_value", result.p_value},
          {"reject", result.reject},
          {"alpha", result.alpha}};
}

}  // namespace senssolve
