#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace senssolve {

enum class Method { kPermT, kDbar, kKtilde, kBinaryIp };

std::string_view method_name(Method method);
// Accepts perm_t, dbar, ktilde, binary_ip. Throws InvalidArgument otherwise.
Method parse_method(std::string_view name);

struct SensitivityResult {
  Method method = Method::kDbar;
  double gamma = 1.0;
  double tau0 = 0.0;
  double statistic = 0.0;
  double expectation_bound = 0.0;
  double se = 0.0;
  // (statistic - expectation_bound) / se. Infinite when se is zero.
  double deviate = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
};

// Fills deviate, p_value and reject from statistic, expectation_bound, se
// and alpha against the standard normal. A zero se gives p = 1 when the
// statistic does not exceed the bound and p = 0 otherwise.
void apply_normal_reference(SensitivityResult& result);

// Throws InvalidArgument unless 0 < alpha <= 0.5.
void check_alpha(double alpha);

// Non-finite numbers serialize as null.
nlohmann::json to_json(const SensitivityResult& result);

}  // namespace senssolve
