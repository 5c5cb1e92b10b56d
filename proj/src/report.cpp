#include "senssolve/report.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace senssolve {
namespace {

nlohmann::json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

const char* kNormalization =
    "bias and bound are divided by the standard deviation across replicates of the statistic minus its "
    "assumed worst-case expectation; each replicate contributes one statistic computed on its own "
    "assignment";

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

nlohmann::json results_to_json(const std::vector<SensitivityResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SensitivityResult& r : results) rows.push_back(to_json(r));
  return {{"results", rows}};
}

void write_results_csv(const std::vector<SensitivityResult>& results, std::ostream& out) {
  out << "method,gamma,tau0,statistic,expectation_bound,se,deviate,p_value,reject,alpha\n";
  for (const SensitivityResult& r : results) {
    out << method_name(r.method) << ',' << format_number(r.gamma) << ',' << format_number(r.tau0) << ','
        << format_number(r.statistic) << ',' << format_number(r.expectation_bound) << ',' << format_number(r.se)
        << ',' << format_number(r.deviate) << ',' << format_number(r.p_value) << ',' << (r.reject ? 1 : 0) << ','
        << format_number(r.alpha) << '\n';
  }
}

void write_results_text(const std::vector<SensitivityResult>& results, std::ostream& out) {
  out << std::left << std::setw(10) << "method" << std::right << std::setw(8) << "gamma" << std::setw(12)
      << "statistic" << std::setw(12) << "bound" << std::setw(12) << "se" << std::setw(10) << "deviate"
      << std::setw(10) << "p" << "  reject\n";
  for (const SensitivityResult& r : results) {
    out << std::left << std::setw(10) << method_name(r.method) << std::right << std::fixed << std::setprecision(3)
        << std::setw(8) << r.gamma << std::setprecision(5) << std::setw(12) << r.statistic << std::setw(12)
        << r.expectation_bound << std::setw(12) << r.se << std::setprecision(3) << std::setw(10) << r.deviate
        << std::setprecision(4) << std::setw(10) << r.p_value << "  " << (r.reject ? "yes" : "no") << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

nlohmann::json changepoint_to_json(const ChangepointResult& result, Method method, double tau0, double alpha) {
  return {{"method", method_name(method)},
          {"tau0", tau0},
          {"alpha", alpha},
          {"changepoint", result.gamma},
          {"not_significant_at_one", result.not_significant_at_one},
          {"monotonicity_warning", result.monotonicity_warning}};
}

nlohmann::json reference_to_json(const ReferenceDistribution& reference, const SensitivityResult& observed) {
  nlohmann::json quantiles = nlohmann::json::object();
  for (double level : {0.5, 0.9, 0.95, 0.975, 0.99}) {
    quantiles[format_number(level)] = reference.quantile(level);
  }
  return {{"seed", reference.seed},
          {"count", reference.count},
          {"discarded", reference.discarded},
          {"quantiles", quantiles},
          {"result", to_json(observed)}};
}

nlohmann::json study_to_json(const StudyResult& study) {
  const Scenario& s = study.scenario;
  nlohmann::json rows = nlohmann::json::array();
  for (const StudyRow& r : study.rows) {
    rows.push_back({{"method", method_name(r.method)},
                    {"size", r.size},
                    {"bias", finite_or_null(r.bias)},
                    {"bound", finite_or_null(r.bound)},
                    {"bound_units", r.bound_is_seconds ? "seconds" : "sd"},
                    {"mean_deviate", finite_or_null(r.mean_deviate)},
                    {"sd_deviate", finite_or_null(r.sd_deviate)},
                    {"rejections", r.rejections}});
  }
  return {{"scenario", s.label},
          {"metadata",
           {{"seed", s.seed},
            {"M", s.replicates},
            {"B", s.strata},
            {"gamma", s.gamma},
            {"alpha", s.alpha},
            {"normalization", kNormalization}}},
          {"rows", rows}};
}

void write_study_csv(const StudyResult& study, std::ostream& out) {
  const Scenario& s = study.scenario;
  out << "# scenario=" << s.label << " seed=" << s.seed << " M=" << s.replicates << " B=" << s.strata
      << " gamma=" << format_number(s.gamma) << " alpha=" << format_number(s.alpha) << '\n';
  out << "# " << kNormalization << '\n';
  out << "scenario,method,size,bias,bound,bound_units,mean_deviate,sd_deviate,rejections\n";
  for (const StudyRow& r : study.rows) {
    out << s.label << ',' << method_name(r.method) << ',' << format_number(r.size) << ',' << format_number(r.bias)
        << ',' << format_number(r.bound) << ',' << (r.bound_is_seconds ? "seconds" : "sd") << ','
        << format_number(r.mean_deviate) << ',' << format_number(r.sd_deviate) << ',' << r.rejections << '\n';
  }
}

void write_study_text(const StudyResult& study, std::ostream& out) {
  const Scenario& s = study.scenario;
  out << "scenario " << s.label << "  gamma " << format_number(s.gamma) << "  alpha " << format_number(s.alpha)
      << "  M " << s.replicates << "  B " << s.strata << "  seed " << s.seed << '\n';
  out << std::left << std::setw(10) << "method" << std::right << std::setw(8) << "size" << std::setw(9) << "bias"
      << std::setw(12) << "bound" << std::setw(12) << "mean dev" << std::setw(10) << "sd dev" << '\n';
  for (const StudyRow& r : study.rows) {
    out << std::left << std::setw(10) << method_name(r.method) << std::right << std::fixed << std::setprecision(3)
        << std::setw(8) << r.size << std::setprecision(2) << std::setw(9) << r.bias << std::setw(11)
        << (r.bound_is_seconds ? r.bound * 1000.0 : r.bound) << (r.bound_is_seconds ? "ms" : "  ")
        << std::setw(11) << r.mean_deviate << std::setw(10) << r.sd_deviate << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace senssolve
