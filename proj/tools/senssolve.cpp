// senssolve: sensitivity analysis for matched observational studies.
//
// Exit codes: 0 success, 1 usage error, 2 data or computation error.

#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "senssolve/design.hpp"
#include "senssolve/error.hpp"
#include "senssolve/inference.hpp"
#include "senssolve/report.hpp"
#include "senssolve/simlab.hpp"

namespace {

using senssolve::Error;
using senssolve::ErrorCode;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw UsageError("not a number: '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

// "1,1.5,2" or "start:step:stop" (stop included when hit to round-off).
std::vector<double> parse_gamma_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("gamma range must be start:step:stop");
    const double start = parse_number(parts[0]);
    const double step = parse_number(parts[1]);
    const double stop = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) throw UsageError("gamma range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    if (count > 100000) throw UsageError("gamma range too long");
    for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
  } else {
    for (const std::string& part : split(text, ',')) out.push_back(parse_number(part));
  }
  if (out.empty()) throw UsageError("empty gamma list");
  for (double g : out) {
    if (!(g >= 1.0) || !std::isfinite(g)) throw UsageError("gamma must be finite and >= 1");
  }
  return out;
}

std::vector<senssolve::Method> parse_methods(const std::string& text) {
  std::vector<senssolve::Method> out;
  for (const std::string& part : split(text, ',')) {
    try {
      out.push_back(senssolve::parse_method(part));
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
  }
  return out;
}

void check_alpha_flag(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw UsageError("--alpha must lie in (0, 0.5]");
}

void emit_json(const nlohmann::json& doc) { std::cout << doc.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity analysis for average treatment effects in matched observational studies"};
  app.require_subcommand(1);

  std::string input;
  std::string method_text = "dbar";
  std::string gamma_text = "1";
  std::string alternative_text = "greater";
  std::string format = "json";
  std::string scenario_label;
  double tau0 = 0.0;
  std::optional<double> alpha;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> strata;
  std::uint64_t seed = 1;
  double gamma_max = 10.0;
  std::string gamma_sim;

  const std::vector<std::string> formats = {"json", "csv", "text"};

  auto* analyze = app.add_subcommand("analyze", "Worst-case p-values for each method and gamma");
  analyze->add_option("--input", input, "Design file with block_id, treated, outcome columns")->required();
  analyze->add_option("--method", method_text, "perm_t, dbar, ktilde, binary_ip (comma list allowed)");
  analyze->add_option("--gamma", gamma_text, "Comma list or start:step:stop");
  analyze->add_option("--tau0", tau0, "Hypothesized average effect");
  analyze->add_option("--alpha", alpha, "Level in (0, 0.5]; default 0.05");
  analyze->add_option("--alternative", alternative_text)->check(CLI::IsMember({"greater", "less"}));
  analyze->add_option("--format", format)->check(CLI::IsMember(formats));

  auto* cp = app.add_subcommand("changepoint", "Smallest gamma at which the worst-case p-value reaches alpha");
  cp->add_option("--input", input)->required();
  cp->add_option("--method", method_text);
  cp->add_option("--tau0", tau0);
  cp->add_option("--alpha", alpha, "default 0.05");
  cp->add_option("--gamma-max", gamma_max, "Upper end of the search");
  cp->add_option("--alternative", alternative_text)->check(CLI::IsMember({"greater", "less"}));
  cp->add_option("--format", format)->check(CLI::IsMember(formats));

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo size study for a generative scenario");
  simulate->add_option("--scenario", scenario_label, "a..k, binary-a..binary-k, appendixA")->required();
  simulate->add_option("--method", method_text, "Comma list; default depends on the scenario");
  simulate->add_option("--gamma", gamma_sim, "Single gamma; default 5 (1 for appendixA)");
  simulate->add_option("--alpha", alpha, "default 0.10 (0.05 for appendixA)");
  simulate->add_option("--M", replicates, "Replicates (>= 100)");
  simulate->add_option("--B", strata, "Strata per replicate");
  simulate->add_option("--seed", seed);
  simulate->add_option("--format", format)->check(CLI::IsMember(formats));

  std::size_t draws = 10000;
  auto* randref = app.add_subcommand("randref", "dbar test against the biased-randomization reference distribution");
  randref->add_option("--input", input)->required();
  randref->add_option("--gamma", gamma_text, "Single gamma");
  randref->add_option("--tau0", tau0);
  randref->add_option("--alpha", alpha, "default 0.05");
  randref->add_option("--M", draws, "Reference draws (>= 1000)");
  randref->add_option("--seed", seed);
  randref->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  bool default_methods = true;
  for (const auto* sub : {analyze, cp, simulate}) {
    if (sub->parsed() && sub->count("--method") > 0) default_methods = false;
  }

  try {
    if (analyze->parsed()) {
      const double a = alpha.value_or(0.05);
      check_alpha_flag(a);
      const auto methods = parse_methods(method_text);
      const auto gammas = parse_gamma_grid(gamma_text);
      const auto alternative = senssolve::parse_alternative(alternative_text);
      const senssolve::MatchedDesign design = senssolve::load_design_file(input);
      std::vector<senssolve::SensitivityResult> results;
      for (senssolve::Method m : methods) {
        for (double g : gammas) {
          results.push_back(senssolve::run_method(design, m, tau0, senssolve::GammaModel(g), a, alternative));
        }
      }
      if (format == "json") {
        nlohmann::json doc = senssolve::results_to_json(results);
        doc["command"] = "analyze";
        doc["input"] = input;
        doc["alternative"] = alternative_text;
        doc["B"] = design.num_strata();
        doc["N"] = design.num_units();
        emit_json(doc);
      } else if (format == "csv") {
        senssolve::write_results_csv(results, std::cout);
      } else {
        senssolve::write_results_text(results, std::cout);
      }
    } else if (cp->parsed()) {
      const double a = alpha.value_or(0.05);
      check_alpha_flag(a);
      const auto methods = parse_methods(method_text);
      if (!(gamma_max >= 1.0)) throw UsageError("--gamma-max must be >= 1");
      const auto alternative = senssolve::parse_alternative(alternative_text);
      const senssolve::MatchedDesign design = senssolve::load_design_file(input);
      nlohmann::json rows = nlohmann::json::array();
      std::ostringstream csv, text;
      csv << "method,tau0,alpha,changepoint,not_significant_at_one,monotonicity_warning\n";
      for (senssolve::Method m : methods) {
        const auto r = senssolve::changepoint(design, tau0, m, a, gamma_max, alternative);
        rows.push_back(senssolve::changepoint_to_json(r, m, tau0, a));
        csv << senssolve::method_name(m) << ',' << senssolve::format_number(tau0) << ','
            << senssolve::format_number(a) << ',' << senssolve::format_number(r.gamma) << ','
            << r.not_significant_at_one << ',' << r.monotonicity_warning << '\n';
        text << senssolve::method_name(m) << ": changepoint " << std::fixed << std::setprecision(4) << r.gamma
             << (r.not_significant_at_one ? " (not significant at gamma 1)" : "")
             << (r.monotonicity_warning ? " (warning: p not monotone on the check grid)" : "") << '\n';
      }
      if (format == "json") {
        emit_json({{"command", "changepoint"}, {"input", input}, {"gamma_max", gamma_max}, {"results", rows}});
      } else {
        std::cout << (format == "csv" ? csv.str() : text.str());
      }
    } else if (simulate->parsed()) {
      senssolve::Scenario scenario;
      try {
        scenario = senssolve::make_scenario(scenario_label);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (!gamma_sim.empty()) {
        const auto g = parse_gamma_grid(gamma_sim);
        if (g.size() != 1) throw UsageError("simulate takes a single --gamma");
        scenario.gamma = g.front();
      }
      if (alpha) scenario.alpha = *alpha;
      check_alpha_flag(scenario.alpha);
      if (replicates) scenario.replicates = *replicates;
      if (scenario.replicates < 100) throw UsageError("--M must be at least 100");
      if (strata) scenario.strata = *strata;
      if (scenario.strata < 2) throw UsageError("--B must be at least 2");
      scenario.seed = seed;
      std::vector<senssolve::Method> methods;
      if (!default_methods) methods = parse_methods(method_text);
      const senssolve::StudyResult study = senssolve::run_size_study(scenario, methods);
      if (format == "json") {
        nlohmann::json doc = senssolve::study_to_json(study);
        doc["command"] = "simulate";
        emit_json(doc);
      } else if (format == "csv") {
        senssolve::write_study_csv(study, std::cout);
      } else {
        senssolve::write_study_text(study, std::cout);
      }
    } else if (randref->parsed()) {
      const double a = alpha.value_or(0.05);
      check_alpha_flag(a);
      const auto gammas = parse_gamma_grid(gamma_text);
      if (gammas.size() != 1) throw UsageError("randref takes a single --gamma");
      if (draws < 1000) throw UsageError("--M must be at least 1000");
      const senssolve::MatchedDesign design = senssolve::load_design_file(input);
      const senssolve::GammaModel model(gammas.front());
      const auto reference = senssolve::randomization_reference(design, tau0, model, draws, seed);
      const auto result = senssolve::test_dbar_reference(design, tau0, model, a, reference);
      if (format == "json") {
        nlohmann::json doc = senssolve::reference_to_json(reference, result);
        doc["command"] = "randref";
        doc["input"] = input;
        emit_json(doc);
      } else {
        std::cout << "reference draws " << reference.count << " (discarded " << reference.discarded << ", seed "
                  << reference.seed << ")\n"
                  << "critical value " << senssolve::format_number(reference.quantile(1.0 - a)) << '\n';
        senssolve::write_results_text({result}, std::cout);
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
