#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "senssolve/inference.hpp"
#include "senssolve/result.hpp"
#include "senssolve/simlab.hpp"

namespace senssolve {

// Shortest decimal that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_number(double x);

nlohmann::json results_to_json(const std::vector<SensitivityResult>& results);
void write_results_csv(const std::vector<SensitivityResult>& results, std::ostream& out);
void write_results_text(const std::vector<SensitivityResult>& results, std::ostream& out);

nlohmann::json changepoint_to_json(const ChangepointResult& result, Method method, double tau0, double alpha);

// Summary of a reference distribution: count, discards, seed and a few
// upper quantiles, plus the observed test when supplied.
nlohmann::json reference_to_json(const ReferenceDistribution& reference, const SensitivityResult& observed);

// Size/bias/bound rows in the layout of the simulation tables, with the run
// metadata (seed, M, B, gamma, alpha) needed to reproduce them.
nlohmann::json study_to_json(const StudyResult& study);
void write_study_csv(const StudyResult& study, std::ostream& out);
void write_study_text(const StudyResult& study, std::ostream& out);

}  // namespace senssolve
