#include "senssolve/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "senssolve/error.hpp"

namespace senssolve {
namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string_view rest(line);
  while (true) {
    const auto pos = rest.find(delimiter);
    fields.push_back(trim(rest.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return fields;
}

char detect_delimiter(const std::string& header) {
  if (header.find('\t') != std::string::npos) return '\t';
  if (header.find(';') != std::string::npos) return ';';
  return ',';
}

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  return text;
}

double parse_outcome(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    const std::string lowered = lowercase(field);
    if (lowered.find("nan") != std::string::npos || lowered.find("inf") != std::string::npos) {
      throw Error(ErrorCode::kNonFiniteOutcome, "line " + std::to_string(line_no) + ": '" + field + "'");
    }
    throw Error(ErrorCode::kMalformedInput,
                "line " + std::to_string(line_no) + ": outcome '" + field + "' is not a number");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kNonFiniteOutcome, "line " + std::to_string(line_no) + ": '" + field + "'");
  }
  return value;
}

bool parse_treated(const std::string& field, std::size_t line_no) {
  if (field == "1" || field == "1.0") return true;
  if (field == "0" || field == "0.0") return false;
  throw Error(ErrorCode::kMalformedInput,
              "line " + std::to_string(line_no) + ": treated must be 0 or 1, got '" + field + "'");
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ",";
    out += ids[i];
  }
  return out;
}

}  // namespace

MatchedDesign::MatchedDesign(std::vector<Stratum> strata) : strata_(std::move(strata)) {
  if (strata_.empty()) throw Error(ErrorCode::kEmptyInput, "design has no strata");
  binary_ = true;
  for (const Stratum& s : strata_) {
    if (s.size() < 2) {
      throw Error(ErrorCode::kStratumTooSmall, s.id + " has " + std::to_string(s.size()) + " unit(s)");
    }
    if (s.treated_index >= s.size()) {
      throw Error(ErrorCode::kMissingTreated, s.id);
    }
    for (double r : s.outcomes) {
      if (!std::isfinite(r)) throw Error(ErrorCode::kNonFiniteOutcome, s.id);
      if (r != 0.0 && r != 1.0) binary_ = false;
    }
    num_units_ += s.size();
  }
}

bool MatchedDesign::all_pairs() const {
  return std::all_of(strata_.begin(), strata_.end(), [](const Stratum& s) { return s.size() == 2; });
}

MatchedDesign MatchedDesign::negated() const {
  std::vector<Stratum> flipped = strata_;
  for (Stratum& s : flipped) {
    for (double& r : s.outcomes) r = -r;
  }
  return MatchedDesign(std::move(flipped));
}

MatchedDesign load_design(std::istream& in) {
  std::string header;
  std::size_t line_no = 0;
  while (std::getline(in, header)) {
    ++line_no;
    if (!trim(header).empty()) break;
  }
  if (trim(header).empty()) throw Error(ErrorCode::kEmptyInput, "no header line");

  const char delimiter = detect_delimiter(header);
  const std::vector<std::string> columns = split(header, delimiter);
  long block_col = -1, treated_col = -1, outcome_col = -1;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string name = lowercase(columns[c]);
    if (name == "block_id") block_col = static_cast<long>(c);
    if (name == "treated") treated_col = static_cast<long>(c);
    if (name == "outcome") outcome_col = static_cast<long>(c);
  }
  if (block_col < 0 || treated_col < 0 || outcome_col < 0) {
    throw Error(ErrorCode::kMalformedInput, "header must name block_id, treated and outcome columns");
  }
  const auto needed = static_cast<std::size_t>(std::max({block_col, treated_col, outcome_col}));

  struct Pending {
    Stratum stratum;
    std::size_t treated_count = 0;
  };
  std::vector<Pending> blocks;
  std::unordered_map<std::string, std::size_t> index_of;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, delimiter);
    if (fields.size() <= needed) {
      throw Error(ErrorCode::kMalformedInput, "line " + std::to_string(line_no) + " has too few columns");
    }
    const std::string& id = fields[static_cast<std::size_t>(block_col)];
    const bool treated = parse_treated(fields[static_cast<std::size_t>(treated_col)], line_no);
    const double outcome = parse_outcome(fields[static_cast<std::size_t>(outcome_col)], line_no);

    auto [it, inserted] = index_of.try_emplace(id, blocks.size());
    if (inserted) blocks.push_back(Pending{Stratum{id, {}, 0}, 0});
    Pending& block = blocks[it->second];
    if (treated) {
      block.stratum.treated_index = block.stratum.outcomes.size();
      ++block.treated_count;
    }
    block.stratum.outcomes.push_back(outcome);
  }
  if (blocks.empty()) throw Error(ErrorCode::kEmptyInput, "no data rows");

  std::vector<std::string> missing, multiple, small;
  for (const Pending& b : blocks) {
    if (b.treated_count == 0) missing.push_back(b.stratum.id);
    if (b.treated_count > 1) multiple.push_back(b.stratum.id);
    if (b.stratum.size() < 2) small.push_back(b.stratum.id);
  }
  if (!multiple.empty()) throw Error(ErrorCode::kMultipleTreated, join_ids(multiple));
  if (!missing.empty()) throw Error(ErrorCode::kMissingTreated, join_ids(missing));
  if (!small.empty()) throw Error(ErrorCode::kStratumTooSmall, join_ids(small));

  std::vector<Stratum> strata;
  strata.reserve(blocks.size());
  for (Pending& b : blocks) strata.push_back(std::move(b.stratum));
  return MatchedDesign(std::move(strata));
}

MatchedDesign load_design_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  return load_design(in);
}

void write_design_csv(const MatchedDesign& design, std::ostream& out) {
  out << "block_id,treated,outcome\n";
  char buffer[64];
  for (const Stratum& s : design.strata()) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), s.outcomes[j]);
      out << s.id << ',' << (j == s.treated_index ? 1 : 0) << ',' << std::string_view(buffer, ptr - buffer)
          << '\n';
    }
  }
}

nlohmann::json design_to_json(const MatchedDesign& design) {
  nlohmann::json strata = nlohmann::json::array();
  for (const Stratum& s : design.strata()) {
    strata.push_back({{"id", s.id}, {"treated_index", s.treated_index}, {"outcomes", s.outcomes}});
  }
  return {{"num_strata", design.num_strata()}, {"num_units", design.num_units()}, {"strata", strata}};
}

MatchedDesign design_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Stratum> strata;
    for (const auto& entry : doc.at("strata")) {
      strata.push_back(Stratum{entry.at("id").get<std::string>(), entry.at("outcomes").get<std::vector<double>>(),
                               entry.at("treated_index").get<std::size_t>()});
    }
    return MatchedDesign(std::move(strata));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
}

std::vector<StratumSummary> summarize(const MatchedDesign& design) {
  const double total = static_cast<double>(design.num_units());
  std::vector<StratumSummary> out;
  out.reserve(design.num_strata());
  for (const Stratum& s : design.strata()) {
    double control_sum = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != s.treated_index) control_sum += s.outcomes[j];
    }
    const double n = static_cast<double>(s.size());
    const double diff = s.treated_outcome() - control_sum / (n - 1.0);
    out.push_back(StratumSummary{diff, n / total, diff, s.size()});
  }
  return out;
}

std::vector<double> adjusted_deltas(std::span<const double> outcomes, std::size_t treated_index, double tau0) {
  const std::size_t n = outcomes.size();
  std::vector<double> adjusted(outcomes.begin(), outcomes.end());
  adjusted[treated_index] -= tau0;
  double total = 0.0;
  for (double a : adjusted) total += a;
  const double others = static_cast<double>(n) - 1.0;
  std::vector<double> deltas(n);
  for (std::size_t j = 0; j < n; ++j) deltas[j] = adjusted[j] - (total - adjusted[j]) / others;
  return deltas;
}

std::vector<double> adjusted_deltas(const Stratum& stratum, double tau0) {
  return adjusted_deltas(stratum.outcomes, stratum.treated_index, tau0);
}

}  // namespace senssolve
