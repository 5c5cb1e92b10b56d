#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "senssolve/design.hpp"
#include "senssolve/error.hpp"

using namespace senssolve;

namespace {

ErrorCode load_error(const std::string& text) {
  std::istringstream in(text);
  try {
    load_design(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("load_design counts strata and units in first-appearance order") {
  std::istringstream in("block_id,treated,outcome\nA,1,4.0\nB,1,2.0\nA,0,1.0\nB,0,2.0\nB,0,5.0\n");
  const MatchedDesign d = load_design(in);
  CHECK(d.num_strata() == 2);
  CHECK(d.num_units() == 5);
  CHECK(d.stratum(0).id == "A");
  CHECK(d.stratum(0).size() == 2);
  CHECK(d.stratum(1).size() == 3);
  CHECK(d.stratum(1).outcomes == std::vector<double>{2.0, 2.0, 5.0});
  CHECK(d.stratum(1).treated_index == 0);
}

TEST_CASE("load_design detects tab and semicolon delimiters and ignores extra columns") {
  std::istringstream tsv("age\tBlock_ID\ttreated\toutcome\n30\tx\t0\t1.5\n31\tx\t1\t2.5\n");
  const MatchedDesign a = load_design(tsv);
  CHECK(a.stratum(0).treated_index == 1);
  std::istringstream semi("block_id;treated;outcome\n1;1;0\n1;0;1\n");
  const MatchedDesign b = load_design(semi);
  CHECK(b.is_binary());
  CHECK(b.all_pairs());
}

TEST_CASE("load_design validation errors") {
  CHECK(load_error("block_id,treated,outcome\nX,1,1\nX,1,2\n") == ErrorCode::kMultipleTreated);
  CHECK(load_error("block_id,treated,outcome\nX,0,1\nX,0,2\n") == ErrorCode::kMissingTreated);
  CHECK(load_error("block_id,treated,outcome\nX,1,1\n") == ErrorCode::kStratumTooSmall);
  CHECK(load_error("block_id,treated,outcome\nX,1,nan\nX,0,2\n") == ErrorCode::kNonFiniteOutcome);
  CHECK(load_error("block_id,treated,outcome\n") == ErrorCode::kEmptyInput);
  CHECK(load_error("") == ErrorCode::kEmptyInput);
  CHECK(load_error("block_id,treated,outcome\nX,2,1\nX,0,2\n") == ErrorCode::kMalformedInput);
  CHECK(load_error("block,treated,outcome\nX,1,1\nX,0,2\n") == ErrorCode::kMalformedInput);
}

TEST_CASE("multiple-treated error names the block") {
  std::istringstream in("block_id,treated,outcome\nblockX,1,1\nblockX,1,2\n");
  try {
    load_design(in);
    FAIL("expected MultipleTreated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMultipleTreated);
    CHECK(e.detail().find("blockX") != std::string::npos);
  }
}

TEST_CASE("summarize") {
  std::istringstream in("block_id,treated,outcome\nA,1,4.0\nA,0,1.0\nB,1,2.0\nB,0,2.0\nB,0,5.0\nC,1,3\nC,0,3\n");
  const auto s = summarize(load_design(in));
  CHECK(s[0].tau_hat == 3.0);
  CHECK(s[0].weight == doctest::Approx(2.0 / 7.0));
  CHECK(s[1].tau_hat == -1.5);
  CHECK(s[2].tau_hat == 0.0);
  for (const auto& x : s) CHECK(x.tau_hat == x.delta_obs);
}

TEST_CASE("adjusted_deltas") {
  const std::vector<double> pair{4.0, 1.0};
  CHECK(adjusted_deltas(pair, 0, 0.0) == std::vector<double>{3.0, -3.0});
  CHECK(adjusted_deltas(pair, 0, 3.0) == std::vector<double>{0.0, 0.0});
  // Adjusted responses (4, 0, 1): 4 - 0.5, 0 - 2.5, 1 - 2.
  const std::vector<double> triple{5.0, 0.0, 1.0};
  const auto d = adjusted_deltas(triple, 0, 1.0);
  CHECK(d[0] == doctest::Approx(3.5));
  CHECK(d[1] == doctest::Approx(-2.5));
  CHECK(d[2] == doctest::Approx(-1.0));
}

TEST_CASE("adjusted_deltas properties on random strata") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const MatchedDesign d = oracle::random_design(rng, 3, 7, 0.5);
    const auto summaries = summarize(d);
    double wsum = 0.0;
    for (std::size_t i = 0; i < d.num_strata(); ++i) {
      const Stratum& s = d.stratum(i);
      const double tau0 = 0.3;
      const auto a = adjusted_deltas(s, tau0);
      const auto ref = oracle::imputed_deltas(s.outcomes, s.treated_index, tau0);
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(ref[j]).epsilon(1e-12));
      CHECK(a[s.treated_index] == doctest::Approx(summaries[i].tau_hat - tau0).epsilon(1e-12));
      // Leave-one-out deltas always sum to zero.
      double total = 0.0, scale = 0.0;
      for (double v : a) {
        total += v;
        scale += std::abs(v);
      }
      CHECK(std::abs(total) <= 1e-12 * std::max(1.0, scale));
      wsum += summaries[i].weight;
    }
    CHECK(std::abs(wsum - 1.0) < 1e-12);
  }
}

TEST_CASE("design round trips through CSV and JSON") {
  std::mt19937_64 rng(5);
  const MatchedDesign d = oracle::random_design(rng, 20, 6, 1.0);
  std::ostringstream out;
  write_design_csv(d, out);
  std::istringstream in(out.str());
  const MatchedDesign back = load_design(in);
  const MatchedDesign via_json = design_from_json(design_to_json(d));
  for (const MatchedDesign* e : {&back, &via_json}) {
    REQUIRE(e->num_strata() == d.num_strata());
    for (std::size_t i = 0; i < d.num_strata(); ++i) {
      CHECK(e->stratum(i).id == d.stratum(i).id);
      CHECK(e->stratum(i).treated_index == d.stratum(i).treated_index);
      CHECK(e->stratum(i).outcomes == d.stratum(i).outcomes);
    }
  }
}

TEST_CASE("negated design flips every outcome") {
  std::mt19937_64 rng(3);
  const MatchedDesign d = oracle::random_design(rng, 4, 4, 1.0);
  const MatchedDesign n = d.negated();
  for (std::size_t i = 0; i < d.num_strata(); ++i) {
    for (std::size_t j = 0; j < d.stratum(i).size(); ++j) CHECK(n.stratum(i).outcomes[j] == -d.stratum(i).outcomes[j]);
  }
}
