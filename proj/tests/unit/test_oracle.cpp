#include <doctest.h>

#include "mgtv/analysis.hpp"
#include "mgtv/oracle.hpp"

using namespace mgtv;
using Q = Rational;

namespace {

template <class S>
void check_phase_invariants(const ExplicitSolution<S> &sol) {
  for (const auto &phase : sol.phases) {
    S flux{};
    S length{};
    for (const auto &p : phase.plateaus) {
      flux += p.length * p.slope;
      length += p.length;
    }
    CHECK(flux == 0);
    S total{};
    for (const auto &e : sol.edges)
      total += e.length;
    CHECK(length == total);
  }
  // continuity across phase boundaries and plateau order within a phase
  for (std::size_t k = 0; k + 1 < sol.phases.size(); ++k) {
    const auto &a = sol.phases[k];
    const auto &b = sol.phases[k + 1];
    CHECK(a.end == b.start);
    for (const auto &p : a.plateaus) {
      const S at_end = p.value + p.slope * (a.end - a.start);
      bool found = false;
      for (const auto &q : b.plateaus)
        for (const auto &s : q.segments)
          for (const auto &r : p.segments)
            if (s.edge == r.edge && s.from <= r.from && r.to <= s.to)
              found = found || q.value == at_end;
      CHECK(found);
    }
  }
  CHECK(sol.final_value == sol.mean);
}

}  // namespace

TEST_CASE("neumann case 1") {
  const auto s = neumann_case1<Q>(1, Q(3, 10), 1);
  CHECK(s.extinction_time == Q(21, 100));
  CHECK(s.final_value == Q(3, 10));
  // T = k a (L - a) / L
  CHECK(s.extinction_time == Q(3, 10) * Q(7, 10));
  const auto &p = s.phases.front().plateaus;
  REQUIRE(p.size() == 2);
  CHECK(p[0].slope == Q(-10, 3));
  CHECK(p[1].slope == Q(10, 7));
  check_phase_invariants(s);

  const auto sym = neumann_case1<Q>(1, Q(1, 2), 1);
  CHECK(sym.extinction_time == Q(1, 4));
  CHECK(sym.final_value == Q(1, 2));

  const auto zero = neumann_case1<Q>(1, Q(1, 2), 0);
  CHECK(zero.extinction_time == 0);
  CHECK(zero.final_value == 0);
}

TEST_CASE("neumann case 2") {
  // Mirror of case 1: T = k b (L - b) / L. The shorter k (L - b) / L is not
  // a valid extinction time.
  const auto s = neumann_case2<Q>(1, Q(7, 10), 1);
  CHECK(s.extinction_time == Q(21, 100));
  CHECK(s.final_value == Q(3, 10));
  CHECK(s.extinction_time != Q(3, 10));
  CHECK(neumann_case2<Q>(1, Q(1, 2), 2).final_value == 1);
  CHECK(neumann_case2<Q>(1, Q(1, 2), 0).extinction_time == 0);
  check_phase_invariants(s);
}

TEST_CASE("neumann case 3") {
  const auto s = neumann_case3<Q>(1, Q(1, 2), 0, 1);
  CHECK(s.extinction_time == Q(1, 4));
  CHECK(s.final_value == Q(1, 2));
  const auto t = neumann_case3<Q>(3, 1, 1, 4);
  CHECK(t.extinction_time == 2);
  CHECK(t.final_value == 3);
  check_phase_invariants(t);
  const auto flat = neumann_case3<Q>(1, Q(1, 2), 2, 2);
  CHECK(flat.extinction_time == 0);
  CHECK(flat.final_value == 2);
  CHECK_THROWS_AS(neumann_case3<Q>(1, Q(1, 2), 2, 1), OracleError);
}

TEST_CASE("neumann case 4") {
  const auto s = neumann_case4<Q>(1, Q(1, 2), Q(4, 5), 1);
  const auto ends = phase_ends(s);
  REQUIRE(ends.size() == 2);
  CHECK(ends[0] == Q(3, 35));
  CHECK(ends[1] - ends[0] == Q(9, 140));
  CHECK(s.final_value == Q(3, 10));
  // T1 = k (b - a)(L - b) / (2L - (a + b))
  CHECK(ends[0] == Q(3, 10) * Q(1, 5) / (2 - Q(13, 10)));
  check_phase_invariants(s);
  CHECK_THROWS_AS(neumann_case4<Q>(1, Q(1, 5), Q(3, 10), 1), OracleError);
  CHECK(neumann_case4<Q>(1, Q(1, 2), Q(4, 5), 0).extinction_time == 0);
}

TEST_CASE("path3") {
  const auto s = path3_example<Q>(2, 1, Q(1, 2), 1);
  const auto ends = phase_ends(s);
  REQUIRE(ends.size() == 2);
  // T1 = k a (l2 - a) / (2 l2 - a)
  CHECK(ends[0] == Q(1, 6));
  CHECK(ends[1] - ends[0] == Q(1, 6));
  CHECK(s.final_value == Q(1, 6));
  const auto &p1 = s.phases[0].plateaus;
  REQUIRE(p1.size() == 3);
  CHECK(p1[0].slope == Q(1, 2));
  CHECK(p1[1].slope == -4);
  CHECK(p1[2].slope == 2);
  // value on e2 at T1 is k a / (2 l2 - a)
  const auto at = eval_exact(s, ends[0]);
  for (const Q &v : at[1].values)
    CHECK(v == Q(1, 3));
  // T1 / l1 alone would omit the phase-2 increment on e1.
  CHECK(s.final_value != ends[0] / 2);
  check_phase_invariants(s);
  CHECK(path3_example<Q>(2, 1, Q(1, 2), 0).extinction_time == 0);
  CHECK_THROWS_AS(path3_example<Q>(Q(1, 4), 1, Q(1, 2), 1), OracleError);
}

TEST_CASE("star") {
  const auto s = star_example<Q>(2, 1, Q(1, 2), 1);
  const auto ends = phase_ends(s);
  REQUIRE(ends.size() == 2);
  CHECK(ends[0] == Q(3, 10));
  CHECK(ends[1] - ends[0] == Q(9, 20));
  CHECK(s.final_value == Q(3, 8));
  // T2 = T1 (2l - a) l1 / (a (l1 + 2l))
  CHECK(ends[1] - ends[0] == ends[0] * Q(3, 2) * 2 / (Q(1, 2) * 4));
  const auto at = eval_exact(s, ends[0]);
  // the two plateaus of e1 meet at T1
  CHECK(at[0].values.front() == at[0].values.back());
  check_phase_invariants(s);

  for (const Q a : {Q(1, 4), Q(1, 1), Q(3, 2)}) {
    const auto t = star_example<Q>(2, 1, a, 3);
    CHECK(t.final_value == t.mean);
    CHECK(t.final_value == 3 * (2 - a) / 4);
  }
  CHECK(star_example<Q>(2, 1, Q(1, 2), 0).final_value == 0);
  CHECK_THROWS_AS(star_example<Q>(5, 1, 3, 1), OracleError);
}

TEST_CASE("eval") {
  const auto s = star_example<Q>(2, 1, Q(1, 2), 1);
  const auto g = MetricGraph::build(s.graph_spec());
  const auto u0 = eval(g, s, 0.0);
  CHECK(tv(g, u0) == tv(g, s.initial(g)));
  CHECK(u0.edge(EdgeIndex{0}).values == std::vector<double>{0, 1});
  const auto late = eval(g, s, 5.0);
  CHECK(late.min_value() == 0.375);
  CHECK(late.max_value() == 0.375);
  CHECK(mean(g, eval(g, s, 0.4)) == doctest::Approx(0.375));
  CHECK_THROWS_AS(eval_exact(s, Q(-1)), OracleError);

  const auto d = star_example<double>(2, 1, 0.5, 1);
  CHECK(d.extinction_time == doctest::Approx(0.75));
  CHECK(d.final_value == doctest::Approx(0.375));
}

TEST_CASE("plateau dynamics rejects triple junctions") {
  using Sol = ExplicitSolution<Q>;
  CHECK_THROWS_AS(
      plateau_dynamics<Q>("y", {"c", "a", "b", "d"},
                          {Sol::EdgeDef{0, "a", "c", 1}, Sol::EdgeDef{1, "c", "b", 1},
                           Sol::EdgeDef{2, "c", "d", 1}},
                          {Sol::Datum{{0, 1}, {0}}, Sol::Datum{{0, 1}, {1}},
                           Sol::Datum{{0, 1}, {2}}}),
      OracleError);
}
