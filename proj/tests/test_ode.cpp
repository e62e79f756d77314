#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "hypflow/ode.hpp"

using namespace hypflow::ode;

namespace {

const Rhs kExpGrowth = [](double, std::span<const double> y, std::span<double> dy) {
  dy[0] = y[0];
};
const Rhs kExpDecay = [](double, std::span<const double> y, std::span<double> dy) {
  dy[0] = -y[0];
};
const Rhs kHarmonic = [](double, std::span<const double> y, std::span<double> dy) {
  dy[0] = -y[1];
  dy[1] = y[0];
};
// y' = cos(s), y(0) = 0  =>  y = sin(s); used for event-direction tests.
const Rhs kCosine = [](double s, std::span<const double>, std::span<double> dy) {
  dy[0] = std::cos(s);
};

StepControl tight() {
  StepControl c;
  c.rtol = 1e-10;
  c.atol = 1e-12;
  c.h_max = 5e-3;  // keeps dense output well below the controller tolerances
  return c;
}

double final_value(const Trajectory& t) { return t.nodes.back().state[0]; }

}  // namespace

TEST_CASE("exponential growth reaches e within rtol") {
  StepControl c = tight();
  c.s_max = 1.0;
  const Trajectory t = integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, c);
  CHECK(t.termination == Termination::ReachedBound);
  CHECK(t.nodes.back().s == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::fabs(final_value(t) - std::exp(1.0)) < c.rtol * std::exp(1.0));

  // Nodes are strictly monotone in s.
  for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
    CHECK(t.nodes[i].s < t.nodes[i + 1].s);
}

TEST_CASE("harmonic oscillator returns to start within 10*rtol") {
  StepControl c = tight();
  c.s_max = 2.0 * M_PI;
  const Trajectory t = integrate({kHarmonic, {1.0, 0.0}, 0.0, Direction::Forward}, {}, c);
  CHECK(t.termination == Termination::ReachedBound);
  const double ex = t.nodes.back().state[0] - 1.0;
  const double ey = t.nodes.back().state[1] - 0.0;
  CHECK(std::hypot(ex, ey) < 10.0 * c.rtol);
}

TEST_CASE("event on decaying exponential lands at ln 2 within atol") {
  StepControl c = tight();
  c.h_max = 1e-3;
  c.s_max = 5.0;
  const EventSpec half{[](double, std::span<const double> y) { return y[0] - 0.5; },
                       GuardDirection::Any, true, "half-life"};
  const Trajectory t =
      integrate({kExpDecay, {1.0}, 0.0, Direction::Forward}, {&half, 1}, c);
  REQUIRE(t.termination == Termination::EventStop);
  REQUIRE(t.events.size() == 1);
  REQUIRE(t.stop_event.has_value());
  CHECK(*t.stop_event == 0);

  const EventRecord& e = t.events.front();
  CHECK(std::fabs(e.s - std::log(2.0)) < c.atol);
  CHECK(std::fabs(half.guard(e.s, e.state)) < c.atol);
  CHECK(e.guard_slope == doctest::Approx(-0.5).epsilon(1e-6));

  // The trajectory ends at the event, and the event is bracketed by nodes.
  CHECK(t.nodes.back().s == e.s);
  bool bracketed = false;
  for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
    if (t.nodes[i].s <= e.s && e.s <= t.nodes[i + 1].s) bracketed = true;
  CHECK(bracketed);
}

TEST_CASE("tightening tolerances never increases the final-state error") {
  double prev_exp = -1.0, prev_har = -1.0;
  for (double tol : {1e-6, 2.5e-7, 1e-8, 1e-10}) {
    StepControl c;
    c.rtol = tol;
    c.atol = tol * 1e-2;
    c.s_max = 1.0;
    const double err_exp =
        std::fabs(final_value(integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, c)) -
                  std::exp(1.0));
    c.s_max = 2.0 * M_PI;
    const Trajectory th = integrate({kHarmonic, {1.0, 0.0}, 0.0, Direction::Forward}, {}, c);
    const double err_har =
        std::hypot(th.nodes.back().state[0] - 1.0, th.nodes.back().state[1]);
    if (prev_exp >= 0.0) {
      CHECK(err_exp <= prev_exp);
      CHECK(err_har <= prev_har);
    }
    prev_exp = err_exp;
    prev_har = err_har;
  }
}

TEST_CASE("backward integration of a forward trajectory recovers the start") {
  StepControl c = tight();
  c.s_max = 1.0;
  const Trajectory fwd = integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, c);
  const Trajectory bwd =
      integrate({kExpGrowth, {final_value(fwd)}, 1.0, Direction::Backward}, {}, c);
  CHECK(bwd.termination == Termination::ReachedBound);
  CHECK(bwd.nodes.back().s == doctest::Approx(0.0));
  CHECK(std::fabs(final_value(bwd) - 1.0) < 100.0 * c.rtol);
  for (std::size_t i = 0; i + 1 < bwd.nodes.size(); ++i)
    CHECK(bwd.nodes[i].s > bwd.nodes[i + 1].s);
}

TEST_CASE("non-finite rhs output terminates with BlowUp, not an exception") {
  const Rhs nan_after_half = [](double s, std::span<const double>, std::span<double> dy) {
    dy[0] = s < 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  };
  StepControl c;
  c.s_max = 2.0;
  const Trajectory t = integrate({nan_after_half, {0.0}, 0.0, Direction::Forward}, {}, c);
  CHECK(t.termination == Termination::BlowUp);
  CHECK(t.nodes.back().s <= 0.5);
  CHECK(t.nodes.back().s > 0.4);

  // Non-finite right at the initial point: single-node BlowUp trajectory.
  const Trajectory t0 = integrate({nan_after_half, {0.0}, 0.7, Direction::Forward}, {}, c);
  CHECK(t0.termination == Termination::BlowUp);
  CHECK(t0.nodes.size() == 1);
}

TEST_CASE("finite singularity shrinks steps to underflow") {
  // y' = 1/(1-s): finite on [0,1) but not integrable past s=1; the controller
  // collapses h below h_min while every rhs sample stays finite.
  const Rhs reciprocal = [](double s, std::span<const double>, std::span<double> dy) {
    dy[0] = 1.0 / (1.0 - s);
  };
  StepControl c;
  c.s_max = 10.0;
  const Trajectory t = integrate({reciprocal, {0.0}, 0.0, Direction::Forward}, {}, c);
  CHECK(t.termination == Termination::StepUnderflow);
  CHECK(t.nodes.back().s < 1.0);
  CHECK(t.nodes.back().s > 1.0 - 1e-6);
}

TEST_CASE("guard direction filters which crossings fire") {
  StepControl c = tight();
  c.s_max = 2.0 * M_PI;
  const Guard g = [](double, std::span<const double> y) { return y[0] - 0.5; };
  const OdeProblem sine{kCosine, {0.0}, 0.0, Direction::Forward};

  // sin(s) crosses 0.5 rising at pi/6 and falling at 5pi/6.
  const EventSpec rising{g, GuardDirection::Rising, true, "rise"};
  const Trajectory tr = integrate(sine, {&rising, 1}, c);
  REQUIRE(tr.termination == Termination::EventStop);
  CHECK(tr.events.front().s == doctest::Approx(M_PI / 6).epsilon(1e-12));
  CHECK(tr.events.front().guard_slope > 0.0);

  const EventSpec falling{g, GuardDirection::Falling, true, "fall"};
  const Trajectory tf = integrate(sine, {&falling, 1}, c);
  REQUIRE(tf.termination == Termination::EventStop);
  CHECK(tf.events.front().s == doctest::Approx(5.0 * M_PI / 6).epsilon(1e-12));
  CHECK(tf.events.front().guard_slope < 0.0);

  const EventSpec any{g, GuardDirection::Any, false, "any"};
  const Trajectory ta = integrate(sine, {&any, 1}, c);
  CHECK(ta.termination == Termination::ReachedBound);
  REQUIRE(ta.events.size() == 2);
  CHECK(ta.events[0].s == doctest::Approx(M_PI / 6).epsilon(1e-12));
  CHECK(ta.events[1].s == doctest::Approx(5.0 * M_PI / 6).epsilon(1e-12));
}

TEST_CASE("a terminal event truncates later events but keeps earlier ones") {
  StepControl c = tight();
  c.s_max = 2.0 * M_PI;
  const EventSpec lower{[](double, std::span<const double> y) { return y[0] - 0.4; },
                        GuardDirection::Any, false, "lower"};
  const EventSpec upper{[](double, std::span<const double> y) { return y[0] - 0.5; },
                        GuardDirection::Rising, true, "upper"};
  const EventSpec specs[] = {lower, upper};
  const Trajectory t = integrate({kCosine, {0.0}, 0.0, Direction::Forward}, specs, c);
  REQUIRE(t.termination == Termination::EventStop);
  REQUIRE(t.events.size() == 2);
  CHECK(t.events[0].event_index == 0);
  CHECK(t.events[0].s == doctest::Approx(std::asin(0.4)).epsilon(1e-12));
  CHECK(t.events[1].event_index == 1);
  CHECK(t.events[1].s == doctest::Approx(M_PI / 6).epsilon(1e-12));
  REQUIRE(t.stop_event.has_value());
  CHECK(*t.stop_event == 1);
  CHECK(t.nodes.back().s == t.events[1].s);
}

TEST_CASE("starting exactly on a guard zero does not fire the event") {
  StepControl c = tight();
  c.s_max = 1.0;
  const EventSpec at_zero{[](double, std::span<const double> y) { return y[0]; },
                          GuardDirection::Any, true, "origin"};
  const Rhs up = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; };
  const Trajectory t = integrate({up, {0.0}, 0.0, Direction::Forward}, {&at_zero, 1}, c);
  CHECK(t.termination == Termination::ReachedBound);
  CHECK(t.events.empty());
}

TEST_CASE("dense output samples between nodes") {
  StepControl c = tight();
  c.s_max = 1.0;
  const Trajectory t = integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, c);
  for (double s : {0.125, 0.5, 0.777}) {
    const std::vector<double> v = sample(t, s);
    CHECK(std::fabs(v[0] - std::exp(s)) < 1e-10);
  }
  CHECK(sample(t, 0.0)[0] == 1.0);
}

TEST_CASE("malformed problems are rejected") {
  StepControl c;
  CHECK_THROWS_AS(integrate({Rhs{}, {1.0}, 0.0, Direction::Forward}, {}, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate({kExpGrowth, {}, 0.0, Direction::Forward}, {}, c),
                  std::invalid_argument);
  StepControl bad = c;
  bad.rtol = 0.0;
  CHECK_THROWS_AS(integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, bad),
                  std::invalid_argument);
  bad = c;
  bad.atol = -1.0;
  CHECK_THROWS_AS(integrate({kExpGrowth, {1.0}, 0.0, Direction::Forward}, {}, bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample(Trajectory{}, 0.0), std::invalid_argument);
}
