#pragma once

// Adaptive explicit Runge-Kutta integration with event location.
//
// The stepper is the Dormand-Prince 5(4) embedded pair with a PI step-size
// controller. Accepted steps are recorded as trajectory nodes (state and
// derivative), which Hermite interpolation turns into dense output; events are
// scalar guard functions whose sign changes are located by bisection on that
// dense output until |guard| < atol.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypflow::ode {

enum class Termination {
  EventStop,       // a terminal event fired; the trajectory ends at the event
  BlowUp,          // the right-hand side or state became non-finite
  StepUnderflow,   // |h| fell below h_min (phase-space boundary reached)
  ReachedBound,    // |s - s0| reached s_max
};

enum class GuardDirection { Rising, Falling, Any };
enum class Direction { Forward, Backward };

using Rhs = std::function<void(double s, std::span<const double> state,
                               std::span<double> deriv)>;
using Guard = std::function<double(double s, std::span<const double> state)>;

struct EventSpec {
  Guard guard;
  GuardDirection direction = GuardDirection::Any;
  bool terminal = false;
  std::string name;
};

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  double s_max = 100.0;  // integration span bound, |s - s0| <= s_max
  std::size_t max_steps = 2000000;
};

struct Node {
  double s = 0.0;
  std::vector<double> state;
  std::vector<double> deriv;
};

struct EventRecord {
  double s = 0.0;
  std::vector<double> state;
  std::size_t event_index = 0;
  double guard_slope = 0.0;  // dg/ds at the located root (tangential if tiny)
};

struct Trajectory {
  std::vector<Node> nodes;    // strictly monotone in s (per direction)
  std::vector<EventRecord> events;
  Termination termination = Termination::ReachedBound;
  std::optional<std::size_t> stop_event;  // index into Trajectory::events of the stopping record
};

struct OdeProblem {
  Rhs rhs;
  std::vector<double> y0;
  double s0 = 0.0;
  Direction direction = Direction::Forward;
};

// Integrates until a terminal event, blow-up, step underflow, or the span
// bound. Throws std::invalid_argument on malformed problems or controls.
Trajectory integrate(const OdeProblem& problem, std::span<const EventSpec> events,
                     const StepControl& ctrl);

// Dense evaluation at s (cubic Hermite between the bracketing nodes; the
// endpoints extrapolate). Throws std::invalid_argument on an empty trajectory.
std::vector<double> sample(const Trajectory& t, double s);

}  // namespace hypflow::ode
