#ifndef YMLENS_ODE_HPP
#define YMLENS_ODE_HPP

#include <functional>
#include <vector>

#include "ymlens/types.hpp"

namespace ymlens::ode {

using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
using Monitor = std::function<double(double t, const Vec& y)>;

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double max_step = 0.0;  // 0 = horizon
  long max_steps = 2000000;
};

// One accepted step with the 5th-order continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<Vec> cont;  // 5 coefficient vectors

  Vec eval(double theta) const {
    const double th1 = 1.0 - theta;
    return cont[0] +
           theta * (cont[1] + th1 * (cont[2] + theta * (cont[3] + th1 * cont[4])));
  }
};

class DensePath {
 public:
  double t_begin() const { return steps_.empty() ? 0.0 : steps_.front().t0; }
  double t_end() const { return t_end_; }
  bool empty() const { return steps_.empty(); }
  const std::vector<DenseStep>& steps() const { return steps_; }

  Vec eval(double t) const;

  void push(DenseStep step);
  void set_end(double t, Vec y_end);
  const Vec& end_state() const { return y_end_; }

 private:
  std::vector<DenseStep> steps_;
  double t_end_ = 0.0;
  Vec y_end_;
};

// Integrates to the fixed horizon t1; the final state is exact for t1 (last
// step shortened), dense output available over the whole span.
DensePath integrate_dense(const Rhs& rhs, double t0, const Vec& y0, double t1,
                          const Options& opts);

struct EventIntegration {
  DensePath path;
  bool event_hit = false;
  bool capped = false;   // horizon reached without event
  double t_event = 0.0;  // valid when event_hit
  Vec y_event;
};

// Integrates until the monitor crosses from negative to non-negative values.
// The crossing is bracketed on the dense output and refined by bisection until
// |monitor| <= event_tol. Monitoring only arms after the monitor has been
// observed strictly below -10*event_tol, so a start on the zero set does not
// trigger immediately.
EventIntegration integrate_with_event(const Rhs& rhs, double t0, const Vec& y0,
                                      double t_max, const Monitor& monitor,
                                      double event_tol, const Options& opts);

}  // namespace ymlens::ode

#endif
