#include "ymlens/ode.hpp"

#include <algorithm>
#include <cmath>

namespace ymlens::ode {

namespace {

// Dormand-Prince 5(4) tableau with the 5th-order dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Stepper {
  const Rhs& rhs;
  Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err_vec;

  explicit Stepper(const Rhs& f, int dim) : rhs(f) {
    for (Vec* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp, &ynew, &err_vec})
      v->resize(dim);
  }

  // Attempts one step of size h from (t, y); k1 must hold rhs(t, y).
  // Returns the scaled error norm; ynew/k7 are filled.
  double attempt(double t, const Vec& y, double h, double rtol, double atol) {
    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, ynew, k7);
    err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = err_vec[i] / sc;
      sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(y.size()));
  }

  DenseStep dense(double t, const Vec& y, double h) const {
    DenseStep step;
    step.t0 = t;
    step.h = h;
    step.cont.resize(5);
    const Vec ydiff = ynew - y;
    step.cont[0] = y;
    step.cont[1] = ydiff;
    step.cont[2] = h * k1 - ydiff;
    step.cont[3] = ydiff - h * k7 - step.cont[2];
    step.cont[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    return step;
  }
};

}  // namespace

Vec DensePath::eval(double t) const {
  if (steps_.empty()) throw NumericsError("empty trajectory");
  const double slack = 1e-12 * (1.0 + std::abs(t_end_));
  if (t < steps_.front().t0 - slack || t > t_end_ + slack)
    throw NumericsError("dense evaluation outside the integrated span");
  t = std::clamp(t, steps_.front().t0, t_end_);
  // Binary search for the covering step.
  std::size_t lo = 0, hi = steps_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (steps_[mid].t0 <= t)
      lo = mid;
    else
      hi = mid - 1;
  }
  const DenseStep& s = steps_[lo];
  return s.eval((t - s.t0) / s.h);
}

void DensePath::push(DenseStep step) {
  t_end_ = step.t0 + step.h;
  steps_.push_back(std::move(step));
}

void DensePath::set_end(double t, Vec y_end) {
  t_end_ = t;
  y_end_ = std::move(y_end);
}

namespace {

// Core loop shared by both entry points. `horizon` is the hard stop;
// `monitor` may be null. Calls `on_step` after each accepted step with the
// step index in the path; on_step may return a truncation time within the
// step to finish at (or a negative value to continue).
template <typename OnStep>
DensePath run(const Rhs& rhs, double t0, const Vec& y0, double horizon, const Options& opts,
              OnStep&& on_step) {
  const int dim = static_cast<int>(y0.size());
  Stepper st(rhs, dim);
  DensePath path;
  double t = t0;
  Vec y = y0;
  const double span = horizon - t0;
  if (span <= 0.0) {
    DenseStep trivial;
    trivial.t0 = t0;
    trivial.h = 1.0;
    trivial.cont.assign(5, Vec::Zero(dim));
    trivial.cont[0] = y0;
    path.push(std::move(trivial));
    path.set_end(t0, y0);
    return path;
  }
  const double max_step = opts.max_step > 0.0 ? opts.max_step : span;
  double h = std::min({opts.initial_step, span, max_step});
  rhs(t, y, st.k1);
  bool rejected_last = false;

  for (long n = 0; n < opts.max_steps; ++n) {
    if (t + h > horizon) h = horizon - t;
    if (h < 1e-14 * (1.0 + std::abs(t)))
      throw NumericsError("step size underflow (stiffness or event pile-up)");

    const double err = st.attempt(t, y, h, opts.rel_tol, opts.abs_tol);
    if (err <= 1.0) {
      path.push(st.dense(t, y, h));
      const double t_new = t + h;
      const double cut = on_step(path, t, t_new);
      if (cut >= 0.0) {
        path.set_end(cut, path.eval(cut));
        return path;
      }
      t = t_new;
      y = st.ynew;
      st.k1 = st.k7;  // FSAL
      if (t >= horizon - 1e-14 * (1.0 + std::abs(horizon))) {
        path.set_end(horizon, y);
        return path;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 10.0);
      rejected_last = false;
      h = std::min(h * fac, max_step);
    } else {
      rejected_last = true;
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      h *= fac;
    }
  }
  throw NumericsError("maximum step count exceeded");
}

}  // namespace

DensePath integrate_dense(const Rhs& rhs, double t0, const Vec& y0, double t1,
                          const Options& opts) {
  return run(rhs, t0, y0, t1, opts, [](const DensePath&, double, double) { return -1.0; });
}

EventIntegration integrate_with_event(const Rhs& rhs, double t0, const Vec& y0, double t_max,
                                      const Monitor& monitor, double event_tol,
                                      const Options& opts) {
  EventIntegration out;
  bool armed = monitor(t0, y0) < -10.0 * event_tol;
  double t_hit = -1.0;

  auto on_step = [&](const DensePath& path, double ta, double tb) -> double {
    // Sample the monitor on the dense output to bracket the first crossing.
    constexpr int kSamples = 8;
    double t_prev = ta;
    double m_prev = monitor(ta, path.eval(ta));
    for (int s = 1; s <= kSamples; ++s) {
      const double ts = ta + (tb - ta) * s / kSamples;
      const double ms = monitor(ts, path.eval(ts));
      if (!armed && ms < -10.0 * event_tol) {
        armed = true;
      } else if (armed && m_prev < 0.0 && ms >= 0.0) {
        // Bisect inside [t_prev, ts].
        double lo = t_prev, hi = ts;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double mm = monitor(mid, path.eval(mid));
          if (std::abs(mm) <= event_tol) {
            t_hit = mid;
            break;
          }
          (mm < 0.0 ? lo : hi) = mid;
          if (hi - lo < 1e-16 * (1.0 + std::abs(hi))) {
            t_hit = hi;
            break;
          }
        }
        if (t_hit < 0.0) t_hit = 0.5 * (lo + hi);
        return t_hit;
      }
      t_prev = ts;
      m_prev = ms;
    }
    return -1.0;
  };

  out.path = run(rhs, t0, y0, t_max, opts, on_step);
  if (t_hit >= 0.0) {
    out.event_hit = true;
    out.t_event = t_hit;
    out.y_event = out.path.end_state();
  } else {
    out.capped = true;
  }
  return out;
}

}  // namespace ymlens::ode
