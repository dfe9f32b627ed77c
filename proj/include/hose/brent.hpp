#pragma once

#include <cmath>
#include <functional>

namespace hose {

struct BrentResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Derivative-free minimization of f on [lo, hi] by Brent's method
/// (golden-section steps with parabolic interpolation when safe). Stops when
/// the bracket shrinks below the absolute tolerance or the evaluation budget
/// runs out; returns the best point seen.
inline BrentResult brent_minimize(const std::function<double(double)>& f, double lo,
                                  double hi, double tol_abs, int max_evals) {
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  int evals = 1;
  double d = 0.0, e = 0.0;

  while (evals < max_evals) {
    const double m = 0.5 * (a + b);
    const double tol = tol_abs + 1e-12 * std::abs(x);
    const double t2 = 2.0 * tol;
    if (std::abs(x - m) <= t2 - 0.5 * (b - a)) break;

    double p = 0.0, q = 0.0, r = 0.0;
    if (std::abs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) {
        p = -p;
      } else {
        q = -q;
      }
      r = e;
      e = d;
    }

    if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
      // Parabolic step.
      d = p / q;
      const double u = x + d;
      if (u - a < t2 || b - u < t2) d = x < m ? tol : -tol;
    } else {
      // Golden-section step into the larger half.
      e = x < m ? b - x : a - x;
      d = golden * e;
    }

    const double u = x + (std::abs(d) >= tol ? d : (d > 0.0 ? tol : -tol));
    const double fu = f(u);
    ++evals;

    if (fu <= fx) {
      if (u < x) {
        b = x;
      } else {
        a = x;
      }
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

}  // namespace hose
