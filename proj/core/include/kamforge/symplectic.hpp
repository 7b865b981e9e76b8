#pragma once

#include <array>

namespace kamforge::symplectic {

// Yoshida's sixth-order composition (solution A) of the second-order
// leapfrog. w0 is fixed by consistency: w0 + 2 (w1 + w2 + w3) = 1.
inline constexpr double kW1 = -1.17767998417887100695;
inline constexpr double kW2 = 0.235573213359358133684;
inline constexpr double kW3 = 0.784513610477557263819;
inline constexpr double kW0 = 1.0 - 2.0 * (kW1 + kW2 + kW3);
inline constexpr std::array<double, 7> kSixthOrder = {kW3, kW2, kW1, kW0, kW1, kW2, kW3};

/// One step of size h for H = T(p) + V(q, t) in extended phase space.
/// drift(a) advances q and t by a; kick(a) advances p by a at the current (q, t).
template <class Drift, class Kick>
void leapfrog(double h, Drift&& drift, Kick&& kick) {
  drift(0.5 * h);
  kick(h);
  drift(0.5 * h);
}

template <class Drift, class Kick>
void sixth_order_step(double h, Drift&& drift, Kick&& kick) {
  // Adjacent half drifts are merged.
  double pending = 0.0;
  for (double w : kSixthOrder) {
    pending += 0.5 * w * h;
    drift(pending);
    kick(w * h);
    pending = 0.5 * w * h;
  }
  drift(pending);
}

}  // namespace kamforge::symplectic
