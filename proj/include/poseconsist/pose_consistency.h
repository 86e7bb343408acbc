#pragma once

#include "poseconsist/lie.h"

namespace poseconsist {

// Estimates for the two directions between frames t and t+n.
struct PosePairEstimate {
  Twist forward;   // t → t+n
  Twist backward;  // t+n → t
  int n = 1;
};

struct TripleEstimate {
  Twist prev_to_mid;   // t−n → t
  Twist mid_to_next;   // t → t+n
  Twist prev_to_next;  // t−n → t+n
};

// d(exp(backward), exp(forward)⁻¹)
double forward_backward_loss(const PosePairEstimate& pair);

// ‖e‖₁ + ‖t‖₁ of the estimate on a duplicated frame pair.
double identity_loss(const Twist& self_estimate);

// d(exp(prev_to_next), exp(mid_to_next)·exp(prev_to_mid))
double cycle_loss(const TripleEstimate& triple);

}  // namespace poseconsist
