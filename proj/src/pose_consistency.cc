#include "poseconsist/pose_consistency.h"

#include <stdexcept>

namespace poseconsist {

double forward_backward_loss(const PosePairEstimate& pair) {
  if (pair.n == 0) throw std::invalid_argument("PosePairEstimate: n must be nonzero");
  return pose_distance(exp_map(pair.backward), inverse(exp_map(pair.forward)));
}

double identity_loss(const Twist& self_estimate) {
  return self_estimate.axis_angle.cwiseAbs().sum() +
         self_estimate.translation.cwiseAbs().sum();
}

double cycle_loss(const TripleEstimate& triple) {
  const RigidPose chained =
      compose(exp_map(triple.mid_to_next), exp_map(triple.prev_to_mid));
  return pose_distance(exp_map(triple.prev_to_next), chained);
}

}  // namespace poseconsist
