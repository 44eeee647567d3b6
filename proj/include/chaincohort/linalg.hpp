#ifndef CHAINCOHORT_LINALG_HPP
#define CHAINCOHORT_LINALG_HPP

#include <Eigen/Core>

namespace chaincohort {

using Scalar = double;

// DYNAMIC VECTORS AND MATRICES
using Vec = Eigen::VectorX<Scalar>;
using Mat = Eigen::MatrixX<Scalar>;
using VecI = Eigen::VectorX<Eigen::Index>;

}  // namespace chaincohort

#endif  // CHAINCOHORT_LINALG_HPP
