#pragma once

#include <Eigen/Dense>

namespace reco {

// Row-major so that rows (samples, embeddings) are contiguous and the
// on-disk layouts can be written straight from memory.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace reco
