#ifndef TSE_METRICS_HPP
#define TSE_METRICS_HPP

#include "tse/grid.hpp"

namespace tse {

/// Relative L2 error ||P - P_hat||_F / ||P||_F over all grid nodes.
/// Asymmetric: the first argument supplies the denominator.
double relative_l2(const DensityField& truth, const DensityField& estimate);

/// mean((a - b)^2) / mean(a^2); used to quantify how close two datasets are.
double relative_mse_diff(const DensityField& a, const DensityField& b);

}  // namespace tse

#endif  // TSE_METRICS_HPP
