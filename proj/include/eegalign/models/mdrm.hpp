#pragma once

#include <map>
#include <span>
#include <vector>

#include "eegalign/spd.hpp"

namespace eegalign::models {

using spd::SPDMatrix;

/// Minimum distance to Riemannian mean classifier.
struct MDRMModel {
    std::map<int, SPDMatrix> class_means;
    std::vector<int> unconverged_classes;  // means that hit max_iter; the last iterate is kept
};

MDRMModel mdrm_fit(std::span<const SPDMatrix> covs, std::span<const int> labels,
                   spd::MeanOptions mean_options = {});

/// Class whose mean is closest in geodesic distance; ties go to the smallest
/// class id.
int mdrm_predict(const SPDMatrix& cov, const MDRMModel& model);

std::vector<int> mdrm_predict(std::span<const SPDMatrix> covs, const MDRMModel& model);

}  // namespace eegalign::models
