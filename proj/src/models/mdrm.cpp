#include "eegalign/models/mdrm.hpp"

#include <limits>

#include "eegalign/error.hpp"

namespace eegalign::models {

MDRMModel mdrm_fit(std::span<const SPDMatrix> covs, std::span<const int> labels, spd::MeanOptions mean_options)
{
    if (covs.size() != labels.size())
        throw Error(ErrorKind::DimensionMismatch, "mdrm_fit: covariance and label counts differ");

    std::map<int, std::vector<SPDMatrix>> grouped;
    for (std::size_t i = 0; i < covs.size(); ++i)
        grouped[labels[i]].push_back(covs[i]);
    if (grouped.size() < 2)
        throw Error(ErrorKind::MissingClass, "mdrm_fit needs at least two classes");

    MDRMModel model;
    for (const auto& [label, members] : grouped) {
        try {
            auto mean = spd::riemannian_mean(members, mean_options);
            if (!mean.converged)
                model.unconverged_classes.push_back(label);
            model.class_means.emplace(label, std::move(mean.mean));
        } catch (const Error& e) {
            rethrow_with_context(e, "class " + std::to_string(label));
        }
    }
    return model;
}

int mdrm_predict(const SPDMatrix& cov, const MDRMModel& model)
{
    if (model.class_means.empty())
        throw Error(ErrorKind::InvalidArgument, "mdrm_predict on an empty model");
    int best = model.class_means.begin()->first;
    double best_distance = std::numeric_limits<double>::infinity();
    // std::map iterates in ascending class order, so strict < keeps the smallest id on ties.
    for (const auto& [label, mean] : model.class_means) {
        const double d = spd::riemannian_distance(cov, mean);
        if (d < best_distance) {
            best_distance = d;
            best = label;
        }
    }
    return best;
}

std::vector<int> mdrm_predict(std::span<const SPDMatrix> covs, const MDRMModel& model)
{
    std::vector<int> out;
    out.reserve(covs.size());
    for (const auto& c : covs)
        out.push_back(mdrm_predict(c, model));
    return out;
}

}  // namespace eegalign::models
