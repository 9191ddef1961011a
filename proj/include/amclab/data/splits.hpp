// Train/validation/adaptation splits: stratified 80/20 on the source domain,
// 50/50 on the target domain (unlabeled-adaptation vs held-out evaluation).
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "amclab/common.hpp"
#include "amclab/data/dataset.hpp"

namespace amclab::data {

struct SplitPlan {
    std::vector<std::size_t> source_train, source_val;
    std::vector<std::size_t> target_unlabeled, target_eval;
    std::uint64_t seed = 0;
};

inline SplitPlan make_splits(const Dataset& source, const Dataset& target, std::uint64_t seed) {
    if (source.size() == 0 || target.size() == 0)
        throw std::invalid_argument("make_splits: empty dataset");

    const std::size_t n_classes = label_names().size();
    std::vector<std::vector<std::size_t>> src_by_class(n_classes), tgt_by_class(n_classes);
    for (std::size_t i = 0; i < source.size(); ++i)
        src_by_class[static_cast<std::size_t>(source.labels[i])].push_back(i);
    for (std::size_t i = 0; i < target.size(); ++i)
        tgt_by_class[static_cast<std::size_t>(target.labels[i])].push_back(i);
    for (std::size_t c = 0; c < n_classes; ++c)
        if (src_by_class[c].empty())
            throw std::invalid_argument("make_splits: class " + decode_label(static_cast<int>(c)) +
                                        " absent from source");

    SplitPlan plan;
    plan.seed = seed;
    Rng src_rng(derive_seed(seed, 11));
    Rng tgt_rng(derive_seed(seed, 12));

    for (std::size_t c = 0; c < n_classes; ++c) {
        auto idx = src_by_class[c];
        src_rng.shuffle(idx);
        const std::size_t n_val = idx.size() / 5;  // 20%, rounded down
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_val ? plan.source_val : plan.source_train).push_back(idx[k]);
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto idx = tgt_by_class[c];
        tgt_rng.shuffle(idx);
        // 50/50; an odd count sends the extra sample to the unlabeled half.
        const std::size_t n_eval = idx.size() / 2;
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_eval ? plan.target_eval : plan.target_unlabeled).push_back(idx[k]);
    }

    std::sort(plan.source_train.begin(), plan.source_train.end());
    std::sort(plan.source_val.begin(), plan.source_val.end());
    std::sort(plan.target_unlabeled.begin(), plan.target_unlabeled.end());
    std::sort(plan.target_eval.begin(), plan.target_eval.end());
    return plan;
}

}  // namespace amclab::data
