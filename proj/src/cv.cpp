#include "aki/cv.hpp"

#include "aki/errors.hpp"

namespace aki {

std::vector<int> stratified_folds(const std::vector<std::uint8_t>& labels, int k,
                                  std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
    if (static_cast<int>(pos.size()) < k || static_cast<int>(neg.size()) < k)
        throw Error(ErrorCode::TooFewPerClass, "stratified folds need k rows per class");
    std::vector<int> fold(labels.size(), 0);
    Rng rng(seed);
    Rng rp = rng.derive("folds/pos");
    Rng rn = rng.derive("folds/neg");
    rp.shuffle(pos);
    rn.shuffle(neg);
    for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % k);
    for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % k);
    return fold;
}

} // namespace aki
