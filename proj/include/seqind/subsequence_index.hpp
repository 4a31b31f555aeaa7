#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqind {

/// A finite materialization of an increasing index sequence k_1 < k_2 < ...
/// along which densities are evaluated.
class SubsequenceIndex {
public:
    SubsequenceIndex() = default;

    explicit SubsequenceIndex(std::vector<std::uint64_t> checkpoints, std::string rule = {})
        : checkpoints_(std::move(checkpoints)), rule_(std::move(rule))
    {
        if (!checkpoints_.empty() && checkpoints_.front() < 1)
            throw std::invalid_argument("subsequence index: first checkpoint must be >= 1");
        for (std::size_t i = 1; i < checkpoints_.size(); ++i)
            if (checkpoints_[i] <= checkpoints_[i - 1])
                throw std::invalid_argument("subsequence index: checkpoints must be strictly increasing (position " +
                                            std::to_string(i) + ")");
    }

    [[nodiscard]] std::span<const std::uint64_t> checkpoints() const { return checkpoints_; }
    [[nodiscard]] std::size_t size() const { return checkpoints_.size(); }
    [[nodiscard]] bool empty() const { return checkpoints_.empty(); }
    [[nodiscard]] std::uint64_t operator[](std::size_t i) const { return checkpoints_[i]; }
    [[nodiscard]] std::uint64_t back() const { return checkpoints_.back(); }
    [[nodiscard]] const std::string& rule() const { return rule_; }

    /// Checkpoint k_depth, 1-based as in the usual k_N notation.
    [[nodiscard]] std::uint64_t at_depth(std::size_t depth) const
    {
        if (depth < 1 || depth > checkpoints_.size())
            throw std::out_of_range("subsequence index: depth " + std::to_string(depth) + " outside 1.." +
                                    std::to_string(checkpoints_.size()));
        return checkpoints_[depth - 1];
    }

    friend bool operator==(const SubsequenceIndex& x, const SubsequenceIndex& y)
    {
        return x.checkpoints_ == y.checkpoints_;
    }

private:
    std::vector<std::uint64_t> checkpoints_;
    std::string rule_;
};

/// k_N = N for N = 1..limit.
[[nodiscard]] inline SubsequenceIndex naturals_index(std::uint64_t limit, std::uint64_t stride = 1)
{
    std::vector<std::uint64_t> ks;
    for (std::uint64_t k = stride; k <= limit; k += stride)
        ks.push_back(k);
    return SubsequenceIndex(std::move(ks), "naturals");
}

} // namespace seqind
