#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace mlpmc::rng {

// Label of one member of the family of independent random inputs.
// A child (theta, j, m) appends (j, m), so theta stays a strict prefix of
// every index in its subtree and distinct nodes never share a label.
class MultiIndex {
public:
    MultiIndex() : elems_{0} {}
    MultiIndex(std::initializer_list<std::int64_t> e) : elems_(e) {}
    explicit MultiIndex(std::vector<std::int64_t> e) : elems_(std::move(e)) {}

    [[nodiscard]] MultiIndex child(std::int64_t j, std::int64_t m) const {
        std::vector<std::int64_t> e = elems_;
        e.push_back(j);
        e.push_back(m);
        return MultiIndex(std::move(e));
    }

    [[nodiscard]] const std::vector<std::int64_t>& elements() const { return elems_; }
    [[nodiscard]] std::size_t size() const { return elems_.size(); }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
        return a.elems_ == b.elems_;
    }

private:
    std::vector<std::int64_t> elems_;
};

enum class Channel : std::uint32_t {
    brownian = 1,  // the W family
    index = 2,     // the R family
};

struct StreamKey {
    std::uint64_t seed = 0;
    MultiIndex index;
    Channel channel = Channel::brownian;
};

}  // namespace mlpmc::rng
