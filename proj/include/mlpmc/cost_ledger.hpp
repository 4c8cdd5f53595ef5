#pragma once

#include <cstdint>

namespace mlpmc {

// Count of scalar draws consumed, the unit all cost claims are stated in.
// Merging is associative and commutative, so partial ledgers from parallel
// workers can be combined in any grouping.
struct CostLedger {
    std::uint64_t normals = 0;
    std::uint64_t uniforms = 0;
    std::uint64_t wall_ns = 0;  // 0 when not timed

    void merge(const CostLedger& other) {
        normals += other.normals;
        uniforms += other.uniforms;
        wall_ns += other.wall_ns;
    }

    [[nodiscard]] std::uint64_t total_draws() const { return normals + uniforms; }

    friend bool operator==(const CostLedger& a, const CostLedger& b) {
        return a.normals == b.normals && a.uniforms == b.uniforms;
    }
};

}  // namespace mlpmc
