#pragma once

#include <cstdint>
#include <span>

#include "mlpmc/cost_ledger.hpp"
#include "mlpmc/kernels.hpp"
#include "mlpmc/multi_index.hpp"
#include "mlpmc/philox.hpp"

namespace mlpmc::rng {

// Collapses (seed, channel, length-prefixed index elements) into a 128-bit
// stream identity via a chained Philox compression. Keying every stream by
// its multi-index gives O(1) access to any member of the i.i.d. family with
// no coordination between workers; 128 bits keeps collisions negligible.
StreamState derive_stream_state(const StreamKey& key);

// Deterministic random stream. Single-owner: one handle is never shared
// between threads; parallel code derives one stream per multi-index instead.
// Draws are addressed by slot, so consumption is a pure function of the key
// and the requested offsets, independent of scheduling.
class RandomStream {
public:
    explicit RandomStream(const StreamKey& key) : state_(derive_stream_state(key)) {}
    explicit RandomStream(const StreamState& state) : state_(state) {}

    // One uniform draw strictly inside (0,1) at the sequential cursor.
    double next_u01() {
        ledger_.uniforms += 1;
        return u01_at_slot(cursor_++);
    }

    // Uniform draw at an explicit slot; does not move the cursor.
    double u01_at(std::uint64_t slot) {
        ledger_.uniforms += 1;
        return u01_at_slot(slot);
    }

    // Fills out with i.i.d. N(0, variance) values from sequential slots.
    // variance == 0 yields zeros but still consumes the draws, so stream
    // offsets do not depend on which branches were degenerate.
    void next_normals(std::span<double> out, double variance);

    // Same, starting at an explicit slot; does not move the cursor.
    void normals_at(std::uint64_t slot, std::span<double> out, double variance);

    [[nodiscard]] const CostLedger& ledger() const { return ledger_; }
    [[nodiscard]] const StreamState& state() const { return state_; }

private:
    double u01_at_slot(std::uint64_t slot) const {
        const PhiloxBlock blk = state_.block(slot >> 1);
        const std::uint64_t v = (slot & 1u) == 0 ? join_words(blk.w[0], blk.w[1])
                                                 : join_words(blk.w[2], blk.w[3]);
        return u01_from_bits(v);
    }

    StreamState state_;
    std::uint64_t cursor_ = 0;
    CostLedger ledger_;
};

RandomStream derive_stream(const StreamKey& key);

// d i.i.d. N(0, variance) scalars into out; ledger gains d normals even when
// variance == 0. Throws std::domain_error for negative variance.
void sample_gaussian_increment(RandomStream& stream, std::span<double> out, double variance);

double sample_uniform(RandomStream& stream);

}  // namespace mlpmc::rng
