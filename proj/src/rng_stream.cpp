#include "mlpmc/rng_stream.hpp"

#include <cmath>
#include <stdexcept>

namespace mlpmc::rng {

namespace {

// First words of pi, the usual nothing-up-my-sleeve initialization.
constexpr std::uint32_t kInit0 = 0x243F6A88u;
constexpr std::uint32_t kInit1 = 0x85A308D3u;

std::array<std::uint32_t, 4> to_words(const PhiloxBlock& b) { return b.w; }

}  // namespace

StreamState derive_stream_state(const StreamKey& key) {
    const auto& elems = key.index.elements();
    const auto len = static_cast<std::uint32_t>(elems.size());

    // Init block binds seed, index length, and channel; the length prefix is
    // what keeps a stream and the streams of its extensions from aliasing.
    std::array<std::uint32_t, 4> h = to_words(
        philox4x32_10({static_cast<std::uint32_t>(key.seed),
                       static_cast<std::uint32_t>(key.seed >> 32), len,
                       static_cast<std::uint32_t>(key.channel)},
                      kInit0, kInit1));

    for (const std::int64_t e : elems) {
        const auto u = static_cast<std::uint64_t>(e);
        h = to_words(philox4x32_10({static_cast<std::uint32_t>(u),
                                    static_cast<std::uint32_t>(u >> 32), h[2], h[3]},
                                   h[0], h[1]));
    }
    return StreamState{h[0], h[1], h[2], h[3]};
}

RandomStream derive_stream(const StreamKey& key) { return RandomStream(key); }

void RandomStream::next_normals(std::span<double> out, double variance) {
    normals_at(cursor_, out, variance);
    cursor_ += out.size();
}

void RandomStream::normals_at(std::uint64_t slot, std::span<double> out, double variance) {
    if (variance < 0.0) throw std::domain_error("gaussian increment: negative variance");
    ledger_.normals += out.size();
    kernels::fill_u01(state_, slot, out.data(), out.size());
    kernels::normal_quantile(out.data(), out.size());
    const double scale = std::sqrt(variance);
    for (double& v : out) v *= scale;
}

void sample_gaussian_increment(RandomStream& stream, std::span<double> out, double variance) {
    stream.next_normals(out, variance);
}

double sample_uniform(RandomStream& stream) { return stream.next_u01(); }

}  // namespace mlpmc::rng
