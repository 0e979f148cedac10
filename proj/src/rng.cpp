#include "comolife/rng.hpp"

namespace comolife {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k) noexcept {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

Philox4x32::Counter Philox4x32::block(Counter counter, Key key) noexcept {
    counter = round(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        counter = round(counter, key);
    }
    return counter;
}

ScenarioStream::ScenarioStream(std::uint64_t seed, std::uint64_t scenario, std::uint32_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, static_cast<std::uint32_t>(scenario), static_cast<std::uint32_t>(scenario >> 32), stream} {}

double ScenarioStream::uniform() noexcept {
    if (used_ == 4) {
        buffer_ = Philox4x32::block(counter_, key_);
        ++counter_[0];
        used_ = 0;
    }
    const std::uint64_t bits =
        ((static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1]) >> 11;
    used_ += 2;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace comolife
