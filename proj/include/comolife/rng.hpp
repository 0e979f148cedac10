#ifndef COMOLIFE_RNG_HPP
#define COMOLIFE_RNG_HPP

#include <array>
#include <cstdint>

namespace comolife {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC 2011). Output is a pure function of
// (counter, key), so any scenario's stream can be regenerated independently.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

// Uniform stream for one scenario: key = seed, counter = (block, scenario
// low word, scenario high word, stream tag). Each Philox block yields two
// doubles.
class ScenarioStream {
public:
    ScenarioStream(std::uint64_t seed, std::uint64_t scenario, std::uint32_t stream = 0) noexcept;

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

private:
    Philox4x32::Key key_;
    Philox4x32::Counter counter_;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

} // namespace comolife

#endif // COMOLIFE_RNG_HPP
