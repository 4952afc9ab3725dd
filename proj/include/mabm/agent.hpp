#pragma once

#include <cstdint>

namespace mabm {

enum class Strategy : std::uint8_t { Fundamentalist, Chartist };

/// One trader. `m` and `b` only matter while the agent is a chartist.
struct Agent {
    Strategy strategy = Strategy::Fundamentalist;
    int m = 30;
    double b = 1.0;
    bool active = true;
};

}  // namespace mabm
