#pragma once

#include "fflab/brute.hpp"

namespace oracle {

using namespace fflab;
using namespace fflab::brute;

inline FqPtr field(std::uint32_t q) {
    switch (q) {
        case 4: return Fq::make({2, 2, {1, 1, 1}});
        case 8: return Fq::make({2, 3, {1, 1, 0, 1}});
        case 9: return Fq::make({3, 2, {1, 0, 1}});
        default: return Fq::prime(q);
    }
}

}  // namespace oracle
