#pragma once

#include <array>
#include <cstdint>

namespace toposdf::mc {

// Cube corners: 0 (0,0,0) 1 (1,0,0) 2 (1,1,0) 3 (0,1,0)
//               4 (0,0,1) 5 (1,0,1) 6 (1,1,1) 7 (0,1,1)
// Edges: 0 0-1, 1 1-2, 2 2-3, 3 3-0, 4 4-5, 5 5-6, 6 6-7, 7 7-4,
//        8 0-4, 9 1-5, 10 2-6, 11 3-7
// Bit i of the case index is set when corner i lies below the iso value.
extern const std::array<std::uint16_t, 256> kEdgeTable;
extern const std::array<std::array<std::int8_t, 16>, 256> kTriTable;

inline constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

inline constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4},
    {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

}  // namespace toposdf::mc
