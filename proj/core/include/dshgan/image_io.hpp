#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dshgan/datasets.hpp"

namespace dshgan {

// Tiles images row-major into a grid with a 1-pixel separator and writes a
// binary PPM (P6). Pixels in [-1, 1] map linearly to [0, 255]; single-channel
// images are written as gray.
void write_ppm_grid(const std::filesystem::path& path,
                    std::span<const std::vector<double>> images, const ImageShape& shape,
                    std::size_t columns, std::size_t scale = 4);

}  // namespace dshgan
