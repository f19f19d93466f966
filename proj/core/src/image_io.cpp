#include "dshgan/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {

void write_ppm_grid(const std::filesystem::path& path,
                    std::span<const std::vector<double>> images, const ImageShape& shape,
                    std::size_t columns, std::size_t scale) {
  require(!images.empty() && columns > 0 && scale > 0, ErrorKind::kEmptyInput,
          "image grid needs at least one image");
  const std::size_t rows = (images.size() + columns - 1) / columns;
  const std::size_t cell_w = shape.width * scale + 1, cell_h = shape.height * scale + 1;
  const std::size_t width = columns * cell_w + 1, height = rows * cell_h + 1;
  std::string rgb(width * height * 3, static_cast<char>(255));
  const std::size_t plane = shape.height * shape.width;
  for (std::size_t n = 0; n < images.size(); ++n) {
    require(images[n].size() == shape.pixel_count(), ErrorKind::kShape,
            "grid image has wrong pixel count");
    const std::size_t ox = (n % columns) * cell_w + 1, oy = (n / columns) * cell_h + 1;
    for (std::size_t y = 0; y < shape.height * scale; ++y) {
      for (std::size_t x = 0; x < shape.width * scale; ++x) {
        const std::size_t src = (y / scale) * shape.width + x / scale;
        for (std::size_t c = 0; c < 3; ++c) {
          const std::size_t ch = std::min(c, shape.channels - 1);
          const double v = std::clamp(images[n][ch * plane + src], -1.0, 1.0);
          rgb[((oy + y) * width + ox + x) * 3 + c] =
              static_cast<char>(static_cast<unsigned char>(std::lround((v + 1.0) * 127.5)));
        }
      }
    }
  }
  const std::string header =
      "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  detail::write_file_bytes(path.string(), header + rgb);
}

}  // namespace dshgan
