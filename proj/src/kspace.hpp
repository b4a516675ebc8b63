#pragma once

#include <vector>

#include "fft.hpp"
#include "mrqm/image.hpp"

namespace mrqm::detail {

/// Complex spatial result of the ghosting edit before the real part is taken.
std::vector<Complex> ghosting_complex(const ImageGrid& image, double intensity);

/// Complex spatial result of the stripe edit before the real part is taken.
std::vector<Complex> stripe_complex(const ImageGrid& image, double intensity);

} // namespace mrqm::detail
