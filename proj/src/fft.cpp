#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace mrqm::detail {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<Complex> circular_shift(const std::vector<Complex>& data, std::size_t width, std::size_t height,
                                    std::size_t shift_r, std::size_t shift_c) {
    std::vector<Complex> out(data.size());
    for (std::size_t r = 0; r < height; ++r) {
        const std::size_t dr = (r + shift_r) % height;
        for (std::size_t c = 0; c < width; ++c) {
            out[dr * width + (c + shift_c) % width] = data[r * width + c];
        }
    }
    return out;
}

} // namespace

void fft2(std::vector<Complex>& data, std::size_t width, std::size_t height, bool inverse) {
    auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), buffer, buffer,
                                inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(width * height);
        for (Complex& v : data) v *= scale;
    }
}

std::vector<Complex> fftshift(const std::vector<Complex>& data, std::size_t width, std::size_t height) {
    return circular_shift(data, width, height, height / 2, width / 2);
}

std::vector<Complex> ifftshift(const std::vector<Complex>& data, std::size_t width, std::size_t height) {
    return circular_shift(data, width, height, height - height / 2, width - width / 2);
}

} // namespace mrqm::detail
