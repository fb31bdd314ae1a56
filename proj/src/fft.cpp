#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace bellforge::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void scale_lines(std::span<std::complex<double>> data, std::size_t outer, std::size_t n,
                 std::size_t inner, double even, double odd) {
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t j = 0; j < n; ++j) {
      const double f = (j % 2 == 0) ? even : odd;
      auto* line = data.data() + (o * n + j) * inner;
      for (std::size_t i = 0; i < inner; ++i) line[i] *= f;
    }
}

}  // namespace

void centered_dft(std::span<std::complex<double>> data, std::span<const std::size_t> shape,
                  std::size_t axis, int sign, double scale) {
  if (axis >= shape.size()) throw std::out_of_range("centered_dft: axis out of range");
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= shape[k];
  for (std::size_t k = axis + 1; k < shape.size(); ++k) inner *= shape[k];
  const std::size_t n = shape[axis];
  if (n % 2 != 0) throw std::invalid_argument("centered_dft: axis length must be even");
  if (outer * inner * n != data.size()) throw std::invalid_argument("centered_dft: shape mismatch");

  // Centering: (-1)^j before, (-1)^k (-1)^(n/2) after.
  scale_lines(data, outer, n, inner, 1.0, -1.0);

  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  const int len = static_cast<int>(n);
  const int howmany = static_cast<int>(inner);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_many_dft(1, &len, howmany, raw, nullptr, howmany, 1, raw, nullptr, howmany, 1,
                              sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (plan == nullptr) throw std::runtime_error("centered_dft: FFTW planning failed");
  for (std::size_t o = 0; o < outer; ++o) {
    auto* line = raw + o * n * inner;
    fftw_execute_dft(plan, line, line);
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double global = ((n / 2) % 2 == 1) ? -scale : scale;
  scale_lines(data, outer, n, inner, global, -global);
}

}  // namespace bellforge::detail
