#include "ddotfs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace ddotfs {
namespace {

std::mutex g_plan_mutex;

fftw_plan plan_for(int n, bool inverse) {
  static std::map<std::pair<int, bool>, fftw_plan> cache;
  std::lock_guard lock(g_plan_mutex);
  auto key = std::make_pair(n, inverse);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  CVec scratch(static_cast<std::size_t>(n));
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void fft_inplace(std::span<cd> data, bool inverse) {
  if (data.size() <= 1) return;
  fftw_plan plan = plan_for(static_cast<int>(data.size()), inverse);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace ddotfs
