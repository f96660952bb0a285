#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "fracrd/error.hpp"

namespace fracrd::detail {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const std::vector<std::size_t>& shape, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    std::vector<int> n;
    for (auto s : shape) {
      n.push_back(static_cast<int>(s));
      total *= s;
    }
    // FFTW_ESTIMATE leaves the buffer untouched and gives a schedule that does
    // not depend on timing measurements.
    auto* buf = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (plan == nullptr) throw Error("fft: FFTW failed to create a plan");
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<std::complex<double>> data, const std::vector<std::size_t>& shape, int sign) {
  fftw_plan plan = cache().get(shape, sign);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace

void fft_forward(std::span<std::complex<double>> data, const std::vector<std::size_t>& shape) {
  execute(data, shape, FFTW_FORWARD);
}

void fft_inverse(std::span<std::complex<double>> data, const std::vector<std::size_t>& shape) {
  execute(data, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace fracrd::detail
