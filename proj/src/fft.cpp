#include "kkdre/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace kkdre::fft {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mu_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n),
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::vector<cplx> run(std::span<const cplx> x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> in(x.begin(), x.end());
  std::vector<cplx> out(n);
  if (n == 0) return out;
  fftw_execute_dft(cache().get(n, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<cplx> forward(std::span<const cplx> x) { return run(x, FFTW_FORWARD); }

std::vector<cplx> inverse(std::span<const cplx> X) {
  auto y = run(X, FFTW_BACKWARD);
  const double scale = y.empty() ? 1.0 : 1.0 / static_cast<double>(y.size());
  for (auto& v : y) v *= scale;
  return y;
}

std::vector<cplx> forward_real(std::span<const double> x) {
  std::vector<cplx> c(x.begin(), x.end());
  return forward(c);
}

}  // namespace kkdre::fft
