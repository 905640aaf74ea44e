#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace besovwf::detail {
namespace {

class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int dim, std::size_t n, int sign)
    {
        const auto key = std::make_tuple(dim, n, sign);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        // Planning needs scratch arrays; FFTW_UNALIGNED lets execute_dft run on any buffer.
        const std::size_t total = dim == 1 ? n : n * n;
        auto* scratch = fftw_alloc_complex(total);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const int fsign = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan plan = dim == 1
            ? fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, fsign, flags)
            : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), scratch, scratch, fsign, flags);
        fftw_free(scratch);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache instance;
    return instance;
}

}  // namespace

void dft_inplace(std::span<cplx> data, const GridSpec& spec, int sign)
{
    fftw_plan plan = cache().get(spec.dim, spec.n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace besovwf::detail
