#pragma once

#include <complex>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "dqlg/core_model.hpp"

namespace dqlg {

namespace detail {
// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// Unnormalized in-place DFTs of a site-major field with `components`
/// interleaved values per site. Forward uses exp(-i k x).
class LatticeFft {
public:
    LatticeFft(const LatticeSpec& lattice, int components) : sites_(lattice.sites()), components_(components) {
        std::vector<cplx> scratch(sites_ * static_cast<std::size_t>(components));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        int n[3] = {lattice.L, lattice.L, lattice.L};
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward_ = fftw_plan_many_dft(lattice.dims, n, components, buf, nullptr, components, 1, buf, nullptr,
                                      components, 1, FFTW_FORWARD, flags);
        backward_ = fftw_plan_many_dft(lattice.dims, n, components, buf, nullptr, components, 1, buf, nullptr,
                                       components, 1, FFTW_BACKWARD, flags);
        if (forward_ == nullptr || backward_ == nullptr) throw DomainError("FFTW planning failed");
    }

    LatticeFft(const LatticeFft&) = delete;
    LatticeFft& operator=(const LatticeFft&) = delete;

    LatticeFft(LatticeFft&& other) noexcept
        : sites_(other.sites_), components_(other.components_), forward_(std::exchange(other.forward_, nullptr)),
          backward_(std::exchange(other.backward_, nullptr)) {}

    ~LatticeFft() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (forward_) fftw_destroy_plan(forward_);
        if (backward_) fftw_destroy_plan(backward_);
    }

    void forward(std::vector<cplx>& data) const { run(forward_, data); }

    /// Inverse transform including the 1/sites normalization.
    void backward(std::vector<cplx>& data) const {
        run(backward_, data);
        const double scale = 1.0 / static_cast<double>(sites_);
        for (auto& v : data) v *= scale;
    }

    std::size_t sites() const { return sites_; }

private:
    void run(fftw_plan plan, std::vector<cplx>& data) const {
        if (data.size() != sites_ * static_cast<std::size_t>(components_))
            throw DomainError("FFT buffer size does not match the lattice");
        auto* buf = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, buf, buf);
    }

    std::size_t sites_;
    int components_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace dqlg
