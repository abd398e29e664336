#include <atomic>
#include <cstdlib>
#include <string>

#include "sheetlight/core/error.hpp"
#include "sheetlight/simd/kernels.hpp"

namespace sheetlight::simd {

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("SHEETLIGHT_SIMD"); env && std::string(env) == "scalar") return Isa::scalar;
    return detected_isa();
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(SHEETLIGHT_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) throw InvalidParameter("SIMD target not supported on this CPU: " + std::string(isa_name(isa)));
    active().store(isa, std::memory_order_relaxed);
}

#if defined(SHEETLIGHT_HAVE_AVX2)
#define SHEETLIGHT_DISPATCH(fn, ...) \
    return active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define SHEETLIGHT_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    SHEETLIGHT_DISPATCH(shadow_insert, rgb, s, k);
}

void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    SHEETLIGHT_DISPATCH(shadow_remove, rgb, s, k);
}

void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max) {
    SHEETLIGHT_DISPATCH(reshade, rgb, refl_src, refl_tgt, ambient_src, ambient_tgt, strength, gain_min, gain_max);
}

void axpy(float a, std::span<const float> x, std::span<float> y) { SHEETLIGHT_DISPATCH(axpy, a, x, y); }

double sum_squared_diff(std::span<const float> a, std::span<const float> b) {
    SHEETLIGHT_DISPATCH(sum_squared_diff, a, b);
}

#undef SHEETLIGHT_DISPATCH

}  // namespace sheetlight::simd
