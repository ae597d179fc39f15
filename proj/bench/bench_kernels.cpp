// Kernel benchmark: serial reference loops vs the production path
// (im2col+GEMM convolutions, OpenMP pointwise ops) on layer shapes taken
// from the 256-input preset. Run with --quick for a fast pass.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "shht/kernels.hpp"
#include "shht/rng.hpp"

using namespace shht;

namespace {

using clock_type = std::chrono::steady_clock;

Tensor randu(int n, int h, int w, int c, std::uint64_t seed, double mag = 1.0) {
    Rng rng(seed);
    Tensor t(n, h, w, c);
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-mag, mag));
    return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warmup
    const auto t0 = clock_type::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

struct ConvCase {
    const char* name;
    int h, w, cin, cout, k, stride, pad;
};

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    }

    const ConvCase cases[] = {
        {"stem 64x64x4->16", 64, 64, 4, 16, 3, 1, 1},
        {"enc 64x64x16->16", 64, 64, 16, 16, 3, 1, 1},
        {"mid 16x16x64->64", 16, 16, 64, 64, 3, 1, 1},
        {"deep 4x4x256->256", 4, 4, 256, 256, 3, 1, 1},
        {"down 32x32x32->32 s2", 32, 32, 32, 32, 3, 2, 1},
    };

    std::printf("%-22s %12s %12s %9s\n", "conv case", "reference", "optimized", "speedup");
    for (const ConvCase& c : cases) {
        const Tensor x = randu(quick ? 1 : 4, c.h, c.w, c.cin, 1);
        const Tensor w = randu(c.k, c.k, c.cin, c.cout, 2, 0.2);
        const Tensor b = randu(1, 1, 1, c.cout, 3, 0.1);
        const int reps = quick ? 2 : 10;
        const double t_ref = time_ms([&] { auto y = ref::conv2d(x, w, b, c.stride, c.pad); }, reps);
        const double t_opt =
            time_ms([&] { auto y = kernels::conv2d(x, w, b, c.stride, c.pad); }, reps);
        std::printf("%-22s %9.3f ms %9.3f ms %8.1fx\n", c.name, t_ref, t_opt, t_ref / t_opt);
    }

    std::printf("\n%-22s %12s %12s %9s\n", "pointwise case", "reference", "optimized", "speedup");
    {
        const Tensor x = randu(quick ? 1 : 8, 64, 64, 32, 4, 2.0);
        const Tensor gamma = randu(1, 1, 1, 32, 5);
        const Tensor beta = randu(1, 1, 1, 32, 6);
        const Tensor alpha = randu(1, 1, 1, 32, 7, 0.25);
        const int reps = quick ? 3 : 20;
        {
            ref::BnStats s;
            const double t_ref =
                time_ms([&] { auto y = ref::batchnorm_train(x, gamma, beta, 1e-5, s); }, reps);
            const double t_opt =
                time_ms([&] { auto y = kernels::batchnorm_train(x, gamma, beta, 1e-5, s); }, reps);
            std::printf("%-22s %9.3f ms %9.3f ms %8.1fx\n", "batchnorm train", t_ref, t_opt,
                        t_ref / t_opt);
        }
        {
            const double t_ref = time_ms([&] { auto y = ref::prelu(x, alpha); }, reps);
            const double t_opt = time_ms([&] { auto y = kernels::prelu(x, alpha); }, reps);
            std::printf("%-22s %9.3f ms %9.3f ms %8.1fx\n", "prelu", t_ref, t_opt, t_ref / t_opt);
        }
        {
            const Tensor s4 = randu(quick ? 1 : 8, 16, 16, 128, 8);
            const double t_ref = time_ms([&] { auto y = ref::pixel_shuffle(s4, 2); }, reps);
            const double t_opt = time_ms([&] { auto y = kernels::pixel_shuffle(s4, 2); }, reps);
            std::printf("%-22s %9.3f ms %9.3f ms %8.1fx\n", "pixel shuffle", t_ref, t_opt,
                        t_ref / t_opt);
        }
    }
    return 0;
}
