// Compares the OpenMP kernels against their serial reference
// implementations: assembly, derivative assembly and the Dirichlet sum.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "speclab/perturbation.hpp"
#include "speclab/rng.hpp"

using namespace speclab;
using clk = std::chrono::steady_clock;

namespace {

template <typename F> double time_ms(F &&f, int reps) {
    // warmup
    f();
    const auto t0 = clk::now();
    for (int r = 0; r < reps; ++r) f();
    return std::chrono::duration<double, std::milli>(clk::now() - t0).count() / reps;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled\n");
#endif

    const auto base = build_torus(24, 24, 2.0 * M_PI, 2.0 * M_PI);
    const auto conn = random_connection(base, 3, 7, 0.5);
    const auto field = random_skew_field(base, 3, 11, 1.0);
    DiscreteSection u = make_section(base, 3);
    Xoshiro256 rng(3);
    for (long i = 0; i < u.values.size(); ++i) u.values[i] = rng.next_normal();

    const int reps = 10;
    const double asm_par = time_ms([&] { assemble_laplacian(base, conn); }, reps);
    const double asm_ser = time_ms([&] { assemble_laplacian_serial(base, conn); }, reps);
    const double der_par = time_ms([&] { laplacian_derivative(base, conn, field); }, reps);
    const double der_ser = time_ms([&] { laplacian_derivative_serial(base, conn, field); }, reps);
    const double dir_par = time_ms([&] { dirichlet_energy(base, conn, u); }, reps);

    const double drift = (assemble_laplacian(base, conn).matrix -
                          assemble_laplacian_serial(base, conn).matrix)
                             .cwiseAbs()
                             .maxCoeff();

    std::printf("kernel                 parallel      serial     speedup\n");
    std::printf("assemble_laplacian   %8.3f ms %8.3f ms   %6.2fx\n", asm_par, asm_ser,
                asm_ser / asm_par);
    std::printf("laplacian_derivative %8.3f ms %8.3f ms   %6.2fx\n", der_par, der_ser,
                der_ser / der_par);
    std::printf("dirichlet_energy     %8.3f ms\n", dir_par);
    std::printf("parallel-vs-serial assembly drift: %g\n", drift);
    return drift == 0.0 ? 0 : 1;
}
