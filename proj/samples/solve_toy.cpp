// Reads an SDPA file (default: toy.dat-s next to this source), solves it at tau = 1.9 and prints the result.

#include <cstdio>

#include "ipadmm/apps/sdp.hpp"
#include "ipadmm/io/sdpa.hpp"

int main(int argc, char** argv) {
    using namespace ipadmm;
    const std::string path = argc > 1 ? argv[1] : SAMPLES_DIR "/toy.dat-s";
    SdpInstance inst = to_instance(read_sdpa_file(path));
    ADMMConfig cfg;
    cfg.tau = 1.9;
    cfg.stop_tol = 1e-8;
    SdpSolution s = solve_sdp(inst, cfg);
    std::printf("%s: %d iterations, eta_max %.2e, <C,X> %.8f, <b,z> %.8f\n", path.c_str(), s.iterations, s.eta.max,
                s.primal_obj, s.dual_obj);
    Mat X = block_smat(inst.blocks, s.X);
    std::printf("X =\n");
    for (int i = 0; i < X.rows(); ++i) {
        for (int j = 0; j < X.cols(); ++j) std::printf(" %10.6f", X(i, j));
        std::printf("\n");
    }
    return s.converged ? 0 : 2;
}
