#include "sketchpinv/flops.hpp"

#include <algorithm>

namespace sketchpinv::flops {

Count pinv_psd(Count tau) { return 14 * tau * tau * tau; }

Count satax_selection(Count m, Count n, Count tau) {
  // W = A^T (A S)           2 m n tau
  // G = W^T W               2 n tau^2
  // P = G^+                 14 tau^3
  // V = W^T X - (A S)^T     2 tau n m + tau m
  // P V                     2 tau^2 m
  // X - W (P V)             2 n tau m + n m
  return 6 * m * n * tau + 2 * n * tau * tau + pinv_psd(tau) + 2 * tau * tau * m + tau * m + n * m;
}

Count satax_adaptive(Count m, Count n, Count tau) { return satax_selection(m, n, tau) + 2 * m * n * tau; }

Count saxas_selection(Count n, Count tau) {
  // M = A S (gather), G = M^T M         2 n tau^2
  // P = G^+                             14 tau^3
  // C = (M^T X) M                       2 tau n^2 + 2 tau^2 n
  // B = S^T A S - C                     tau^2
  // core = P B P                        4 tau^3
  // X + (M core) M^T                    2 n tau^2 + 2 n^2 tau + n^2
  return 4 * n * n * tau + 6 * n * tau * tau + pinv_psd(tau) + 4 * tau * tau * tau + tau * tau + n * n;
}

Count saxas_adaptive(Count n, Count tau) { return saxas_selection(n, tau) + 2 * n * n * tau; }

Count project(Count m, Count /*n*/, Count tau) {
  // M = A S (gather), G = M^T M         2 m tau^2
  // P = G^+                             14 tau^3
  // D = X M - M                         2 m^2 tau + m tau
  // X - (D P) M^T                       2 m tau^2 + 2 m^2 tau + m^2
  return 4 * m * m * tau + 4 * m * tau * tau + pinv_psd(tau) + m * tau + m * m;
}

Count sax(Count m, Count n, Count tau) {
  // W = A^T S (gather rows), G = W^T W  2 n tau^2
  // P = G^+                             14 tau^3
  // V = W^T X - S^T                     2 tau n m + tau
  // X - W (P V)                         2 tau^2 m + 2 n tau m + n m
  return 4 * m * n * tau + 2 * n * tau * tau + pinv_psd(tau) + tau + 2 * tau * tau * m + n * m;
}

Count xa(Count m, Count n, Count tau) {
  // M = A S (gather), G = M^T M         2 m tau^2
  // P = G^+                             14 tau^3
  // D = X M - S                         2 n m tau + tau
  // X - (D P) M^T                       2 n tau^2 + 2 n tau m + n m
  return 4 * m * n * tau + 2 * m * tau * tau + pinv_psd(tau) + tau + 2 * n * tau * tau + n * m;
}

Count newton_schulz(Count m, Count n) { return 4 * m * n * std::min(m, n); }

Count init_scaled_transpose(Count m, Count n) {
  // ||A||_F^2 then alpha A^T
  return 3 * m * n;
}

Count init_scaled_square(Count n) {
  // A A, ||A||_F^2, scaling
  return 2 * n * n * n + 3 * n * n;
}

Count hybrid_normalization(Count m, Count n) {
  // X_t A (n x n), its Frobenius norm, scaling of X_t
  return 2 * m * n * n + 2 * n * n + m * n;
}

std::string explain() {
  return R"(Flop model (A is m x n, tau = sketch width, multiply-add = 2 flops,
gathering rows/columns of A = 0 flops, pinv of a tau x tau PSD matrix = 14 tau^3)

  satax (selection sketch)  6 m n tau + 2 n tau^2 + 14 tau^3 + 2 m tau^2 + m tau + m n
  satax (adaptive sketch)   satax (selection) + 2 m n tau          [dense A S]
  saxas (selection, n x n)  4 n^2 tau + 6 n tau^2 + 18 tau^3 + tau^2 + n^2
  saxas (adaptive)          saxas (selection) + 2 n^2 tau          [dense A S]
  project                   4 m^2 tau + 4 m tau^2 + 14 tau^3 + m tau + m^2
  sax (full row rank)       4 m n tau + 2 n tau^2 + 2 m tau^2 + 14 tau^3 + tau + m n
  xa (full column rank)     4 m n tau + 2 m tau^2 + 2 n tau^2 + 14 tau^3 + tau + m n
  newton-schulz             4 m n min(m, n)

One-time costs, charged to iteration 0 or to the hybrid switch:
  X0 = alpha A^T            3 m n
  X0 = A^2 / ||A||_F^2      2 n^3 + 3 n^2
  X0 = 0                    0
  X_t / ||X_t A||_F         2 m n^2 + 2 n^2 + m n

Residual evaluations ||AXA - A||_F and oracle errors are not counted, and
wall time excludes them as well.
)";
}

}  // namespace sketchpinv::flops
