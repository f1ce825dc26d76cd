#pragma once

#include <cstdint>
#include <string>

namespace sketchpinv::flops {

// Closed-form operation counts for one iteration of each method. A
// multiply-add counts as 2 flops, gathering columns or rows of A is free, and
// the pseudoinverse of a tau x tau PSD Gram matrix is charged 14 tau^3.
//
// Dimensions: A is m x n, tau is the sketch width. SAXAS methods use the
// square symmetric n x n case.

using Count = std::int64_t;

Count pinv_psd(Count tau);

/// SATAX with a column-selection sketch (uniform tau-batch).
Count satax_selection(Count m, Count n, Count tau);
/// SATAX with an explicit sketch S = X_k I_{:C}: adds the dense product A S.
Count satax_adaptive(Count m, Count n, Count tau);

Count saxas_selection(Count n, Count tau);
Count saxas_adaptive(Count n, Count tau);

Count project(Count m, Count n, Count tau);
Count sax(Count m, Count n, Count tau);
Count xa(Count m, Count n, Count tau);

/// Newton-Schulz: X A X with the cheaper association, 4 m n min(m, n).
Count newton_schulz(Count m, Count n);

/// X0 = alpha A^T (SATAX family and Newton-Schulz start).
Count init_scaled_transpose(Count m, Count n);
/// X0 = A^2 / ||A||_F^2.
Count init_scaled_square(Count n);
/// Hybrid switch: X_t <- X_t / ||X_t A||_F.
Count hybrid_normalization(Count m, Count n);

/// Human-readable statement of every formula above.
std::string explain();

}  // namespace sketchpinv::flops
