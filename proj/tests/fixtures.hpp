#pragma once

// The 2x2 incompleteness counterexample kernel: orthogonal as a cyclic
// operator but not expressible in the vertical-then-horizontal projector
// form, because A_1 A_2^T != 0. Stored in the grid layout
// [[A_1, A_2], [A_3, A_4]].

#include "orthoconv/kernel.hpp"
#include "orthoconv/matrix.hpp"

namespace fixtures {

inline orthoconv::conv::Kernel2D incomplete_2d_kernel() {
    using orthoconv::Matrix;
    const Matrix a1{{0.5, 0.0}, {-0.5, 0.0}};
    const Matrix a2{{0.5, 0.0}, {0.5, 0.0}};
    const Matrix a3{{0.0, -0.5}, {0.0, 0.5}};
    const Matrix a4{{0.0, 0.5}, {0.0, 0.5}};
    return orthoconv::conv::make_kernel2d(2, 2, 2, 2, {a1, a2, a3, a4});
}

/// The generating projectors named in the counterexample discussion.
inline orthoconv::Matrix incomplete_p() {
    return orthoconv::Matrix{{1.0, 0.0}, {0.0, 0.0}};
}

inline orthoconv::Matrix incomplete_q() {
    return orthoconv::Matrix{{0.5, -0.5}, {-0.5, 0.5}};
}

} // namespace fixtures
