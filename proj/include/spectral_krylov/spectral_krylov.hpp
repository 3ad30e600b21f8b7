#pragma once

// Umbrella header for the spectral-krylov library: block Krylov eigensolvers
// for the rightmost eigenvalues of large nonsymmetric matrices, with
// SVD-stabilized adaptive biorthogonalization and Chebyshev-filtered
// explicit restarts.

#include "spectral_krylov/core/dense_matrix.hpp"
#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/lu.hpp"
#include "spectral_krylov/core/qr.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/core/sparse_csr.hpp"
#include "spectral_krylov/core/svd.hpp"

#include "spectral_krylov/eig/eig_dense.hpp"
#include "spectral_krylov/eig/francis.hpp"
#include "spectral_krylov/eig/hessenberg.hpp"

#include "spectral_krylov/lanczos/block_lanczos.hpp"
#include "spectral_krylov/lanczos/block_tridiagonal.hpp"
#include "spectral_krylov/lanczos/ritz.hpp"

#include "spectral_krylov/chebyshev/ellipse.hpp"
#include "spectral_krylov/chebyshev/filter.hpp"

#include "spectral_krylov/driver/config.hpp"
#include "spectral_krylov/driver/solver.hpp"

#include "spectral_krylov/problems/generators.hpp"
#include "spectral_krylov/problems/matrix_market.hpp"
