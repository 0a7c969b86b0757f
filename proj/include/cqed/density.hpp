#pragma once

#include "cqed/quantum_core.hpp"

namespace cqed {

// Hermitian unit-trace state on a truncated space of dimension dim.
struct DensityMatrix {
    DenseMatrix rho;

    DensityMatrix() = default;
    explicit DensityMatrix(DenseMatrix r) : rho(std::move(r)) {}

    int dim() const { return int(rho.rows()); }

    // hermitian to 1e-10, trace 1 +- 1e-10, min eigenvalue > -1e-8
    void check_physical(double herm_tol = 1e-10, double trace_tol = 1e-10,
                        double positivity_tol = 1e-8) const;

    // (rho + rho^dagger)/2 followed by trace normalization.
    void hermitize_and_normalize();
};

DensityMatrix ground_state(int dim);

// vec/unvec under the column-stacking convention: vec(rho) stacks the
// columns of rho, so vec(A X B) = (B^T kron A) vec(X).
DenseVector vectorize(const DenseMatrix& rho);
DenseMatrix unvectorize(const DenseVector& v, int dim);

}  // namespace cqed
