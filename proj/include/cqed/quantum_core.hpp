// Truncated Hilbert-space bookkeeping and sparse operator algebra shared by
// the model builders. All Hamiltonian-valued operators carry angular
// frequency units (rad/s); ladder operators are dimensionless.
#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cqed {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Relative magnitude below which sparse entries are dropped at construction.
constexpr double kSparseDropTol = 1e-14;

// Tensor convention: cavity index varies slowest, i.e. the combined basis
// index is m * n_trans + n for cavity Fock state m and transmon level n.
struct HilbertSpace {
    int n_cav;    // cavity Fock states 0 .. n_cav-1
    int n_trans;  // transmon levels 0 .. n_trans-1

    HilbertSpace(int cav, int trans) : n_cav(cav), n_trans(trans) {
        if (cav < 2 || trans < 2)
            throw std::invalid_argument("HilbertSpace: need n_cav >= 2 and n_trans >= 2");
    }
    int dim() const { return n_cav * n_trans; }
    int index(int m, int n) const { return m * n_trans + n; }
    bool operator==(const HilbertSpace& o) const {
        return n_cav == o.n_cav && n_trans == o.n_trans;
    }
};

// Sparse operator on the full space. Immutable once built.
struct SparseOperator {
    HilbertSpace space;
    SparseMatrix mat;
    bool hermitian = false;

    SparseOperator(HilbertSpace s, SparseMatrix m, bool herm = false);

    DenseMatrix dense() const { return DenseMatrix(mat); }
};

// Drops entries below tol * max|entry| and compresses.
SparseMatrix prune_sparse(const SparseMatrix& m, double tol = kSparseDropTol);

// a (x) I : cavity annihilation, identity on the transmon factor.
SparseOperator annihilator_cavity(const HilbertSpace& space);

// I (x) b with b = sum_n sqrt(n+1) |n><n+1| : bosonic-weight transmon lowering.
SparseOperator lowering_transmon(const HilbertSpace& space);

// I (x) I
SparseOperator identity_op(const HilbertSpace& space);

// Kronecker product of a cavity-factor matrix (n_cav x n_cav) and a
// transmon-factor matrix (n_trans x n_trans), honoring the cavity-slowest
// ordering. Throws on factor dimension mismatch.
SparseOperator tensor(const HilbertSpace& space, const SparseMatrix& cav_op,
                      const SparseMatrix& trans_op);

// Single-factor ladder matrices (used by tensor() callers and the
// single-mode Duffing builder).
SparseMatrix fock_annihilator(int dim);
SparseMatrix fock_number(int dim);
SparseMatrix sparse_identity(int dim);

// max |M - M^dagger| over all entries.
double hermiticity_defect(const SparseMatrix& m);

}  // namespace cqed
