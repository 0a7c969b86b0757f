#include "cqed/quantum_core.hpp"

#include <vector>

namespace cqed {

SparseMatrix prune_sparse(const SparseMatrix& m, double tol) {
    double maxabs = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            maxabs = std::max(maxabs, std::abs(it.value()));
    SparseMatrix out = m;
    if (maxabs > 0.0)
        out.prune([=](int, int, const Complex& v) { return std::abs(v) > tol * maxabs; });
    out.makeCompressed();
    return out;
}

double hermiticity_defect(const SparseMatrix& m) {
    SparseMatrix d = SparseMatrix(m - SparseMatrix(m.adjoint()));
    double defect = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it)
            defect = std::max(defect, std::abs(it.value()));
    return defect;
}

SparseOperator::SparseOperator(HilbertSpace s, SparseMatrix m, bool herm)
    : space(s), mat(prune_sparse(m)), hermitian(herm) {
    if (mat.rows() != s.dim() || mat.cols() != s.dim())
        throw std::invalid_argument("SparseOperator: matrix shape does not match space");
    if (hermitian) {
        double maxabs = 0.0;
        for (int k = 0; k < mat.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(mat, k); it; ++it)
                maxabs = std::max(maxabs, std::abs(it.value()));
        if (hermiticity_defect(mat) > 1e-12 * std::max(maxabs, 1e-300))
            throw std::invalid_argument("SparseOperator: hermitian flag set on non-hermitian matrix");
    }
}

SparseMatrix fock_annihilator(int dim) {
    SparseMatrix a(dim, dim);
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(dim);
    for (int n = 1; n < dim; ++n) t.emplace_back(n - 1, n, std::sqrt(double(n)));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

SparseMatrix fock_number(int dim) {
    SparseMatrix n(dim, dim);
    std::vector<Eigen::Triplet<Complex>> t;
    for (int k = 1; k < dim; ++k) t.emplace_back(k, k, double(k));
    n.setFromTriplets(t.begin(), t.end());
    return n;
}

SparseMatrix sparse_identity(int dim) {
    SparseMatrix i(dim, dim);
    i.setIdentity();
    return i;
}

SparseOperator tensor(const HilbertSpace& space, const SparseMatrix& cav_op,
                      const SparseMatrix& trans_op) {
    if (cav_op.rows() != space.n_cav || cav_op.cols() != space.n_cav ||
        trans_op.rows() != space.n_trans || trans_op.cols() != space.n_trans)
        throw std::invalid_argument("tensor: factor dimensions do not match space");
    const int nt = space.n_trans;
    SparseMatrix out(space.dim(), space.dim());
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(size_t(cav_op.nonZeros()) * size_t(trans_op.nonZeros()));
    for (int kc = 0; kc < cav_op.outerSize(); ++kc)
        for (SparseMatrix::InnerIterator ic(cav_op, kc); ic; ++ic)
            for (int kt = 0; kt < trans_op.outerSize(); ++kt)
                for (SparseMatrix::InnerIterator it(trans_op, kt); it; ++it)
                    t.emplace_back(int(ic.row()) * nt + int(it.row()),
                                   int(ic.col()) * nt + int(it.col()),
                                   ic.value() * it.value());
    out.setFromTriplets(t.begin(), t.end());
    return SparseOperator(space, std::move(out));
}

SparseOperator annihilator_cavity(const HilbertSpace& space) {
    return tensor(space, fock_annihilator(space.n_cav), sparse_identity(space.n_trans));
}

SparseOperator lowering_transmon(const HilbertSpace& space) {
    return tensor(space, sparse_identity(space.n_cav), fock_annihilator(space.n_trans));
}

SparseOperator identity_op(const HilbertSpace& space) {
    SparseMatrix i(space.dim(), space.dim());
    i.setIdentity();
    return SparseOperator(space, std::move(i), true);
}

}  // namespace cqed
