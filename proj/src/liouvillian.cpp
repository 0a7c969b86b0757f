#include "cqed/liouvillian.hpp"

#include <cstdint>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace cqed {

void DensityMatrix::check_physical(double herm_tol, double trace_tol,
                                   double positivity_tol) const {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
        throw std::runtime_error("DensityMatrix: hermiticity violated");
    if (std::abs(rho.trace() - Complex(1.0)) > trace_tol)
        throw std::runtime_error("DensityMatrix: trace deviates from 1");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -positivity_tol)
        throw std::runtime_error("DensityMatrix: negative eigenvalue beyond tolerance");
}

void DensityMatrix::hermitize_and_normalize() {
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-300) throw std::runtime_error("DensityMatrix: vanishing trace");
    rho /= tr;
}

DensityMatrix ground_state(int dim) {
    DenseMatrix r = DenseMatrix::Zero(dim, dim);
    r(0, 0) = 1.0;
    return DensityMatrix(std::move(r));
}

DenseVector vectorize(const DenseMatrix& rho) {
    return Eigen::Map<const DenseVector>(rho.data(), rho.size());
}

DenseMatrix unvectorize(const DenseVector& v, int dim) {
    if (v.size() != Eigen::Index(dim) * dim)
        throw std::invalid_argument("unvectorize: size mismatch");
    return Eigen::Map<const DenseMatrix>(v.data(), dim, dim);
}

double Liouvillian::norm_inf() const {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(l.rows());
    for (int k = 0; k < l.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(l, k); it; ++it)
            rowsum(it.row()) += std::abs(it.value());
    return rowsum.size() ? rowsum.maxCoeff() : 0.0;
}

Liouvillian assemble(const SparseMatrix& h, const std::vector<CollapseChannel>& channels,
                     std::size_t memory_cap) {
    const int d = int(h.rows());
    if (h.cols() != d) throw std::invalid_argument("assemble: Hamiltonian not square");

    std::size_t nnz_est = 2 * std::size_t(h.nonZeros()) * d;
    for (const auto& ch : channels)
        nnz_est += 3 * std::size_t(ch.op.nonZeros()) * std::size_t(std::max<Eigen::Index>(ch.op.nonZeros(), d));
    if (nnz_est * (sizeof(Complex) + 2 * sizeof(int)) > memory_cap)
        throw std::runtime_error(
            "assemble: estimated superoperator memory exceeds cap; reduce the truncation");

    const SparseMatrix id = sparse_identity(d);
    const SparseMatrix ht = SparseMatrix(h.transpose());
    SparseMatrix l = SparseMatrix(Complex(0, -1) *
                                  (Eigen::kroneckerProduct(id, h) - Eigen::kroneckerProduct(ht, id)));

    Liouvillian out;
    for (const auto& ch : channels) {
        if (ch.op.nonZeros() == 0) {
            out.channel_labels.push_back(ch.label + " (empty)");
            continue;
        }
        const SparseMatrix c = ch.op;
        const SparseMatrix cconj = c.conjugate();
        const SparseMatrix cdc = SparseMatrix(c.adjoint() * c);
        const SparseMatrix cdct = SparseMatrix(cdc.transpose());
        l = l + SparseMatrix(Eigen::kroneckerProduct(cconj, c)) -
            SparseMatrix(Complex(0.5) * Eigen::kroneckerProduct(id, cdc)) -
            SparseMatrix(Complex(0.5) * Eigen::kroneckerProduct(cdct, id));
        out.channel_labels.push_back(ch.label);
    }
    out.dim = d;
    out.l = prune_sparse(l);
    return out;
}

Liouvillian assemble(const GjcModel& model, std::size_t memory_cap) {
    return assemble(model.h_rot, model.collapse, memory_cap);
}

Liouvillian assemble(const DuffingModel& model, std::size_t memory_cap) {
    return assemble(model.h_rot, model.collapse, memory_cap);
}

DenseMatrix apply(const Liouvillian& liouv, const DensityMatrix& rho) {
    if (rho.dim() != liouv.dim) throw std::invalid_argument("apply: shape mismatch");
    return unvectorize(liouv.l * vectorize(rho.rho), liouv.dim);
}

void dump_triplets(const Liouvillian& liouv, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dump_triplets: cannot open " + path);
    std::vector<int64_t> rows, cols;
    std::vector<double> re, im;
    for (int k = 0; k < liouv.l.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(liouv.l, k); it; ++it) {
            rows.push_back(it.row());
            cols.push_back(it.col());
            re.push_back(it.value().real());
            im.push_back(it.value().imag());
        }
    const int64_t header[2] = {int64_t(liouv.dim), int64_t(rows.size())};
    f.write(reinterpret_cast<const char*>(header), sizeof(header));
    f.write(reinterpret_cast<const char*>(rows.data()), std::streamsize(rows.size() * 8));
    f.write(reinterpret_cast<const char*>(cols.data()), std::streamsize(cols.size() * 8));
    f.write(reinterpret_cast<const char*>(re.data()), std::streamsize(re.size() * 8));
    f.write(reinterpret_cast<const char*>(im.data()), std::streamsize(im.size() * 8));
}

Liouvillian load_triplets(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_triplets: cannot open " + path);
    int64_t header[2];
    f.read(reinterpret_cast<char*>(header), sizeof(header));
    const int64_t d = header[0], nnz = header[1];
    std::vector<int64_t> rows(nnz), cols(nnz);
    std::vector<double> re(nnz), im(nnz);
    f.read(reinterpret_cast<char*>(rows.data()), nnz * 8);
    f.read(reinterpret_cast<char*>(cols.data()), nnz * 8);
    f.read(reinterpret_cast<char*>(re.data()), nnz * 8);
    f.read(reinterpret_cast<char*>(im.data()), nnz * 8);
    if (!f) throw std::runtime_error("load_triplets: truncated file " + path);
    std::vector<Eigen::Triplet<Complex>> t;
    t.reserve(size_t(nnz));
    for (int64_t k = 0; k < nnz; ++k)
        t.emplace_back(int(rows[k]), int(cols[k]), Complex(re[k], im[k]));
    Liouvillian out;
    out.dim = int(d);
    out.l = SparseMatrix(d * d, d * d);
    out.l.setFromTriplets(t.begin(), t.end());
    return out;
}

}  // namespace cqed
