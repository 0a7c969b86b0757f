// Vectorization of the Lindblad generator into a sparse superoperator.
//
// Column-stacking convention throughout: vec(rho) stacks columns, so
// vec(A X B) = (B^T kron A) vec(X) and the generator reads
//   L = -i (I kron H - H^T kron I)
//     + sum_k [ conj(c_k) kron c_k
//               - 1/2 I kron (c_k^dag c_k) - 1/2 (c_k^dag c_k)^T kron I ].
#pragma once

#include <string>
#include <vector>

#include "cqed/density.hpp"
#include "cqed/duffing.hpp"
#include "cqed/gjc.hpp"

namespace cqed {

struct Liouvillian {
    int dim = 0;  // Hilbert dimension D; the superoperator is D^2 x D^2
    SparseMatrix l;
    std::vector<std::string> channel_labels;

    double norm_inf() const;  // max absolute row sum
};

// Memory cap for the assembled superoperator, in bytes of triplet storage
// estimate. Exceeding it is an error instructing truncation reduction.
inline constexpr std::size_t kDefaultMemoryCap = std::size_t(8) << 30;

Liouvillian assemble(const SparseMatrix& h, const std::vector<CollapseChannel>& channels,
                     std::size_t memory_cap = kDefaultMemoryCap);
Liouvillian assemble(const GjcModel& model, std::size_t memory_cap = kDefaultMemoryCap);
Liouvillian assemble(const DuffingModel& model, std::size_t memory_cap = kDefaultMemoryCap);

// unvec(L vec(rho)): the Lindblad right-hand side.
DenseMatrix apply(const Liouvillian& liouv, const DensityMatrix& rho);

// Binary triplet dump: little-endian int64 header {D, nnz} followed by
// int64 rows[nnz], int64 cols[nnz], double re[nnz], double im[nnz].
void dump_triplets(const Liouvillian& liouv, const std::string& path);
Liouvillian load_triplets(const std::string& path);

}  // namespace cqed
