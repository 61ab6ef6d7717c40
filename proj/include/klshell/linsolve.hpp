/** @file linsolve.hpp

    @brief Direct sparse solve of the assembled saddle point system, and
    Matrix Market export/import.
*/
#pragma once

#include "assembly.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

namespace klshell {

struct SolveStats
{
    double residual = 0.0; // ||K z - rhs|| / max(||rhs||, tiny)
    int size = 0;
    long nonzeros = 0;
};

struct SolveOptions
{
    double residual_tol = 1e-10;
    int refinement_steps = 3; // iterative refinement with the same factors
    bool warn = true;
};

/// Symmetric Ruiz equilibration: returns s with max_j |s_i K_ij s_j| close
/// to 1 for every row i.
inline Eigen::VectorXd equilibrate(const SparseMatrix& K, int iterations = 10)
{
    const int n = static_cast<int>(K.rows());
    Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd rmax = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < K.outerSize(); ++c)
            for (SparseMatrix::InnerIterator e(K, c); e; ++e)
                rmax[e.row()] = std::max(rmax[e.row()], std::abs(s[e.row()] * e.value() * s[c]));
        bool done = true;
        for (int i = 0; i < n; ++i) {
            if (rmax[i] > 0.0) {
                s[i] /= std::sqrt(rmax[i]);
                done = done && std::abs(rmax[i] - 1.0) < 1e-2;
            }
        }
        if (done)
            break;
    }
    return s;
}

/// Sparse LU with column approximate minimum degree ordering on the
/// equilibrated matrix.
inline Eigen::VectorXd solve_sparse(const SparseMatrix& K, const Eigen::VectorXd& rhs, SolveStats* stats = nullptr,
                                    const SolveOptions& opt = {})
{
    if (K.rows() != K.cols() || K.rows() != rhs.size())
        throw InvalidArgument("solve: dimension mismatch");
    SparseMatrix Kc = K;
    Kc.makeCompressed();
    const Eigen::VectorXd sc = equilibrate(Kc);
    for (int i = 0; i < sc.size(); ++i)
        if (sc[i] == 1.0 && Kc.col(i).nonZeros() == 0)
            throw SingularSystem("solve: empty row/column " + std::to_string(i));
    const SparseMatrix Ks = sc.asDiagonal() * Kc * sc.asDiagonal();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(Ks);
    lu.factorize(Ks);
    if (lu.info() != Eigen::Success)
        throw SingularSystem("solve: factorization failed (" + lu.lastErrorMessage() + ")");
    auto apply = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
        return sc.asDiagonal() * Eigen::VectorXd(lu.solve(Eigen::VectorXd(sc.asDiagonal() * b)));
    };
    Eigen::VectorXd z = apply(rhs);
    if (lu.info() != Eigen::Success || !z.allFinite())
        throw SingularSystem("solve: back substitution failed");

    const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
    double res = (Kc * z - rhs).norm() / scale;
    for (int step = 0; step < opt.refinement_steps && res > 0.01 * opt.residual_tol; ++step) {
        const Eigen::VectorXd dz = apply(rhs - Kc * z);
        const Eigen::VectorXd zn = z + dz;
        const double rn = (Kc * zn - rhs).norm() / scale;
        if (!(rn < res))
            break;
        z = zn;
        res = rn;
    }
    if (stats) {
        stats->residual = res;
        stats->size = static_cast<int>(K.rows());
        stats->nonzeros = Kc.nonZeros();
    }
    if (opt.warn && res > opt.residual_tol)
        std::cerr << "warning: relative residual " << res << " exceeds " << opt.residual_tol << "\n";
    return z;
}

inline Eigen::VectorXd solve_saddle(const SaddleSystem& sys, SolveStats* stats = nullptr, const SolveOptions& opt = {})
{
    return solve_sparse(sys.K, sys.rhs, stats, opt);
}

/// Coordinate-format general real matrix, 1-based indices.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& K)
{
    SparseMatrix Kc = K;
    Kc.makeCompressed();
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << K.rows() << " " << K.cols() << " " << Kc.nonZeros() << "\n";
    os << std::setprecision(17);
    for (int c = 0; c < Kc.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(Kc, c); it; ++it)
            os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

inline void write_matrix_market(const std::string& path, const SparseMatrix& K)
{
    std::ofstream f(path);
    if (!f)
        throw InvalidArgument("cannot open '" + path + "' for writing");
    write_matrix_market(f, K);
}

inline SparseMatrix read_matrix_market(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
        throw InvalidArgument("matrix market: missing header");
    if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
        throw Unsupported("matrix market: only real coordinate matrices are supported");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream hdr(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(hdr >> rows >> cols >> nnz))
        throw InvalidArgument("matrix market: bad size line");
    Triplets trip;
    trip.reserve(symmetric ? 2 * nnz : nnz);
    for (long k = 0; k < nnz; ++k) {
        long r, c;
        double v;
        if (!(is >> r >> c >> v))
            throw InvalidArgument("matrix market: truncated entry list");
        trip.emplace_back(r - 1, c - 1, v);
        if (symmetric && r != c)
            trip.emplace_back(c - 1, r - 1, v);
    }
    SparseMatrix K(rows, cols);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

inline SparseMatrix read_matrix_market(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw InvalidArgument("cannot open '" + path + "'");
    return read_matrix_market(f);
}

} // namespace klshell
