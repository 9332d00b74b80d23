#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/mesh.hpp"

namespace forchfem {

/// Compressed-sparse-row matrix with a fixed sparsity pattern. Column indices
/// are sorted within each row, so entry lookup is a binary search.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;   // size n+1
    std::vector<int> col_idx;   // size nnz
    std::vector<double> values; // size nnz

    int rows() const { return n; }
    std::size_t nnz() const { return col_idx.size(); }

    void set_zero() { std::fill(values.begin(), values.end(), 0.0); }

    int find(int i, int j) const {
        const auto first = col_idx.begin() + row_ptr[i];
        const auto last = col_idx.begin() + row_ptr[i + 1];
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return -1;
        return static_cast<int>(it - col_idx.begin());
    }

    double& coeff_ref(int i, int j) {
        const int k = find(i, j);
        if (k < 0)
            throw std::out_of_range("CsrMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") not in pattern");
        return values[static_cast<std::size_t>(k)];
    }

    double coeff(int i, int j) const {
        const int k = find(i, j);
        return k < 0 ? 0.0 : values[static_cast<std::size_t>(k)];
    }

    void add(int i, int j, double v) { coeff_ref(i, j) += v; }

    void multiply(std::span<const double> x, std::span<double> y) const {
        assert(static_cast<int>(x.size()) == n && static_cast<int>(y.size()) == n);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                s += values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx[k])];
            y[static_cast<std::size_t>(i)] = s;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(n));
        multiply(x, y);
        return y;
    }

    bool is_symmetric(double tol = 0.0) const {
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                const int j = col_idx[k];
                const double aji = coeff(j, i);
                if (std::abs(values[static_cast<std::size_t>(k)] - aji) > tol) return false;
            }
        return true;
    }
};

/// CSR skeleton (all values zero) over an explicit adjacency: one row per
/// vertex, columns = vertex itself plus its neighbours across elements.
inline CsrMatrix vertex_pattern(const Mesh& mesh) {
    const int nv = mesh.n_vertices();
    std::vector<std::set<int>> adj(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) adj[static_cast<std::size_t>(v)].insert(v);
    for (const auto& t : mesh.triangles)
        for (int a : t)
            for (int b : t) adj[static_cast<std::size_t>(a)].insert(b);

    CsrMatrix m;
    m.n = nv;
    m.row_ptr.resize(static_cast<std::size_t>(nv) + 1, 0);
    for (int i = 0; i < nv; ++i)
        m.row_ptr[static_cast<std::size_t>(i) + 1] =
            m.row_ptr[static_cast<std::size_t>(i)] + static_cast<int>(adj[static_cast<std::size_t>(i)].size());
    m.col_idx.reserve(static_cast<std::size_t>(m.row_ptr.back()));
    for (int i = 0; i < nv; ++i)
        m.col_idx.insert(m.col_idx.end(), adj[static_cast<std::size_t>(i)].begin(),
                         adj[static_cast<std::size_t>(i)].end());
    m.values.assign(m.col_idx.size(), 0.0);
    return m;
}

} // namespace forchfem
