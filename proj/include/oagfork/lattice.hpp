#pragma once

#include "oagfork/linalg.hpp"
#include "oagfork/rational.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace oagfork {

using ZVec = std::vector<Integer>;
using ZMat = std::vector<ZVec>;  // row-major

inline ZMat identity(size_t n) {
    ZMat m(n, ZVec(n, 0));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline ZMat zm_mul(const ZMat& a, const ZMat& b, size_t bcols) {
    ZMat r(a.size(), ZVec(bcols, 0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t k = 0; k < b.size(); ++k) {
            if (a[i][k] == 0) continue;
            for (size_t j = 0; j < bcols; ++j) r[i][j] += a[i][k] * b[k][j];
        }
    return r;
}

inline bool zv_zero(const ZVec& v) {
    for (const auto& c : v)
        if (c != 0) return false;
    return true;
}

inline void zv_axpy(ZVec& a, const Integer& s, const ZVec& b) {
    if (s == 0) return;
    for (size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

// Row-style Hermite normal form with transform: U·m = H (U unimodular, zero rows of H last).
struct HnfResult {
    ZMat H, U;
    std::vector<size_t> pivots;  // pivot column of each nonzero row
    size_t rank() const { return pivots.size(); }
};

inline HnfResult hnf_with_transform(const ZMat& m, size_t ncols) {
    HnfResult r{m, identity(m.size()), {}};
    ZMat& H = r.H;
    ZMat& U = r.U;
    size_t rows = H.size(), prow = 0;
    for (size_t col = 0; col < ncols && prow < rows; ++col) {
        // Euclid on column col among rows prow..
        for (;;) {
            size_t best = rows;
            for (size_t i = prow; i < rows; ++i)
                if (H[i][col] != 0 && (best == rows || abs(H[i][col]) < abs(H[best][col]))) best = i;
            if (best == rows) break;
            std::swap(H[prow], H[best]);
            std::swap(U[prow], U[best]);
            bool done = true;
            for (size_t i = prow + 1; i < rows; ++i) {
                if (H[i][col] == 0) continue;
                Integer q = floor_div(H[i][col], H[prow][col]);
                zv_axpy(H[i], -q, H[prow]);
                zv_axpy(U[i], -q, U[prow]);
                if (H[i][col] != 0) done = false;
            }
            if (done) break;
        }
        if (H[prow][col] == 0) continue;
        if (H[prow][col] < 0) {
            for (auto& c : H[prow]) c = -c;
            for (auto& c : U[prow]) c = -c;
        }
        for (size_t i = 0; i < prow; ++i) {
            Integer q = floor_div(H[i][col], H[prow][col]);
            zv_axpy(H[i], -q, H[prow]);
            zv_axpy(U[i], -q, U[prow]);
        }
        r.pivots.push_back(col);
        ++prow;
    }
    return r;
}

// A subgroup of ℤⁿ in canonical (Hermite) form.
struct IntLattice {
    size_t dim = 0;  // ambient coordinate count
    ZMat basis;      // HNF rows

    size_t rank() const { return basis.size(); }
    bool operator==(const IntLattice& o) const { return dim == o.dim && basis == o.basis; }
};

inline IntLattice make_lattice(const ZMat& gens, size_t dim) {
    HnfResult h = hnf_with_transform(gens, dim);
    IntLattice L{dim, {}};
    for (size_t i = 0; i < h.rank(); ++i) L.basis.push_back(h.H[i]);
    return L;
}

inline IntLattice full_lattice(size_t dim) { return {dim, identity(dim)}; }

// Coefficients of v in the HNF basis, if v ∈ L.
inline std::optional<ZVec> lattice_coords(const IntLattice& L, ZVec v) {
    ZVec c(L.rank(), 0);
    for (size_t i = 0; i < L.rank(); ++i) {
        size_t p = 0;
        while (L.basis[i][p] == 0) ++p;
        if (v[p] % L.basis[i][p] != 0) return std::nullopt;
        c[i] = v[p] / L.basis[i][p];
        zv_axpy(v, -c[i], L.basis[i]);
    }
    if (!zv_zero(v)) return std::nullopt;
    return c;
}

inline bool contains(const IntLattice& L, const ZVec& v) { return lattice_coords(L, v).has_value(); }

inline IntLattice lattice_sum(const IntLattice& a, const IntLattice& b) {
    ZMat g = a.basis;
    g.insert(g.end(), b.basis.begin(), b.basis.end());
    return make_lattice(g, a.dim);
}

struct SnfResult {
    ZMat U, D, V, Vinv;  // U·m·V = D
    size_t rank = 0;
    std::vector<Integer> diag() const {
        std::vector<Integer> d;
        for (size_t i = 0; i < rank; ++i) d.push_back(D[i][i]);
        return d;
    }
};

inline SnfResult snf(const ZMat& m, size_t ncols) {
    size_t rows = m.size();
    SnfResult r{identity(rows), m, identity(ncols), identity(ncols), 0};
    ZMat& D = r.D;
    auto colAxpy = [&](size_t dst, const Integer& q, size_t src) {  // col dst += q·col src
        for (auto& row : D) row[dst] += q * row[src];
        for (auto& row : r.V) row[dst] += q * row[src];
        zv_axpy(r.Vinv[src], -q, r.Vinv[dst]);
    };
    auto colSwap = [&](size_t a, size_t b) {
        for (auto& row : D) std::swap(row[a], row[b]);
        for (auto& row : r.V) std::swap(row[a], row[b]);
        std::swap(r.Vinv[a], r.Vinv[b]);
    };
    auto rowAxpy = [&](size_t dst, const Integer& q, size_t src) {
        zv_axpy(D[dst], q, D[src]);
        zv_axpy(r.U[dst], q, r.U[src]);
    };
    for (size_t t = 0; t < std::min(rows, ncols); ++t) {
        for (;;) {
            size_t bi = rows, bj = ncols;
            for (size_t i = t; i < rows; ++i)
                for (size_t j = t; j < ncols; ++j)
                    if (D[i][j] != 0 && (bi == rows || abs(D[i][j]) < abs(D[bi][bj]))) {
                        bi = i;
                        bj = j;
                    }
            if (bi == rows) return r;
            std::swap(D[t], D[bi]);
            std::swap(r.U[t], r.U[bi]);
            if (bj != t) colSwap(t, bj);
            bool clean = true;
            for (size_t i = t + 1; i < rows; ++i) {
                if (D[i][t] == 0) continue;
                rowAxpy(i, -floor_div(D[i][t], D[t][t]), t);
                if (D[i][t] != 0) clean = false;
            }
            for (size_t j = t + 1; j < ncols; ++j) {
                if (D[t][j] == 0) continue;
                colAxpy(j, -floor_div(D[t][j], D[t][t]), t);
                if (D[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility: pivot must divide the rest
            size_t bad = rows;
            for (size_t i = t + 1; i < rows && bad == rows; ++i)
                for (size_t j = t + 1; j < ncols; ++j)
                    if (D[i][j] % D[t][t] != 0) {
                        bad = i;
                        break;
                    }
            if (bad == rows) break;
            rowAxpy(t, 1, bad);
        }
        if (D[t][t] < 0) {
            for (auto& c : D[t]) c = -c;
            for (auto& c : r.U[t]) c = -c;
        }
        r.rank = t + 1;
    }
    return r;
}

// Integer basis of {y : y·m = 0}.
inline ZMat left_kernel(const ZMat& m, size_t ncols) {
    SnfResult s = snf(m, ncols);
    return ZMat(s.U.begin() + s.rank, s.U.end());
}

// Solve x·ambient = v over ℚ for independent ambient rows.
inline std::optional<QVec> rational_coords(const ZMat& rows, const ZVec& v) {
    QMat m;
    for (const auto& r : rows) m.push_back(QVec(r.begin(), r.end()));
    return solve_left(m, QVec(v.begin(), v.end()));
}

// {x ∈ ambient : n·x ∈ L for some n > 0}.
inline IntLattice saturate(const IntLattice& L, const IntLattice& ambient) {
    if (L.dim != ambient.dim) throw input_error("saturate: dimension mismatch");
    size_t r = ambient.rank();
    ZMat X;
    for (const auto& v : L.basis) {
        auto c = lattice_coords(ambient, v);
        if (!c) throw input_error("saturate: lattice not contained in ambient");
        X.push_back(*c);
    }
    if (X.empty()) return {L.dim, {}};
    SnfResult s = snf(X, r);
    ZMat top(s.Vinv.begin(), s.Vinv.begin() + s.rank);
    return make_lattice(zm_mul(top, ambient.basis, L.dim), L.dim);
}

}  // namespace oagfork
