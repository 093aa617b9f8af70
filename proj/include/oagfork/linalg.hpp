#pragma once

#include "oagfork/rational.hpp"

#include <optional>
#include <vector>

namespace oagfork {

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>;  // row-major

inline bool is_zero(const QVec& v) {
    for (const auto& c : v)
        if (c != 0) return false;
    return true;
}

inline QVec qv_add(QVec a, const QVec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline QVec qv_sub(QVec a, const QVec& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline QVec qv_scale(QVec a, const Rational& s) {
    for (auto& c : a) c *= s;
    return a;
}

// a += s·b
inline void qv_axpy(QVec& a, const Rational& s, const QVec& b) {
    if (s == 0) return;
    for (size_t i = 0; i < a.size(); ++i)
        if (b[i] != 0) a[i] += s * b[i];
}

// Reduced row echelon form; pivots[i] is the pivot column of row i.
struct Rref {
    QMat rows;
    std::vector<int> pivots;

    size_t rank() const { return rows.size(); }

    // Clears pivot columns of v; v lies in the row span iff the result is zero.
    QVec reduce(QVec v) const {
        for (size_t i = 0; i < rows.size(); ++i) {
            Rational c = v[pivots[i]];
            if (c != 0) qv_axpy(v, -c, rows[i]);
        }
        return v;
    }

    // Coefficients expressing v in the rows (v must lie in the span).
    std::optional<QVec> coords(const QVec& v) const {
        QVec r = reduce(v);
        if (!is_zero(r)) return std::nullopt;
        QVec c(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) c[i] = v[pivots[i]];
        return c;
    }

    // Adds a row; returns false if it was already in the span.
    bool insert(QVec v) {
        v = reduce(std::move(v));
        int p = -1;
        for (size_t j = 0; j < v.size(); ++j)
            if (v[j] != 0) {
                p = static_cast<int>(j);
                break;
            }
        if (p < 0) return false;
        v = qv_scale(std::move(v), 1 / v[p]);
        for (auto& r : rows)
            if (r[p] != 0) qv_axpy(r, -r[p], v);
        size_t pos = 0;
        while (pos < pivots.size() && pivots[pos] < p) ++pos;
        rows.insert(rows.begin() + pos, std::move(v));
        pivots.insert(pivots.begin() + pos, p);
        return true;
    }
};

inline Rref rref(const QMat& m) {
    Rref r;
    for (const auto& row : m) r.insert(row);
    return r;
}

inline size_t rank(const QMat& m) { return rref(m).rank(); }

// Basis of {x : m·x = 0} for an r×n matrix.
inline QMat nullspace(const QMat& m, size_t ncols) {
    Rref r = rref(m);
    std::vector<bool> isPivot(ncols, false);
    for (int p : r.pivots) isPivot[p] = true;
    QMat basis;
    for (size_t f = 0; f < ncols; ++f) {
        if (isPivot[f]) continue;
        QVec x(ncols);
        x[f] = 1;
        for (size_t i = 0; i < r.rows.size(); ++i) x[r.pivots[i]] = -r.rows[i][f];
        basis.push_back(std::move(x));
    }
    return basis;
}

// Left kernel: basis of {y : y·m = 0}.
inline QMat left_nullspace(const QMat& m, size_t ncols) {
    QMat t(ncols, QVec(m.size()));
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < ncols; ++j) t[j][i] = m[i][j];
    return nullspace(t, m.size());
}

// Solve x·m = v (x a row vector); nullopt if inconsistent.
inline std::optional<QVec> solve_left(const QMat& m, const QVec& v) {
    size_t k = m.size(), n = v.size();
    // augment rows with an identity to track combinations
    Rref r;
    QMat aug;
    for (size_t i = 0; i < k; ++i) {
        QVec row(m[i]);
        row.resize(n + k);
        row[n + i] = 1;
        aug.push_back(row);
    }
    r = rref(aug);
    QVec target(v);
    target.resize(n + k);
    // reduce target using rows whose pivot lies in the first n columns
    QVec x(k);
    for (size_t i = 0; i < r.rows.size(); ++i) {
        if (r.pivots[i] >= static_cast<int>(n)) break;
        Rational c = target[r.pivots[i]];
        if (c == 0) continue;
        qv_axpy(target, -c, r.rows[i]);
    }
    for (size_t j = 0; j < n; ++j)
        if (target[j] != 0) return std::nullopt;
    // target now holds -(combination) in the tracking columns
    for (size_t i = 0; i < k; ++i) x[i] = -target[n + i];
    return x;
}

inline QVec mat_vec_left(const QVec& x, const QMat& m, size_t ncols) {
    QVec r(ncols);
    for (size_t i = 0; i < m.size(); ++i) qv_axpy(r, x[i], m[i]);
    return r;
}

}  // namespace oagfork
