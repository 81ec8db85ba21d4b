#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "pincon/errors.hpp"

namespace pincon {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Value semantics; sized for the
/// desk-scale networks this library targets (n <= 512).
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw DomainError("Matrix: negative dimension");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix fromRows(std::initializer_list<std::initializer_list<double>> rows) {
        const int r = static_cast<int>(rows.size());
        const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        Matrix m(r, c);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c)
                throw DomainError("Matrix::fromRows: ragged rows");
            int j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    [[nodiscard]] Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        Matrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i) {
            for (int k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    [[nodiscard]] Vector apply(const Vector& x) const {
        Vector y(static_cast<std::size_t>(rows_), 0.0);
        for (int i = 0; i < rows_; ++i) {
            double acc = 0.0;
            const double* row = &data_[static_cast<std::size_t>(i) * cols_];
            for (int j = 0; j < cols_; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = acc;
        }
        return y;
    }

    /// Max absolute row sum.
    [[nodiscard]] double infNorm() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    /// Max absolute column sum.
    [[nodiscard]] double oneNorm() const {
        double best = 0.0;
        for (int j = 0; j < cols_; ++j) {
            double s = 0.0;
            for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    [[nodiscard]] double frobeniusNorm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    [[nodiscard]] double maxAbs() const {
        double best = 0.0;
        for (double v : data_) best = std::max(best, std::abs(v));
        return best;
    }

    /// Submatrix gathered by index lists: out(a,b) = (*this)(ri[a], ci[b]).
    [[nodiscard]] Matrix gather(const std::vector<int>& ri, const std::vector<int>& ci) const {
        Matrix out(static_cast<int>(ri.size()), static_cast<int>(ci.size()));
        for (std::size_t a = 0; a < ri.size(); ++a)
            for (std::size_t b = 0; b < ci.size(); ++b)
                out(static_cast<int>(a), static_cast<int>(b)) = (*this)(ri[a], ci[b]);
        return out;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline double infNorm(const Vector& x) {
    double best = 0.0;
    for (double v : x) best = std::max(best, std::abs(v));
    return best;
}

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting
// ---------------------------------------------------------------------------

struct LuDecomposition {
    Matrix lu;              // packed L (unit diagonal) and U
    std::vector<int> perm;  // row permutation applied to the input
    int permSign = 1;
    bool singular = false;  // an exactly/near zero pivot was hit
    double minPivot = 0.0;  // smallest |pivot| encountered
};

inline LuDecomposition lu_factor(Matrix a) {
    if (!a.square()) throw DomainError("lu_factor: matrix must be square");
    const int n = a.rows();
    LuDecomposition d;
    d.perm.resize(static_cast<std::size_t>(n));
    std::iota(d.perm.begin(), d.perm.end(), 0);
    d.minPivot = std::numeric_limits<double>::infinity();

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(d.perm[static_cast<std::size_t>(k)], d.perm[static_cast<std::size_t>(piv)]);
            d.permSign = -d.permSign;
        }
        const double pivot = a(k, k);
        d.minPivot = std::min(d.minPivot, std::abs(pivot));
        if (pivot == 0.0) {
            d.singular = true;
            continue;
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / pivot;
            a(i, k) = f;
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    d.lu = std::move(a);
    return d;
}

inline Vector lu_solve(const LuDecomposition& d, const Vector& b) {
    const int n = d.lu.rows();
    if (d.singular) throw SingularSolveError("lu_solve: singular factorization");
    Vector x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(d.perm[static_cast<std::size_t>(i)])];
    for (int i = 1; i < n; ++i) {
        double acc = x[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) acc -= d.lu(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
        double acc = x[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) acc -= d.lu(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = acc / d.lu(i, i);
    }
    return x;
}

inline Matrix lu_solve_matrix(const LuDecomposition& d, const Matrix& b) {
    const int n = d.lu.rows();
    Matrix x(n, b.cols());
    Vector col(static_cast<std::size_t>(n));
    for (int j = 0; j < b.cols(); ++j) {
        for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = b(i, j);
        Vector sol = lu_solve(d, col);
        for (int i = 0; i < n; ++i) x(i, j) = sol[static_cast<std::size_t>(i)];
    }
    return x;
}

inline double lu_determinant(const LuDecomposition& d) {
    double det = static_cast<double>(d.permSign);
    for (int i = 0; i < d.lu.rows(); ++i) det *= d.lu(i, i);
    return det;
}

// ---------------------------------------------------------------------------
// Dense matrix exponential: scaling and squaring with diagonal Pade
// approximants (orders 3/5/7/9/13 selected by the 1-norm).
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix pade_numerator_odd(const Matrix& a2, const Matrix& a4, const Matrix& a6,
                                 const Matrix& a, const double* b, int order) {
    const int n = a.rows();
    Matrix u(n, n);
    if (order == 13) {
        Matrix inner = a6 * b[13] + a4 * b[11] + a2 * b[9];
        u = a6 * inner + a6 * b[7] + a4 * b[5] + a2 * b[3] + Matrix::identity(n) * b[1];
    } else {
        if (order >= 7) u += a6 * b[7];
        if (order >= 5) u += a4 * b[5];
        u += a2 * b[3] + Matrix::identity(n) * b[1];
        if (order == 9) u += a4 * a4 * b[9];
    }
    return a * u;
}

inline Matrix pade_denominator_even(const Matrix& a2, const Matrix& a4, const Matrix& a6,
                                    const double* b, int order, int n) {
    Matrix v(n, n);
    if (order == 13) {
        Matrix inner = a6 * b[12] + a4 * b[10] + a2 * b[8];
        v = a6 * inner + a6 * b[6] + a4 * b[4] + a2 * b[2] + Matrix::identity(n) * b[0];
    } else {
        if (order >= 7) v += a6 * b[6];
        if (order >= 5) v += a4 * b[4];
        v += a2 * b[2] + Matrix::identity(n) * b[0];
        if (order == 9) v += a4 * a4 * b[8];
    }
    return v;
}

} // namespace detail

/// exp(A) for a square matrix.
inline Matrix expm(const Matrix& a) {
    if (!a.square()) throw DomainError("expm: matrix must be square");
    const int n = a.rows();
    if (n == 0) return Matrix(0, 0);

    static constexpr double theta3 = 1.495585217958292e-2;
    static constexpr double theta5 = 2.539398330063230e-1;
    static constexpr double theta7 = 9.504178996162932e-1;
    static constexpr double theta9 = 2.097847961257068e0;
    static constexpr double theta13 = 5.371920351148152e0;

    static constexpr double b3[] = {120, 60, 12, 1};
    static constexpr double b5[] = {30240, 15120, 3360, 420, 30, 1};
    static constexpr double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static constexpr double b9[] = {17643225600, 8821612800, 2075673600, 302702400,
                                    30270240, 2162160, 110880, 3960, 90, 1};
    static constexpr double b13[] = {64764752532480000, 32382376266240000, 7771770303897600,
                                     1187353796428800, 129060195264000, 10559470521600,
                                     670442572800, 33522128640, 1323241920, 40840800,
                                     960960, 16380, 182, 1};

    const double norm = a.oneNorm();
    Matrix as = a;
    int squarings = 0;

    int order;
    if (norm <= theta3) order = 3;
    else if (norm <= theta5) order = 5;
    else if (norm <= theta7) order = 7;
    else if (norm <= theta9) order = 9;
    else {
        order = 13;
        if (norm > theta13) {
            squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
            as *= std::ldexp(1.0, -squarings);
        }
    }

    const double* b = order == 3 ? b3 : order == 5 ? b5 : order == 7 ? b7
                      : order == 9 ? b9 : b13;

    const Matrix a2 = as * as;
    const Matrix a4 = order >= 5 ? a2 * a2 : Matrix(n, n);
    const Matrix a6 = order >= 7 ? a4 * a2 : Matrix(n, n);

    const Matrix u = detail::pade_numerator_odd(a2, a4, a6, as, b, order);
    const Matrix v = detail::pade_denominator_even(a2, a4, a6, b, order, n);

    LuDecomposition lu = lu_factor(v - u);
    if (lu.singular) throw SingularSolveError("expm: Pade denominator is singular");
    Matrix r = lu_solve_matrix(lu, v + u);

    for (int s = 0; s < squarings; ++s) r = r * r;
    return r;
}

} // namespace pincon
