#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pincon/errors.hpp"
#include "pincon/graph.hpp"
#include "pincon/matrix.hpp"

namespace pincon {

// ---------------------------------------------------------------------------
// Symmetric eigenproblem: cyclic Jacobi
// ---------------------------------------------------------------------------

struct SymmetricEigen {
    Vector values;  // ascending
    Matrix vectors; // columns match values
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius mass drops
/// below relTol * ||M||_F of the input.
inline SymmetricEigen jacobi_eigen_sym(Matrix m, double relTol = 1e-13) {
    if (!m.square()) throw DomainError("jacobi_eigen_sym: matrix must be square");
    const int n = m.rows();
    Matrix v = Matrix::identity(n);
    if (n <= 1) {
        SymmetricEigen out{Vector(n), v};
        if (n == 1) out.values[0] = m(0, 0);
        return out;
    }

    const double stop = relTol * m.frobeniusNorm();
    auto offNorm = [&m, n]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
        return std::sqrt(2.0 * s);
    };

    const int maxSweeps = 64;
    int sweep = 0;
    while (offNorm() > stop) {
        if (++sweep > maxSweeps)
            throw ConvergenceError("jacobi_eigen_sym: no convergence in " +
                                   std::to_string(maxSweeps) + " sweeps");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return m(a, a) < m(b, b); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (int c = 0; c < n; ++c) {
        out.values[c] = m(idx[c], idx[c]);
        for (int r = 0; r < n; ++r) out.vectors(r, c) = v(r, idx[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// General eigenvalues: Householder Hessenberg reduction + complex
// single-shift QR with deflation
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix hessenberg(Matrix a) {
    const int n = a.rows();
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
        if (scale == 0.0) continue;
        Vector u(n, 0.0);
        double sigma = 0.0;
        for (int i = k + 1; i < n; ++i) {
            u[i] = a(i, k) / scale;
            sigma += u[i] * u[i];
        }
        double alpha = std::sqrt(sigma);
        if (u[k + 1] > 0.0) alpha = -alpha;
        const double beta = sigma - u[k + 1] * alpha;
        if (beta == 0.0) continue;
        u[k + 1] -= alpha;
        // A <- P A P with P = I - u u^T / beta
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = k + 1; i < n; ++i) s += u[i] * a(i, j);
            s /= beta;
            for (int i = k + 1; i < n; ++i) a(i, j) -= s * u[i];
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += a(i, j) * u[j];
            s /= beta;
            for (int j = k + 1; j < n; ++j) a(i, j) -= s * u[j];
        }
        a(k + 1, k) = alpha * scale;
        for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
    return a;
}

using Cplx = std::complex<double>;

struct Givens {
    double c;
    Cplx s;
};

inline Givens make_givens(Cplx f, Cplx g) {
    if (std::abs(g) == 0.0) return {1.0, Cplx(0.0)};
    if (std::abs(f) == 0.0) return {0.0, std::conj(g) / std::abs(g)};
    const double d = std::sqrt(std::norm(f) + std::norm(g));
    const Cplx fs = f / std::abs(f);
    return {std::abs(f) / d, fs * std::conj(g) / d};
}

inline std::pair<Cplx, Cplx> eig2x2(Cplx a, Cplx b, Cplx c, Cplx d) {
    const Cplx tr = a + d;
    const Cplx disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

} // namespace detail

/// All eigenvalues of a square real matrix (dense method, n <= 512),
/// sorted by real part then imaginary part.
inline std::vector<std::complex<double>> general_eigenvalues(const Matrix& m) {
    using detail::Cplx;
    if (!m.square()) throw DomainError("general_eigenvalues: matrix must be square");
    const int n = m.rows();
    if (n > 512) throw DomainError("general_eigenvalues: n > 512 not supported");
    std::vector<Cplx> eigs;
    if (n == 0) return eigs;
    if (n == 1) return {Cplx(m(0, 0))};

    const Matrix hr = detail::hessenberg(m);
    std::vector<std::vector<Cplx>> h(n, std::vector<Cplx>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h[i][j] = Cplx(hr(i, j));

    const double eps = 4.0 * std::numeric_limits<double>::epsilon();
    const double floor = std::numeric_limits<double>::min() / eps;
    auto negligible = [&](int k) {
        return std::abs(h[k][k - 1]) <=
               eps * (std::abs(h[k - 1][k - 1]) + std::abs(h[k][k])) + floor;
    };

    const long maxIters = 100L * n;
    long iters = 0;
    int hi = n - 1;
    int stuck = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eigs.push_back(h[0][0]);
            break;
        }
        if (negligible(hi)) {
            eigs.push_back(h[hi][hi]);
            --hi;
            stuck = 0;
            continue;
        }
        int lo = hi;
        while (lo > 0 && !negligible(lo)) --lo;
        if (hi - lo == 1) {
            auto [e1, e2] = detail::eig2x2(h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi]);
            eigs.push_back(e1);
            eigs.push_back(e2);
            hi = lo - 1;
            stuck = 0;
            continue;
        }
        if (++iters > maxIters)
            throw ConvergenceError("general_eigenvalues: shifted QR exceeded " +
                                   std::to_string(maxIters) + " iterations");

        // Wilkinson shift from the trailing 2x2; exceptional shift when a
        // deflation refuses to happen.
        Cplx mu;
        if (++stuck % 24 == 0) {
            mu = h[hi][hi] + Cplx(1.5 * std::abs(h[hi][hi - 1]));
        } else {
            auto [mu1, mu2] = detail::eig2x2(h[hi - 1][hi - 1], h[hi - 1][hi],
                                             h[hi][hi - 1], h[hi][hi]);
            mu = std::abs(mu1 - h[hi][hi]) < std::abs(mu2 - h[hi][hi]) ? mu1 : mu2;
        }

        // Explicit shifted QR sweep on the active window: H <- R Q + mu I.
        const int w = hi - lo + 1;
        std::vector<detail::Givens> rot(w - 1);
        for (int i = lo; i <= hi; ++i) h[i][i] -= mu;
        for (int k = lo; k < hi; ++k) {
            const auto g = detail::make_givens(h[k][k], h[k + 1][k]);
            rot[k - lo] = g;
            for (int j = k; j <= hi; ++j) {
                const Cplx t1 = h[k][j], t2 = h[k + 1][j];
                h[k][j] = g.c * t1 + g.s * t2;
                h[k + 1][j] = -std::conj(g.s) * t1 + g.c * t2;
            }
        }
        for (int k = lo; k < hi; ++k) {
            const auto g = rot[k - lo];
            for (int i = lo; i <= std::min(k + 2, hi); ++i) {
                const Cplx t1 = h[i][k], t2 = h[i][k + 1];
                h[i][k] = g.c * t1 + std::conj(g.s) * t2;
                h[i][k + 1] = -g.s * t1 + g.c * t2;
            }
        }
        for (int i = lo; i <= hi; ++i) h[i][i] += mu;
    }

    std::sort(eigs.begin(), eigs.end(), [](const Cplx& a, const Cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eigs;
}

// ---------------------------------------------------------------------------
// Left null vector and the spectral gap of Xi L + L^T Xi
// ---------------------------------------------------------------------------

/// Normalized left null vector of the Laplacian: xi^T L = 0, sum xi = 1,
/// supported on the root block. Solved by elimination with partial
/// pivoting on the root block's transpose, with the redundant last
/// equation replaced by the normalization row.
inline Vector left_null_vector(const Laplacian& lap) {
    if (lap.classification == Connectivity::NoRoot)
        throw NoRootError("left_null_vector: graph has no root component");
    const std::vector<int> root = lap.rootVertices();
    const int p = static_cast<int>(root.size());
    const int n = lap.n();

    Matrix sys = lap.entries.gather(root, root).transposed();
    for (int j = 0; j < p; ++j) sys(p - 1, j) = 1.0;
    Vector rhs(p, 0.0);
    rhs[p - 1] = 1.0;

    const LuDecomposition lu = lu_factor(std::move(sys));
    if (lu.singular)
        throw SingularSolveError("left_null_vector: root block is numerically singular");
    const Vector xiRoot = lu_solve(lu, rhs);

    Vector xi(n, 0.0);
    for (int a = 0; a < p; ++a) xi[root[a]] = xiRoot[a];

    double maxAbs = 0.0;
    for (double v : xi) maxAbs = std::max(maxAbs, std::abs(v));
    for (double& v : xi)
        if (std::abs(v) <= 1e-14 * maxAbs) v = 0.0;

    // Residual gate on the full Laplacian.
    double resid = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += xi[i] * lap.entries(i, j);
        resid = std::max(resid, std::abs(s));
    }
    const double scale = lap.entries.infNorm();
    if (resid > 1e-10 * (scale > 0.0 ? scale : 1.0))
        throw SingularSolveError("left_null_vector: residual " + std::to_string(resid) +
                                 " exceeds tolerance");
    for (double v : xi)
        if (v < 0.0)
            throw SingularSolveError("left_null_vector: negative component (defective input)");
    return xi;
}

/// Smallest positive eigenvalue of Xi L + L^T Xi restricted to the root
/// block. The structural zero is identified by magnitude below
/// tau0 = p * ||M||_inf * 1e-12 plus an eigenvector-angle test against
/// the all-ones direction.
inline double lambda2(const Laplacian& lap, const Vector& xi) {
    if (lap.classification == Connectivity::NoRoot)
        throw NoRootError("lambda2: graph has no root component");
    const std::vector<int> root = lap.rootVertices();
    const int p = static_cast<int>(root.size());
    if (p < 2)
        throw DomainError("lambda2: undefined for a single-vertex root block");

    Matrix m(p, p);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            const double v = xi[root[a]] * lap.entries(root[a], root[b]) +
                             xi[root[b]] * lap.entries(root[b], root[a]);
            m(a, b) = v;
        }

    const SymmetricEigen eig = jacobi_eigen_sym(m, 1e-13);
    const double tau0 = p * m.infNorm() * 1e-12;

    int zeroIndex = -1, zeroCount = 0;
    for (int i = 0; i < p; ++i) {
        if (eig.values[i] <= tau0) {
            ++zeroCount;
            zeroIndex = i;
        }
    }
    if (zeroCount != 1)
        throw DegenerateGapError("lambda2: " + std::to_string(zeroCount) +
                                 " eigenvalues below tau0; root block is not irreducible");

    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < p; ++r) {
        const double v = eig.vectors(r, zeroIndex);
        sum += v;
        sq += v * v;
    }
    const double cosAngle = std::min(1.0, std::abs(sum) / (std::sqrt(sq) * std::sqrt(double(p))));
    if (std::acos(cosAngle) >= 1e-6)
        throw DegenerateGapError("lambda2: null eigenvector is not aligned with the "
                                 "all-ones direction");

    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i)
        if (eig.values[i] > tau0) best = std::min(best, eig.values[i]);
    return best;
}

/// Certificate inputs derived from the Laplacian spectrum.
struct SpectralData {
    Vector xi;
    double lambda2 = 0.0;          // unset when degenerateRoot
    double maxXi = 0.0;
    std::vector<int> rootSupport;  // indices with xi > 0
    bool degenerateRoot = false;   // single-vertex root: lambda2 bypassed
    double xiResidual = 0.0;       // ||xi^T L||_inf
};

inline SpectralData compute_spectral(const Laplacian& lap) {
    SpectralData sd;
    sd.xi = left_null_vector(lap);
    const int n = lap.n();
    for (int i = 0; i < n; ++i) {
        if (sd.xi[i] > 0.0) sd.rootSupport.push_back(i);
        sd.maxXi = std::max(sd.maxXi, sd.xi[i]);
    }
    double resid = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += sd.xi[i] * lap.entries(i, j);
        resid = std::max(resid, std::abs(s));
    }
    sd.xiResidual = resid;
    if (lap.blockSizes.front() < 2) {
        sd.degenerateRoot = true;
    } else {
        sd.lambda2 = lambda2(lap, sd.xi);
    }
    return sd;
}

// ---------------------------------------------------------------------------
// M-matrix diagnostics for non-root blocks
// ---------------------------------------------------------------------------

struct MmatrixDiagnostic {
    int blockIndex = 0;        // 2-based position in the block list
    double abscissa = 0.0;     // min Re(mu) over the block's eigenvalues
    double boundK = 1.0;       // ||e^{-Bt}|| <= K e^{-abscissa t}
    bool diagonalizable = true;
};

namespace detail {

/// Solve (B - mu I) v ~ 0 by inverse iteration with a complex LU.
inline std::vector<Cplx> eigenvector_for(const Matrix& b, Cplx mu) {
    const int p = b.rows();
    const double scale = std::max(1.0, b.maxAbs());
    std::vector<std::vector<Cplx>> a(p, std::vector<Cplx>(p));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a[i][j] = Cplx(b(i, j)) - (i == j ? mu : Cplx(0.0));
    // Nudge off the exact eigenvalue so the factorization stays usable.
    for (int i = 0; i < p; ++i) a[i][i] += Cplx(1e-11 * scale);

    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < p; ++k) {
        int piv = k;
        for (int i = k + 1; i < p; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(perm[k], perm[piv]);
        if (std::abs(a[k][k]) == 0.0) a[k][k] = Cplx(1e-300);
        for (int i = k + 1; i < p; ++i) {
            const Cplx f = a[i][k] / a[k][k];
            a[i][k] = f;
            for (int j = k + 1; j < p; ++j) a[i][j] -= f * a[k][j];
        }
    }
    auto solve = [&](std::vector<Cplx> rhs) {
        std::vector<Cplx> x(p);
        for (int i = 0; i < p; ++i) x[i] = rhs[perm[i]];
        for (int i = 1; i < p; ++i)
            for (int j = 0; j < i; ++j) x[i] -= a[i][j] * x[j];
        for (int i = p - 1; i >= 0; --i) {
            for (int j = i + 1; j < p; ++j) x[i] -= a[i][j] * x[j];
            x[i] /= a[i][i];
        }
        return x;
    };

    std::vector<Cplx> v(p);
    for (int i = 0; i < p; ++i) v[i] = Cplx(std::cos(i + 1.0), std::sin(0.5 * i + 0.25));
    for (int pass = 0; pass < 3; ++pass) {
        v = solve(std::move(v));
        double nrm = 0.0;
        for (const Cplx& c : v) nrm += std::norm(c);
        nrm = std::sqrt(nrm);
        for (Cplx& c : v) c /= nrm;
    }
    return v;
}

} // namespace detail

/// Decay diagnostic for one diagonal block (data-level helper; blockIndex
/// is carried through for reporting).
inline MmatrixDiagnostic block_diagnostic(const Matrix& block, int blockIndex) {
    using detail::Cplx;
    MmatrixDiagnostic d;
    d.blockIndex = blockIndex;
    const int p = block.rows();
    const std::vector<Cplx> eigs = general_eigenvalues(block);
    d.abscissa = std::numeric_limits<double>::infinity();
    for (const Cplx& e : eigs) d.abscissa = std::min(d.abscissa, e.real());
    if (p == 1) {
        d.boundK = 1.0;
        return d;
    }
    const double scale = std::max(1.0, block.maxAbs());
    for (int i = 0; i < p && d.diagonalizable; ++i)
        for (int j = i + 1; j < p; ++j)
            if (std::abs(eigs[i] - eigs[j]) <= 1e-8 * scale) {
                d.diagonalizable = false;
                break;
            }
    if (!d.diagonalizable) {
        d.boundK = std::numeric_limits<double>::quiet_NaN();
        return d;
    }
    // K = Frobenius condition number of the column-normalized eigenvector
    // matrix.
    std::vector<std::vector<Cplx>> v(p, std::vector<Cplx>(p));
    for (int c = 0; c < p; ++c) {
        const std::vector<Cplx> vec = detail::eigenvector_for(block, eigs[c]);
        for (int r = 0; r < p; ++r) v[r][c] = vec[r];
    }
    // Invert by Gauss-Jordan with partial pivoting.
    std::vector<std::vector<Cplx>> inv(p, std::vector<Cplx>(p, Cplx(0.0)));
    for (int i = 0; i < p; ++i) inv[i][i] = 1.0;
    auto vv = v;
    for (int k = 0; k < p; ++k) {
        int piv = k;
        for (int i = k + 1; i < p; ++i)
            if (std::abs(vv[i][k]) > std::abs(vv[piv][k])) piv = i;
        std::swap(vv[k], vv[piv]);
        std::swap(inv[k], inv[piv]);
        const Cplx d0 = vv[k][k];
        for (int j = 0; j < p; ++j) {
            vv[k][j] /= d0;
            inv[k][j] /= d0;
        }
        for (int i = 0; i < p; ++i) {
            if (i == k) continue;
            const Cplx f = vv[i][k];
            if (f == Cplx(0.0)) continue;
            for (int j = 0; j < p; ++j) {
                vv[i][j] -= f * vv[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    double nv = 0.0, ni = 0.0;
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            nv += std::norm(v[i][j]);
            ni += std::norm(inv[i][j]);
        }
    d.boundK = std::sqrt(nv) * std::sqrt(ni);
    return d;
}

/// Diagnostics for every non-root diagonal block of a spanning-tree
/// Laplacian. Strongly connected graphs have none.
inline std::vector<MmatrixDiagnostic> mmatrix_diagnostics(const Laplacian& lap) {
    if (lap.classification == Connectivity::NoRoot)
        throw NoRootError("mmatrix_diagnostics: graph has no root component");
    std::vector<MmatrixDiagnostic> out;
    int offset = lap.blockSizes.front();
    for (std::size_t k = 1; k < lap.blockSizes.size(); ++k) {
        const int p = lap.blockSizes[k];
        std::vector<int> idx(lap.permutation.begin() + offset,
                             lap.permutation.begin() + offset + p);
        out.push_back(block_diagnostic(lap.entries.gather(idx, idx),
                                       static_cast<int>(k) + 1));
        offset += p;
    }
    return out;
}

} // namespace pincon
