#pragma once

// Dense complex linear algebra over small Hilbert spaces (dim <= 256):
// matrices, state vectors, validated density matrices, partial transpose /
// trace, and a cyclic-Jacobi Hermitian eigensolver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzkit {

using cxd = std::complex<double>;

inline bool finite(cxd z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Row-major dense complex matrix.
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, cxd(0.0, 0.0)) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cxd& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const cxd& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    Mat operator+(const Mat& o) const {
        require_same_shape(o);
        Mat out(rows_, cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + o.a_[i];
        return out;
    }
    Mat operator-(const Mat& o) const {
        require_same_shape(o);
        Mat out(rows_, cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - o.a_[i];
        return out;
    }
    Mat operator*(const Mat& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("Mat multiply: shape mismatch");
        Mat out(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                cxd aik = (*this)(i, k);
                if (aik == cxd(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < o.cols_; ++j)
                    out(i, j) += aik * o(k, j);
            }
        return out;
    }
    Mat operator*(cxd s) const {
        Mat out(rows_, cols_);
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * s;
        return out;
    }

    Mat dagger() const {
        Mat out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    cxd trace() const {
        cxd t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    std::vector<cxd> apply(const std::vector<cxd>& v) const {
        if (cols_ != v.size()) throw std::invalid_argument("Mat apply: shape mismatch");
        std::vector<cxd> out(rows_, cxd(0.0, 0.0));
        for (std::size_t i = 0; i < rows_; ++i) {
            cxd acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
            out[i] = acc;
        }
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (const cxd& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    // max elementwise |m - m^dagger|
    double hermiticity_defect() const {
        if (rows_ != cols_) return std::numeric_limits<double>::infinity();
        double m = 0.0;
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = r; c < cols_; ++c)
                m = std::max(m, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
        return m;
    }

    bool all_finite() const {
        for (const cxd& z : a_)
            if (!finite(z)) return false;
        return true;
    }

private:
    void require_same_shape(const Mat& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("Mat: shape mismatch");
    }

    std::size_t rows_, cols_;
    std::vector<cxd> a_;
};

inline Mat kron(const Mat& a, const Mat& b) {
    if (!a.all_finite() || !b.all_finite())
        throw std::invalid_argument("kron: non-finite operand");
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            cxd av = a(ar, ac);
            if (av == cxd(0.0, 0.0)) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = av * b(br, bc);
        }
    return out;
}

// Number of qubits for a power-of-two dimension (dim 1 -> 0 qubits).
inline std::size_t num_qubits(std::size_t dim) {
    std::size_t n = 0, d = 1;
    while (d < dim) {
        d *= 2;
        ++n;
    }
    if (d != dim) throw std::invalid_argument("dimension is not a power of two");
    return n;
}

// Normalized (unless stated otherwise) pure state; subsystem 1 is the most
// significant bit of the basis index, so basis index i (1-based) corresponds
// to the bitstring b1 b2 ... bn with i = binary + 1.
class StateVector {
public:
    explicit StateVector(std::vector<cxd> amps) : amps_(std::move(amps)) {
        if (amps_.empty()) throw std::invalid_argument("StateVector: empty");
        for (const cxd& z : amps_)
            if (!finite(z)) throw std::invalid_argument("StateVector: non-finite amplitude");
    }

    static StateVector basis(std::size_t dim, std::size_t index) {
        std::vector<cxd> a(dim, cxd(0.0, 0.0));
        a.at(index) = 1.0;
        return StateVector(std::move(a));
    }

    std::size_t dim() const { return amps_.size(); }
    const std::vector<cxd>& amps() const { return amps_; }
    cxd amp(std::size_t i) const { return amps_.at(i); }

    double norm() const {
        double s = 0.0;
        for (const cxd& z : amps_) s += std::norm(z);
        return std::sqrt(s);
    }

    void require_normalized(double tol = 1e-10) const {
        if (std::abs(norm() - 1.0) > tol)
            throw std::domain_error("StateVector: not normalized");
    }

    StateVector normalized() const {
        double n = norm();
        if (n == 0.0) throw std::domain_error("StateVector: zero vector");
        std::vector<cxd> a(amps_);
        for (cxd& z : a) z /= n;
        return StateVector(std::move(a));
    }

    // Strip the global phase: first amplitude with |a| > 1e-12 made real > 0.
    StateVector canonical() const {
        for (const cxd& z : amps_) {
            double m = std::abs(z);
            if (m > 1e-12) {
                cxd phase = std::conj(z) / m;
                std::vector<cxd> a(amps_);
                for (cxd& w : a) w *= phase;
                return StateVector(std::move(a));
            }
        }
        return *this;
    }

    cxd inner(const StateVector& o) const {  // <this|o>
        if (dim() != o.dim()) throw std::invalid_argument("inner: dimension mismatch");
        cxd s = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * o.amps_[i];
        return s;
    }

    Mat projector() const {
        Mat p(dim(), dim());
        for (std::size_t r = 0; r < dim(); ++r)
            for (std::size_t c = 0; c < dim(); ++c)
                p(r, c) = amps_[r] * std::conj(amps_[c]);
        return p;
    }

    StateVector applied(const Mat& m) const { return StateVector(m.apply(amps_)); }

private:
    std::vector<cxd> amps_;
};

inline StateVector kron(const StateVector& a, const StateVector& b) {
    std::vector<cxd> out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            out[i * b.dim() + j] = a.amp(i) * b.amp(j);
    return StateVector(std::move(out));
}

struct EigenSystem {
    std::vector<double> values;  // ascending
    Mat vectors;                 // column k is the eigenvector of values[k]
};

namespace detail {

// Cyclic Jacobi for Hermitian matrices: off-diagonal Frobenius norm < 1e-12
// or 100 sweeps, whichever comes first.
inline EigenSystem jacobi_hermitian(Mat a, bool want_vectors) {
    const std::size_t n = a.rows();
    // Work on the exactly-Hermitian average so the iteration cannot drift.
    for (std::size_t r = 0; r < n; ++r) {
        a(r, r) = cxd(a(r, r).real(), 0.0);
        for (std::size_t c = r + 1; c < n; ++c) {
            cxd avg = 0.5 * (a(r, c) + std::conj(a(c, r)));
            a(r, c) = avg;
            a(c, r) = std::conj(avg);
        }
    }
    Mat v = want_vectors ? Mat::identity(n) : Mat();

    auto offdiag_frobenius = [&]() {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                if (r != c) s += std::norm(a(r, c));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (offdiag_frobenius() < 1e-12) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double mag = std::abs(a(p, q));
                if (mag < 1e-300) continue;
                cxd phase = a(p, q) / mag;  // e^{i phi}
                double app = a(p, p).real();
                double aqq = a(q, q).real();
                double beta = (app - aqq) / (2.0 * mag);
                double t = (beta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(beta) + std::sqrt(beta * beta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                cxd se_pos = s * phase;             // s e^{i phi}
                cxd se_neg = s * std::conj(phase);  // s e^{-i phi}
                // Right-multiply by the rotation (columns p, q) ...
                for (std::size_t r = 0; r < n; ++r) {
                    cxd xp = a(r, p), xq = a(r, q);
                    a(r, p) = c * xp + se_neg * xq;
                    a(r, q) = -se_pos * xp + c * xq;
                }
                // ... then left-multiply by its adjoint (rows p, q).
                for (std::size_t r = 0; r < n; ++r) {
                    cxd xp = a(p, r), xq = a(q, r);
                    a(p, r) = c * xp + se_pos * xq;
                    a(q, r) = -se_neg * xp + c * xq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = cxd(a(p, p).real(), 0.0);
                a(q, q) = cxd(a(q, q).real(), 0.0);
                if (want_vectors) {
                    for (std::size_t r = 0; r < n; ++r) {
                        cxd xp = v(r, p), xq = v(r, q);
                        v(r, p) = c * xp + se_neg * xq;
                        v(r, q) = -se_pos * xp + c * xq;
                    }
                }
            }
        }
    }

    EigenSystem es;
    es.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
    for (std::size_t i = 0; i < n; ++i) es.values[i] = a(order[i], order[i]).real();
    if (want_vectors) {
        es.vectors = Mat(n, n);
        for (std::size_t col = 0; col < n; ++col)
            for (std::size_t r = 0; r < n; ++r)
                es.vectors(r, col) = v(r, order[col]);
    }
    return es;
}

inline void require_hermitian(const Mat& m, double tol, const char* who) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": not square");
    if (!m.all_finite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
    if (m.hermiticity_defect() > tol)
        throw std::invalid_argument(std::string(who) + ": input is not Hermitian");
}

}  // namespace detail

inline std::vector<double> herm_eigenvalues(const Mat& m) {
    detail::require_hermitian(m, 1e-8, "herm_eigenvalues");
    return detail::jacobi_hermitian(m, false).values;
}

inline EigenSystem herm_eigensystem(const Mat& m) {
    detail::require_hermitian(m, 1e-8, "herm_eigensystem");
    return detail::jacobi_hermitian(m, true);
}

// Validated density matrix: Hermitian within 1e-10, trace 1 within 1e-10,
// eigenvalues >= -1e-8 (Gershgorin fast-accept, full eigensolve fallback).
class DensityMatrix {
public:
    explicit DensityMatrix(Mat m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: not square");
        if (m_.rows() == 0) throw std::invalid_argument("DensityMatrix: empty");
        num_qubits(m_.rows());  // power-of-two check
        if (!m_.all_finite()) throw std::invalid_argument("DensityMatrix: non-finite entries");
        if (m_.hermiticity_defect() > 1e-10)
            throw std::domain_error("DensityMatrix: not Hermitian within 1e-10");
        if (std::abs(m_.trace() - cxd(1.0, 0.0)) > 1e-10)
            throw std::domain_error("DensityMatrix: trace is not 1 within 1e-10");
        if (!gershgorin_nonnegative()) {
            double min_eig = detail::jacobi_hermitian(m_, false).values.front();
            if (min_eig < -1e-8)
                throw std::domain_error("DensityMatrix: negative eigenvalue below -1e-8");
        }
    }

    std::size_t dim() const { return m_.rows(); }
    std::size_t qubits() const { return num_qubits(dim()); }
    const Mat& mat() const { return m_; }

    cxd operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
    // 1-based accessor mirroring the printed index convention (rho_{1,16} is
    // the coherence between |0000> and |1111>).
    cxd at1(std::size_t r, std::size_t c) const { return m_(r - 1, c - 1); }

private:
    bool gershgorin_nonnegative() const {
        for (std::size_t r = 0; r < m_.rows(); ++r) {
            double radius = 0.0;
            for (std::size_t c = 0; c < m_.cols(); ++c)
                if (c != r) radius += std::abs(m_(r, c));
            if (m_(r, r).real() - radius < -1e-8) return false;
        }
        return true;
    }

    Mat m_;
};

namespace detail {

// qubit k (1-based, msb-first) of basis index x with n qubits
inline unsigned bit_of(std::size_t x, std::size_t k, std::size_t n) {
    return static_cast<unsigned>((x >> (n - k)) & 1u);
}

inline void validate_subset(const std::vector<int>& subset, std::size_t n) {
    std::vector<bool> seen(n + 1, false);
    for (int s : subset) {
        if (s < 1 || static_cast<std::size_t>(s) > n)
            throw std::out_of_range("subsystem index out of range");
        if (seen[static_cast<std::size_t>(s)])
            throw std::invalid_argument("duplicate subsystem index");
        seen[static_cast<std::size_t>(s)] = true;
    }
}

}  // namespace detail

// Transpose only the tensor factors in `subset` (1-based, msb-first).
inline Mat partial_transpose(const Mat& rho, const std::vector<int>& subset) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("partial_transpose: not square");
    const std::size_t n = num_qubits(rho.rows());
    detail::validate_subset(subset, n);
    std::size_t mask = 0;
    for (int s : subset) mask |= std::size_t{1} << (n - static_cast<std::size_t>(s));
    Mat out(rho.rows(), rho.cols());
    for (std::size_t i = 0; i < rho.rows(); ++i)
        for (std::size_t j = 0; j < rho.cols(); ++j) {
            std::size_t ip = (i & ~mask) | (j & mask);
            std::size_t jp = (j & ~mask) | (i & mask);
            out(ip, jp) = rho(i, j);
        }
    return out;
}

inline Mat partial_transpose(const DensityMatrix& rho, const std::vector<int>& subset) {
    return partial_transpose(rho.mat(), subset);
}

// Trace out the factors in `subset`; remaining qubits keep msb-first order.
inline Mat partial_trace_mat(const Mat& rho, const std::vector<int>& subset) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("partial_trace: not square");
    const std::size_t n = num_qubits(rho.rows());
    detail::validate_subset(subset, n);
    std::vector<bool> traced(n + 1, false);
    for (int s : subset) traced[static_cast<std::size_t>(s)] = true;
    std::vector<std::size_t> kept;  // 1-based positions kept, ascending
    for (std::size_t k = 1; k <= n; ++k)
        if (!traced[k]) kept.push_back(k);
    const std::size_t nk = kept.size(), nt = n - nk;
    const std::size_t dk = std::size_t{1} << nk, dt = std::size_t{1} << nt;

    // embed(kept-bits a, traced-bits s) -> full index
    std::vector<std::size_t> traced_pos;
    for (std::size_t k = 1; k <= n; ++k)
        if (traced[k]) traced_pos.push_back(k);
    auto embed = [&](std::size_t a, std::size_t s) {
        std::size_t x = 0;
        for (std::size_t bi = 0; bi < nk; ++bi)
            if ((a >> (nk - 1 - bi)) & 1u) x |= std::size_t{1} << (n - kept[bi]);
        for (std::size_t bi = 0; bi < nt; ++bi)
            if ((s >> (nt - 1 - bi)) & 1u) x |= std::size_t{1} << (n - traced_pos[bi]);
        return x;
    };

    Mat out(dk, dk);
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b) {
            cxd acc = 0.0;
            for (std::size_t s = 0; s < dt; ++s) acc += rho(embed(a, s), embed(b, s));
            out(a, b) = acc;
        }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& subset) {
    return DensityMatrix(partial_trace_mat(rho.mat(), subset));
}

inline double purity(const DensityMatrix& rho) {
    double s = 0.0;
    for (std::size_t r = 0; r < rho.dim(); ++r)
        for (std::size_t c = 0; c < rho.dim(); ++c)
            s += std::norm(rho(r, c));
    return s;
}

inline double fidelity_with_pure(const DensityMatrix& rho, const StateVector& psi) {
    if (rho.dim() != psi.dim())
        throw std::invalid_argument("fidelity_with_pure: dimension mismatch");
    cxd acc = 0.0;
    for (std::size_t r = 0; r < rho.dim(); ++r)
        for (std::size_t c = 0; c < rho.dim(); ++c)
            acc += std::conj(psi.amp(r)) * rho(r, c) * psi.amp(c);
    return acc.real();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    std::vector<double> eigs = detail::jacobi_hermitian(a.mat() - b.mat(), false).values;
    double s = 0.0;
    for (double e : eigs) s += std::abs(e);
    return 0.5 * s;
}

}  // namespace ghzkit
