#pragma once

#include "oalg/error.hpp"
#include "oalg/matrix.hpp"
#include "oalg/ncpoly.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <vector>

namespace oalg {

struct InvalidState : Error {
    InvalidState() : Error("density matrix is not a state") {}
};

struct NoSpectralGap : Error {
    NoSpectralGap() : Error("spectrum meets the middle band (1/4, 3/4)") {}
};

struct UnitNotFound : Error {
    UnitNotFound() : Error("no unit projection found within the search length") {}
};

/// State on M_d given by a density matrix.
struct DensityState {
    std::size_t dim = 0;
    CMat rho;

    static DensityState trace_state(std::size_t d) {
        DensityState s;
        s.dim = d;
        s.rho = CMat::Identity(d, d) / static_cast<double>(d);
        return s;
    }
    static DensityState vector_state(const Eigen::VectorXcd& v) {
        DensityState s;
        s.dim = static_cast<std::size_t>(v.size());
        s.rho = v * v.adjoint() / v.squaredNorm();
        return s;
    }
};

inline void validate_state(const DensityState& phi, double tol = 1e-10) {
    const CMat& r = phi.rho;
    if (static_cast<std::size_t>(r.rows()) != phi.dim || r.rows() != r.cols())
        throw InvalidState();
    if ((r - r.adjoint()).norm() > tol) throw InvalidState();
    if (std::abs(r.trace().real() - 1.0) > tol || std::abs(r.trace().imag()) > tol)
        throw InvalidState();
    Eigen::SelfAdjointEigenSolver<CMat> es(r);
    if (es.eigenvalues().minCoeff() < -tol) throw InvalidState();
}

struct GNSResult {
    std::size_t rep_dim = 0;
    MatrixTuple rep;              // images of the generators on the GNS space
    Eigen::VectorXcd cyclic;      // class of the identity
};

namespace detail {

inline Cx hs_inner(const CMat& a, const CMat& b) {  // <a,b> = tr(b* a)
    return (b.adjoint() * a).trace();
}

/// Orthonormal basis (Hilbert-Schmidt) of the unital algebra generated by γ.
inline std::vector<CMat> algebra_basis(const MatrixTuple& gamma) {
    const std::size_t d = gamma.dim;
    std::vector<CMat> gens;
    for (const auto& g : gamma.entries) {
        gens.push_back(g);
        gens.push_back(g.adjoint());
    }
    std::vector<CMat> basis;
    auto add = [&](CMat m) {
        for (const auto& b : basis) m -= hs_inner(m, b) * b;
        double nrm = m.norm();
        if (nrm > 1e-9) {
            basis.push_back(m / nrm);
            return true;
        }
        return false;
    };
    add(CMat::Identity(d, d));
    for (std::size_t lo = 0; lo < basis.size() && basis.size() < d * d;) {
        std::size_t hi = basis.size();
        for (std::size_t i = lo; i < hi; ++i)
            for (const auto& g : gens) add(g * basis[i]);
        lo = hi;
        if (basis.size() == hi) break;
    }
    return basis;
}

}  // namespace detail

/// GNS representation from a density state: form <a,b> = tr(ρ b*a) on the
/// generated algebra, null space removed, left multiplication in an
/// orthonormal basis of the quotient.
inline GNSResult gns(const MatrixTuple& gamma, const DensityState& phi, double null_tol = 1e-10) {
    validate_state(phi);
    auto basis = detail::algebra_basis(gamma);
    const std::size_t r = basis.size();
    CMat gram(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            gram(i, j) = (phi.rho * basis[i].adjoint() * basis[j]).trace();
    // gram(i,j) = <b_j, b_i>_phi; hermitian PSD
    Eigen::SelfAdjointEigenSolver<CMat> es(gram);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) > null_tol) keep.push_back(k);
    CMat w(r, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c)
        w.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()(keep[c]));

    GNSResult out;
    out.rep_dim = keep.size();
    out.rep.dim = out.rep_dim;
    for (const auto& g : gamma.entries) {
        CMat lmul(r, r);  // coords of g * b_j in the span basis
        for (std::size_t j = 0; j < r; ++j) {
            CMat gj = g * basis[j];
            for (std::size_t i = 0; i < r; ++i) lmul(i, j) = detail::hs_inner(gj, basis[i]);
        }
        out.rep.entries.push_back(w.adjoint() * gram * lmul * w);
    }
    Eigen::VectorXcd ident = Eigen::VectorXcd::Zero(r);
    for (std::size_t i = 0; i < r; ++i)
        ident(i) = detail::hs_inner(CMat::Identity(gamma.dim, gamma.dim), basis[i]);
    out.cyclic = w.adjoint() * gram * ident;
    return out;
}

// ---------------------------------------------------------------------------
// Dense-element enumerations
// ---------------------------------------------------------------------------

inline CMat sa_enum(const MatrixTuple& gamma, std::size_t n) {
    CMat p = eval(enum_poly(n), gamma);
    return 0.5 * (p + p.adjoint());
}

inline CMat un_enum(const MatrixTuple& gamma, std::size_t n) {
    return exp_i_selfadjoint(sa_enum(gamma, n));
}

inline CMat pos_enum(const MatrixTuple& gamma, std::size_t n) {
    CMat p = eval(enum_poly(n), gamma);
    return p.adjoint() * p;
}

/// One step of the spectral shaping function: fixes [., 0] at 0 and [1, .) at
/// 1, contracts toward {0,1} outside the middle band, fixes 1/2.
inline double proj_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x <= 0.25) return x / 2.0;
    if (x <= 0.75) return 1.5 * x - 0.25;
    if (x <= 1.0) return 1.0 - (1.0 - x) / 2.0;
    return 1.0;
}

/// Iterates proj_step on the spectrum; converges to the spectral projection of
/// [3/4, inf) when the spectrum avoids the middle band.
inline CMat proj_iter(const CMat& a, double tol = 1e-9, std::size_t max_iter = 60) {
    Eigen::SelfAdjointEigenSolver<CMat> es(a);
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index k = 0; k < lam.size(); ++k)
        if (lam(k) > 0.25 + tol && lam(k) < 0.75 - tol) throw NoSpectralGap();
    Eigen::VectorXcd fixed(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        double x = lam(k);
        std::size_t it = 0;
        while (x > 1e-13 && x < 1.0 - 1e-13) {
            x = proj_step(x);
            if (++it > max_iter) throw NoSpectralGap();
        }
        fixed(k) = x < 0.5 ? 0.0 : 1.0;
    }
    return es.eigenvectors() * fixed.asDiagonal() * es.eigenvectors().adjoint();
}

/// Scans projections from pos_enum + proj_iter and returns the first acting as
/// a two-sided unit on the generators within tol.
inline std::pair<CMat, double> unit_detect(const MatrixTuple& gamma, std::size_t search_len,
                                           double tol) {
    for (std::size_t m = 0; m < search_len; ++m) {
        CMat p;
        try {
            p = proj_iter(pos_enum(gamma, m));
        } catch (const NoSpectralGap&) {
            continue;
        }
        double resid = 0.0;
        for (const auto& g : gamma.entries) {
            resid = std::max(resid, opnorm(p * g - g));
            resid = std::max(resid, opnorm(g * p - g));
        }
        if (resid <= tol) return {p, resid};
    }
    throw UnitNotFound();
}

// ---------------------------------------------------------------------------
// Amplification, tensor, unitization
// ---------------------------------------------------------------------------

/// Fixed bijection filling an n x n index block from a single index; entries
/// reduced modulo the tuple length.
inline std::vector<std::size_t> beta_block(std::size_t l, std::size_t n, std::size_t len) {
    auto tup = unpack_tuple(BigInt(l), n * n);
    std::vector<std::size_t> out(n * n);
    for (std::size_t i = 0; i < n * n; ++i) out[i] = to_u64(tup[i] % len);
    return out;
}

/// Entry l of the amplified tuple is the n x n block matrix with block (i,j)
/// drawn from the input tuple via beta_block.
inline MatrixTuple amplify(const MatrixTuple& gamma, std::size_t n, std::size_t out_len = 0) {
    const std::size_t len = gamma.entries.size();
    if (out_len == 0) out_len = len;
    MatrixTuple out;
    out.dim = gamma.dim * n;
    const std::size_t d = gamma.dim;
    for (std::size_t l = 0; l < out_len; ++l) {
        auto idx = beta_block(l, n, len);
        CMat m = CMat::Zero(out.dim, out.dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m.block(i * d, j * d, d, d) = gamma.entries[idx[i * n + j]];
        out.entries.push_back(std::move(m));
    }
    return out;
}

/// The plain diagonal embedding a -> diag(a, ..., a).
inline CMat diag_embed(const CMat& a, std::size_t n) {
    return kron(CMat::Identity(n, n), a);
}

/// Interleaved Kronecker products: output index k (0-based) decomposes as
/// k+1 = 2^m (2n+1) and picks entries m, n of the factors (cyclically).
inline MatrixTuple tensor(const MatrixTuple& a, const MatrixTuple& b, std::size_t out_len = 0) {
    const std::size_t la = a.entries.size(), lb = b.entries.size();
    if (out_len == 0)
        out_len = la < 16 ? (std::size_t{1} << (la - 1)) * (2 * lb - 1) : la * lb;
    MatrixTuple out;
    out.dim = a.dim * b.dim;
    for (std::size_t k = 0; k < out_len; ++k) {
        std::size_t v = k + 1, m = 0;
        while ((v & 1) == 0) {
            v >>= 1;
            ++m;
        }
        std::size_t n = (v - 1) / 2;
        out.entries.push_back(kron(a.entries[m % la], b.entries[n % lb]));
    }
    return out;
}

/// Embeds each entry as diag(entry, 0) in dimension d+1 and prepends the
/// (d+1)-identity as generator 0.
inline MatrixTuple unitize(const MatrixTuple& gamma) {
    MatrixTuple out;
    out.dim = gamma.dim + 1;
    out.entries.push_back(CMat::Identity(out.dim, out.dim));
    for (const auto& g : gamma.entries) {
        CMat m = CMat::Zero(out.dim, out.dim);
        m.block(0, 0, gamma.dim, gamma.dim) = g;
        out.entries.push_back(std::move(m));
    }
    return out;
}

}  // namespace oalg
