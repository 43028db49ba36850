#include "gibbstraj/channels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gibbstraj/linalg.hpp"

namespace gibbs {

namespace {

// Operator norm of the anti-Hermitian matrix G - G^dag, via the exactly
// Hermitian matrix i(G - G^dag); avoids an SVD on large superoperators.
double asymmetry_norm(const Matrix& G) {
    Matrix B = Complex(0.0, 1.0) * (G - G.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(B, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

constexpr double kUniqueFixedPointTol = 1e-11;
constexpr long kComposeKrausCap = 4096;

}  // namespace

QuantumChannel QuantumChannel::from_kraus(std::vector<Matrix> kraus, std::string label,
                                          double tol) {
    if (kraus.empty()) throw std::invalid_argument("channel '" + label + "': empty Kraus family");
    const int d = static_cast<int>(kraus.front().rows());
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& K : kraus) {
        if (K.rows() != d || K.cols() != d)
            throw std::invalid_argument("channel '" + label + "': Kraus operators must be square with equal dims");
        sum += K.adjoint() * K;
    }
    const double drift = max_abs(sum - Matrix::Identity(d, d));
    if (drift > tol) {
        std::ostringstream msg;
        msg << "channel '" << label << "': Kraus completeness violated, max |sum K^dag K - I| = " << drift;
        throw std::invalid_argument(msg.str());
    }
    QuantumChannel ch;
    ch.label_ = std::move(label);
    ch.dim_ = d;
    ch.repr_ = std::make_shared<Repr>();
    ch.repr_->kraus = std::move(kraus);
    return ch;
}

QuantumChannel QuantumChannel::from_superoperator(Matrix superop, std::string label, double tol) {
    const int d2 = static_cast<int>(superop.rows());
    if (superop.cols() != d2) throw std::invalid_argument("channel '" + label + "': superoperator must be square");
    const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(d2))));
    if (d * d != d2) throw std::invalid_argument("channel '" + label + "': superoperator dimension is not a perfect square");
    const Vector vec_id = vectorize(Matrix::Identity(d, d));
    const double drift = (superop.adjoint() * vec_id - vec_id).cwiseAbs().maxCoeff();
    if (drift > tol) {
        std::ostringstream msg;
        msg << "channel '" << label << "': superoperator is not trace preserving, residual " << drift;
        throw std::invalid_argument(msg.str());
    }
    QuantumChannel ch;
    ch.label_ = std::move(label);
    ch.dim_ = d;
    ch.repr_ = std::make_shared<Repr>();
    ch.repr_->superop = std::move(superop);
    return ch;
}

const std::vector<Matrix>& QuantumChannel::kraus() const {
    if (!repr_) throw std::logic_error("channel is empty");
    std::lock_guard<std::mutex> lock(repr_->mu);
    if (!repr_->kraus) repr_->kraus = kraus_from_choi(*repr_->superop);
    return *repr_->kraus;
}

const Matrix& QuantumChannel::superoperator() const {
    if (!repr_) throw std::logic_error("channel is empty");
    std::lock_guard<std::mutex> lock(repr_->mu);
    if (!repr_->superop) repr_->superop = kraus_superoperator(*repr_->kraus);
    return *repr_->superop;
}

Matrix QuantumChannel::apply(const Matrix& X) const {
    if (!repr_) throw std::logic_error("channel is empty");
    {
        std::lock_guard<std::mutex> lock(repr_->mu);
        if (repr_->kraus) return apply_kraus(*repr_->kraus, X);
    }
    return unvectorize(superoperator() * vectorize(X));
}

QuantumChannel glauber_channel(const LocalHamiltonian& H, double beta) {
    if (!H.is_diagonal())
        throw std::invalid_argument("glauber_channel: Hamiltonian must be diagonal in the computational basis");
    if (!std::isfinite(beta) || beta < 0.0)
        throw std::invalid_argument("glauber_channel: beta must be finite and nonnegative");
    const int n = H.n_qubits;
    const int D = H.dim();
    const RealVector energy = H.dense.diagonal().real();

    std::vector<Matrix> kraus;
    kraus.reserve(static_cast<size_t>(D) * (n + 1));
    for (int x = 0; x < D; ++x) {
        double stay = 0.0;
        for (int site = 0; site < n; ++site) {
            const int y = x ^ (1 << (n - 1 - site));  // qubit 0 = most significant bit
            const double accept = std::min(1.0, std::exp(-beta * (energy[y] - energy[x])));
            stay += (1.0 - accept) / n;
            if (accept > 0.0) {
                Matrix K = Matrix::Zero(D, D);
                K(y, x) = std::sqrt(accept / n);
                kraus.push_back(std::move(K));
            }
        }
        if (stay > 0.0) {
            Matrix K = Matrix::Zero(D, D);
            K(x, x) = std::sqrt(stay);
            kraus.push_back(std::move(K));
        }
    }
    std::ostringstream label;
    label << "glauber[beta=" << beta << "]";
    return QuantumChannel::from_kraus(std::move(kraus), label.str());
}

QuantumChannel davies_channel(const LocalHamiltonian& H, double beta, double t0,
                              const std::vector<Matrix>& jumps) {
    if (!(t0 > 0.0) || !std::isfinite(t0))
        throw std::invalid_argument("davies_channel: t0 must be positive and finite");
    const int D = H.dim();
    if (D > 128)
        throw std::invalid_argument("davies_channel: dense superoperator exponential limited to dim <= 128");

    std::vector<Matrix> jump_ops = jumps;
    if (jump_ops.empty()) {
        for (int q = 0; q < H.n_qubits; ++q)
            jump_ops.push_back(pauli_term_matrix(H.n_qubits, PauliTerm{1.0, {{q, 'X'}}}));
    }
    for (const Matrix& A : jump_ops)
        if (A.rows() != D || A.cols() != D)
            throw std::invalid_argument("davies_channel: jump operator dimension mismatch");

    const Spectrum spec = eig_hermitian(H.dense);
    const Matrix id = Matrix::Identity(D, D);
    Matrix L = Matrix::Zero(D * D, D * D);
    for (const Matrix& A : jump_ops) {
        const BohrDecomposition bd = bohr_decompose(A, spec);
        for (size_t k = 0; k < bd.frequencies.size(); ++k) {
            const Matrix& Anu = bd.components[k];
            if (max_abs(Anu) < 1e-14) continue;
            const double rate = 1.0 / (1.0 + std::exp(beta * bd.frequencies[k]));
            const Matrix M = Anu.adjoint() * Anu;
            L += rate * (kron(Anu.conjugate(), Anu)
                         - 0.5 * (kron(id, M) + kron(M.transpose(), id)));
        }
    }

    const Matrix S = (t0 * L).exp();
    std::ostringstream label;
    label << "davies[beta=" << beta << ",t0=" << t0 << "]";
    QuantumChannel ch = QuantumChannel::from_superoperator(S, label.str());
    ch.kraus();  // force Choi refactorization; throws on negativity beyond tolerance

    const GibbsState rho = gibbs_state(H, beta);
    const DBReport db = check_detailed_balance(ch, rho, 0.5, 1e-8);
    if (!db.passes) {
        std::ostringstream msg;
        msg << "davies_channel: detailed-balance certification failed (residual " << db.residual
            << ", pair residual " << db.pair_residual
            << ", fixed-point residual " << db.fixed_point_residual << ")";
        throw std::runtime_error(msg.str());
    }
    return ch;
}

QuantumChannel embed_classical(const ClassicalChain& chain) {
    const int D = chain.size;  // states |0..m|
    std::vector<Matrix> kraus;
    for (int x = 0; x < D; ++x)
        for (int y = 0; y < D; ++y)
            if (chain.transition(x, y) > 0.0) {
                Matrix K = Matrix::Zero(D, D);
                K(y, x) = std::sqrt(chain.transition(x, y));
                kraus.push_back(std::move(K));
            }
    std::ostringstream label;
    label << "classical[m=" << chain.size - 1 << "]";
    return QuantumChannel::from_kraus(std::move(kraus), label.str());
}

QuantumChannel identity_channel(int dim) {
    if (dim < 1) throw std::invalid_argument("identity_channel: dim must be positive");
    return QuantumChannel::from_kraus({Matrix::Identity(dim, dim)}, "identity");
}

QuantumChannel compose(const std::vector<QuantumChannel>& parts) {
    if (parts.empty()) throw std::invalid_argument("compose: empty channel list");
    const int d = parts.front().dim();
    for (const QuantumChannel& p : parts)
        if (p.dim() != d) throw std::invalid_argument("compose: channel dimensions differ");

    std::string label;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) label += " o ";
        label += parts[i].label();
    }

    long product_count = 1;
    for (const QuantumChannel& p : parts) {
        product_count *= static_cast<long>(p.kraus().size());
        if (product_count > kComposeKrausCap) { product_count = -1; break; }
    }

    if (product_count > 0) {
        // Fold from the right: the last listed channel acts first.
        std::vector<Matrix> acc = parts.back().kraus();
        for (int i = static_cast<int>(parts.size()) - 2; i >= 0; --i) {
            std::vector<Matrix> next;
            next.reserve(parts[i].kraus().size() * acc.size());
            for (const Matrix& A : parts[i].kraus())
                for (const Matrix& B : acc) {
                    Matrix K = A * B;
                    if (K.norm() >= 1e-14) next.push_back(std::move(K));
                }
            acc = std::move(next);
        }
        Matrix sum = Matrix::Zero(d, d);
        for (const Matrix& K : acc) sum += K.adjoint() * K;
        const double drift = max_abs(sum - Matrix::Identity(d, d));
        if (drift > 1e-9) {
            std::ostringstream msg;
            msg << "compose: completeness drift " << drift << " after pruning";
            throw std::runtime_error(msg.str());
        }
        return QuantumChannel::from_kraus(std::move(acc), label, 1e-9);
    }

    Matrix S = parts.front().superoperator();
    for (size_t i = 1; i < parts.size(); ++i) S = S * parts[i].superoperator();
    return QuantumChannel::from_superoperator(std::move(S), label);
}

QuantumChannel power_channel(const QuantumChannel& T, int r) {
    if (r < 0) throw std::invalid_argument("power_channel: exponent must be nonnegative");
    if (r == 0) return identity_channel(T.dim());
    if (r == 1) return T;
    const int d2 = T.dim() * T.dim();
    Matrix result = Matrix::Identity(d2, d2);
    Matrix base = T.superoperator();
    int e = r;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e > 0) base = base * base;
    }
    std::ostringstream label;
    label << T.label() << "^" << r;
    return QuantumChannel::from_superoperator(std::move(result), label.str());
}

Matrix superop_to_state_basis(const Matrix& S, const GibbsState& rho) {
    const Matrix& U = rho.basis();
    const int D = static_cast<int>(U.rows());
    if (S.rows() != D * D || S.cols() != D * D)
        throw std::invalid_argument("superop_to_state_basis: dimension mismatch");
    if (max_abs(U - Matrix::Identity(D, D)) == 0.0) return S;
    const Matrix W = kron(U.conjugate(), U);
    return W.adjoint() * S * W;
}

RealVector weight_diagonal(const GibbsState& rho, double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("weight_diagonal: s must lie in [0,1]");
    const RealVector& p = rho.probs();
    const int D = static_cast<int>(p.size());
    RealVector f(D * D);
    for (int j = 0; j < D; ++j)
        for (int i = 0; i < D; ++i)
            f[i + D * j] = std::pow(p[i], 1.0 - s) * std::pow(p[j], s);
    return f;
}

DBReport check_detailed_balance_superop(const Matrix& S, const GibbsState& rho, double s,
                                        double tol, bool check_fixed_point) {
    DBReport rep;
    rep.s = s;
    rep.tol = tol;

    const Matrix St = superop_to_state_basis(S, rho);
    const RealVector f = weight_diagonal(rho, s);

    const Matrix SF = St * f.asDiagonal();
    rep.pair_residual = max_abs(SF - SF.adjoint());

    const RealVector d = f.cwiseSqrt();
    const Matrix G = d.cwiseInverse().asDiagonal() * St * d.asDiagonal();
    rep.residual = asymmetry_norm(G);

    if (check_fixed_point) {
        const Matrix delta = unvectorize(S * vectorize(rho.density())) - rho.density();
        rep.fixed_point_residual = trace_norm(delta);
    }
    rep.passes = rep.residual <= tol && rep.pair_residual <= tol &&
                 rep.fixed_point_residual <= tol;
    return rep;
}

DBReport check_detailed_balance(const QuantumChannel& T, const GibbsState& rho, double s,
                                double tol) {
    if (T.dim() != rho.dim())
        throw std::invalid_argument("check_detailed_balance: dimension mismatch");
    DBReport rep = check_detailed_balance_superop(T.superoperator(), rho, s, tol, false);
    rep.fixed_point_residual = trace_norm(T.apply(rho.density()) - rho.density());
    rep.passes = rep.residual <= tol && rep.pair_residual <= tol &&
                 rep.fixed_point_residual <= tol;
    return rep;
}

GapReport spectral_gap_superop(const Matrix& S, const GibbsState& rho, double s, double db_tol) {
    GapReport rep;
    const DBReport db = check_detailed_balance_superop(S, rho, s, db_tol, false);
    rep.hermitization_residual = db.residual;

    if (db.residual <= db_tol) {
        const Matrix St = superop_to_state_basis(S, rho);
        const RealVector d = weight_diagonal(rho, s).cwiseSqrt();
        Matrix G = d.cwiseInverse().asDiagonal() * St * d.asDiagonal();
        G = 0.5 * (G + G.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
        const RealVector ev = es.eigenvalues();
        rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
        std::reverse(rep.eigenvalues.begin(), rep.eigenvalues.end());
        rep.db_certified = true;
        rep.max_imag = 0.0;
    } else {
        Eigen::ComplexEigenSolver<Matrix> es(S);
        const Vector ev = es.eigenvalues();
        std::vector<Complex> sorted(ev.data(), ev.data() + ev.size());
        std::sort(sorted.begin(), sorted.end(),
                  [](const Complex& a, const Complex& b) { return a.real() > b.real(); });
        rep.eigenvalues.reserve(sorted.size());
        for (const Complex& z : sorted) {
            rep.eigenvalues.push_back(z.real());
            rep.max_imag = std::max(rep.max_imag, std::abs(z.imag()));
        }
        rep.db_certified = false;
    }

    const std::vector<double>& ev = rep.eigenvalues;
    rep.gap = ev.size() > 1 ? std::clamp(1.0 - ev[1], 0.0, 1.0) : 1.0;
    rep.spectrum_in_01 = ev.front() <= 1.0 + 1e-9 && ev.back() >= -1e-9 &&
                         rep.max_imag <= 1e-9;
    int top_count = 0;
    for (double v : ev)
        if (v > 1.0 - kUniqueFixedPointTol) ++top_count;
    rep.unique_fixed_point = (top_count == 1);
    return rep;
}

GapReport spectral_gap(const QuantumChannel& T, const GibbsState& rho, double s, double db_tol) {
    if (T.dim() != rho.dim())
        throw std::invalid_argument("spectral_gap: dimension mismatch");
    return spectral_gap_superop(T.superoperator(), rho, s, db_tol);
}

GapReport classical_gap(const ClassicalChain& chain) {
    const int D = chain.size;
    const RealVector sqrt_pi = chain.stationary.cwiseSqrt();
    RealMatrix M = sqrt_pi.asDiagonal() * chain.transition * sqrt_pi.cwiseInverse().asDiagonal();

    GapReport rep;
    rep.hermitization_residual = (M - M.transpose()).cwiseAbs().maxCoeff();
    rep.db_certified = rep.hermitization_residual <= 1e-9;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(M, Eigen::EigenvaluesOnly);
    const RealVector ev = es.eigenvalues();
    rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::reverse(rep.eigenvalues.begin(), rep.eigenvalues.end());
    rep.gap = D > 1 ? std::clamp(1.0 - rep.eigenvalues[1], 0.0, 1.0) : 1.0;
    rep.spectrum_in_01 = rep.eigenvalues.front() <= 1.0 + 1e-9 && rep.eigenvalues.back() >= -1e-9;
    int top_count = 0;
    for (double v : rep.eigenvalues)
        if (v > 1.0 - kUniqueFixedPointTol) ++top_count;
    rep.unique_fixed_point = (top_count == 1);
    return rep;
}

MixingBounds mixing_time_bounds(double gap, double sigma_min, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("mixing_time_bounds: eps must lie in (0,1)");
    if (!(sigma_min > 0.0 && sigma_min <= 1.0))
        throw std::invalid_argument("mixing_time_bounds: sigma_min must lie in (0,1]");
    if (gap < 0.0 || gap > 1.0) throw std::invalid_argument("mixing_time_bounds: gap must lie in [0,1]");
    MixingBounds b;
    b.gap = gap;
    b.sigma_min = sigma_min;
    b.eps = eps;
    if (gap <= 1e-300) {
        b.diverged = true;
        b.lower = std::numeric_limits<double>::infinity();
        b.upper = std::numeric_limits<double>::infinity();
        return b;
    }
    b.lower = (1.0 / gap - 1.0) * std::log(1.0 / eps);
    b.upper = (1.0 / gap) * std::log(1.0 / (eps * sigma_min));
    return b;
}

MixingBounds mixing_time_bounds(const QuantumChannel& T, const GibbsState& rho, double eps,
                                double s) {
    const GapReport gr = spectral_gap(T, rho, s);
    return mixing_time_bounds(gr.gap, rho.sigma_min(), eps);
}

Matrix mixing_witness_state(const QuantumChannel& T, const GibbsState& rho, double s) {
    const int D = rho.dim();
    const Matrix St = superop_to_state_basis(T.superoperator(), rho);
    const RealVector d = weight_diagonal(rho, s).cwiseSqrt();
    Matrix G = d.cwiseInverse().asDiagonal() * St * d.asDiagonal();
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    // Eigenvalues ascend; the slowest nontrivial mode sits just below the top.
    const Vector v2 = es.eigenvectors().col(D * D - 2);

    const Matrix Yt = unvectorize(d.cwiseInverse().asDiagonal() * v2);
    const Matrix Y = rho.basis() * Yt * rho.basis().adjoint();
    const Matrix Hre = 0.5 * (Y + Y.adjoint());
    const Matrix Him = Complex(0.0, -0.5) * (Y - Y.adjoint());
    const Matrix Z = Hre.norm() >= Him.norm() ? Hre : Him;

    Eigen::SelfAdjointEigenSolver<Matrix> ez(Z);
    const RealVector lam = ez.eigenvalues();
    const int idx = std::abs(lam[0]) > std::abs(lam[D - 1]) ? 0 : D - 1;
    const Vector psi = ez.eigenvectors().col(idx);
    return psi * psi.adjoint();
}

}  // namespace gibbs
