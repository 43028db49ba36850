#include "gibbstraj/instrument.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gibbs {

namespace {

Matrix to_basis(const Matrix& U, const Matrix& X) { return U.adjoint() * X * U; }
Matrix from_basis(const Matrix& U, const Matrix& X) { return U * X * U.adjoint(); }

}  // namespace

bool MeasurementInstrument::basis_is_identity() const {
    const int D = dim();
    return max_abs(basis - Matrix::Identity(D, D)) == 0.0;
}

Matrix MeasurementInstrument::kraus_operator(int j) const {
    if (j < 0 || j >= n_outcomes()) throw std::out_of_range("kraus_operator: outcome index");
    const Matrix A = amps.row(j).transpose().cast<Complex>().asDiagonal();
    return basis_is_identity() ? A : from_basis(basis, A);
}

std::vector<Matrix> MeasurementInstrument::kraus() const {
    std::vector<Matrix> out;
    out.reserve(n_outcomes());
    for (int j = 0; j < n_outcomes(); ++j) out.push_back(kraus_operator(j));
    return out;
}

RealMatrix MeasurementInstrument::gram() const { return amps.transpose() * amps; }

RealMatrix MeasurementInstrument::weighted_gram(double center) const {
    const RealVector weights = w.array() - center;
    return amps.transpose() * weights.asDiagonal() * amps;
}

namespace {

Matrix hadamard_channel_apply(const MeasurementInstrument& inst, const RealMatrix& G,
                              const Matrix& X) {
    if (inst.basis_is_identity()) return G.cast<Complex>().cwiseProduct(X);
    const Matrix Xt = to_basis(inst.basis, X);
    return from_basis(inst.basis, G.cast<Complex>().cwiseProduct(Xt));
}

}  // namespace

Matrix MeasurementInstrument::apply(const Matrix& X) const {
    return hadamard_channel_apply(*this, gram(), X);
}

Matrix MeasurementInstrument::apply_weighted(const Matrix& X, double center) const {
    return hadamard_channel_apply(*this, weighted_gram(center), X);
}

Matrix MeasurementInstrument::apply_masked(const Matrix& X, const std::vector<bool>& mask) const {
    if (static_cast<int>(mask.size()) != n_outcomes())
        throw std::invalid_argument("apply_masked: mask length");
    RealVector sel(n_outcomes());
    for (int j = 0; j < n_outcomes(); ++j) sel(j) = mask[j] ? 1.0 : 0.0;
    const RealMatrix G = amps.transpose() * sel.asDiagonal() * amps;
    return hadamard_channel_apply(*this, G, X);
}

double MeasurementInstrument::completeness_residual() const {
    return ((amps.array().square().colwise().sum()) - 1.0).abs().maxCoeff();
}

namespace {

Matrix gram_superoperator(const MeasurementInstrument& inst, const RealMatrix& G) {
    const int D = inst.dim();
    Vector diag(D * D);
    for (int b = 0; b < D; ++b)
        for (int a = 0; a < D; ++a) diag(a + D * b) = G(a, b);
    if (inst.basis_is_identity()) return Matrix(diag.asDiagonal());
    const Matrix Wd = kron(inst.basis.conjugate(), inst.basis);
    return Wd * diag.asDiagonal() * Wd.adjoint();
}

}  // namespace

QuantumChannel MeasurementInstrument::to_channel(double tol) const {
    return QuantumChannel::from_superoperator(gram_superoperator(*this, gram()), label, tol);
}

Matrix MeasurementInstrument::superoperator() const {
    return gram_superoperator(*this, gram());
}

Matrix MeasurementInstrument::weighted_superoperator(double center) const {
    return gram_superoperator(*this, weighted_gram(center));
}

void validate_instrument(const MeasurementInstrument& inst) {
    const int D = inst.dim();
    if (D == 0 || inst.basis.cols() != D)
        throw std::invalid_argument("instrument: basis must be square and nonempty");
    if (max_abs(inst.basis.adjoint() * inst.basis - Matrix::Identity(D, D)) > 1e-10)
        throw std::invalid_argument("instrument: basis is not unitary");
    if (inst.evals.size() != D) throw std::invalid_argument("instrument: evals length");
    if (inst.amps.cols() != D) throw std::invalid_argument("instrument: amps width");
    const auto n = inst.amps.rows();
    if (inst.omega.size() != n || inst.z.size() != n || inst.w.size() != n)
        throw std::invalid_argument("instrument: label lengths");
}

void canonicalize_basis(MeasurementInstrument& inst) {
    const int D = inst.dim();
    if (inst.basis_is_identity()) return;
    // column a must hold exactly one unimodular entry, at row pi[a]
    std::vector<int> pi(D, -1);
    std::vector<bool> taken(D, false);
    for (int a = 0; a < D; ++a) {
        for (int x = 0; x < D; ++x) {
            const double mag = std::abs(inst.basis(x, a));
            if (mag <= 1e-14) continue;
            if (std::abs(mag - 1.0) > 1e-14 || pi[a] >= 0) return;
            pi[a] = x;
        }
        if (pi[a] < 0 || taken[pi[a]]) return;
        taken[pi[a]] = true;
    }
    RealMatrix amps(inst.amps.rows(), D);
    RealVector evals(D);
    for (int a = 0; a < D; ++a) {
        amps.col(pi[a]) = inst.amps.col(a);
        evals(pi[a]) = inst.evals(a);
    }
    inst.amps = std::move(amps);
    inst.evals = std::move(evals);
    inst.basis = Matrix::Identity(D, D);
}

MeasurementInstrument projective_instrument(const Spectrum& spec, std::string label) {
    MeasurementInstrument inst;
    inst.basis = spec.vectors;
    inst.evals = spec.levels;
    inst.label = std::move(label);
    const int n = spec.n_spaces();
    inst.amps = RealMatrix::Zero(n, spec.dim());
    inst.omega = RealVector(n);
    int offset = 0;
    for (int k = 0; k < n; ++k) {
        inst.omega(k) = spec.eigenvalues[k];
        for (int r = 0; r < spec.multiplicities[k]; ++r) inst.amps(k, offset++) = 1.0;
    }
    inst.z = inst.omega;
    inst.w = inst.omega;
    canonicalize_basis(inst);
    validate_instrument(inst);
    return inst;
}

MeasurementInstrument projective_instrument(const Matrix& O, std::string label) {
    return projective_instrument(eig_hermitian(O), std::move(label));
}

RealVector outcome_probabilities(const MeasurementInstrument& inst, const Matrix& rho) {
    const Matrix rt = inst.basis_is_identity() ? rho : to_basis(inst.basis, rho);
    const RealVector d = rt.diagonal().real();
    return inst.amps.array().square().matrix() * d;
}

std::pair<Matrix, double> collapse(const MeasurementInstrument& inst, int j, const Matrix& rho) {
    if (j < 0 || j >= inst.n_outcomes()) throw std::out_of_range("collapse: outcome index");
    const Matrix rt = inst.basis_is_identity() ? rho : to_basis(inst.basis, rho);
    const RealVector a = inst.amps.row(j);
    const RealMatrix outer = a * a.transpose();
    Matrix sigma = outer.cast<Complex>().cwiseProduct(rt);
    const double p = sigma.trace().real();
    if (!(p > 0.0)) throw std::runtime_error("collapse: outcome has zero probability");
    sigma /= p;
    if (!inst.basis_is_identity()) sigma = from_basis(inst.basis, sigma);
    return {sigma, p};
}

InstrumentMoments instrument_moments(const MeasurementInstrument& inst, const Matrix& rho) {
    const Matrix rt = inst.basis_is_identity() ? rho : to_basis(inst.basis, rho);
    const RealVector d = rt.diagonal().real();
    const RealMatrix amps2 = inst.amps.array().square();
    const RealVector p = amps2 * d;

    InstrumentMoments m;
    m.expectation = inst.w.dot(p);
    m.variance = (inst.w.array() - m.expectation).square().matrix().dot(p);
    // sum_{x,y} reduction: both Kraus factors are diagonal in the shared
    // basis, so only diag(rho) enters and the double sum factorizes per
    // eigenvector into (sum_x (w_x - E) amps(x,d)^2)^2.
    const RealVector s = amps2.transpose() * inst.w;           // sum_x w_x amps(x,d)^2
    const RealVector n2 = amps2.colwise().sum();               // sum_x amps(x,d)^2
    const RealVector centered = s - m.expectation * n2;
    m.covariance = centered.array().square().matrix().dot(d);
    return m;
}

}  // namespace gibbs
