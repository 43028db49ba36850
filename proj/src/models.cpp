#include "gibbstraj/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gibbs {

namespace {

Matrix pauli_single(char p) {
    Matrix M(2, 2);
    switch (p) {
        case 'X': M << 0, 1, 1, 0; break;
        case 'Y': M << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0); break;
        case 'Z': M << 1, 0, 0, -1; break;
        default: {
            std::ostringstream os;
            os << "unknown Pauli label '" << p << "' (expected X, Y or Z)";
            throw std::invalid_argument(os.str());
        }
    }
    return M;
}

double log_sum_exp(const RealVector& x) {
    const double m = x.maxCoeff();
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::exp(x(i) - m);
    return m + std::log(s);
}

}  // namespace

bool LocalHamiltonian::is_diagonal(double tol) const {
    Matrix off = dense;
    off.diagonal().setZero();
    return max_abs(off) <= tol * std::max(1.0, max_abs(dense));
}

Matrix pauli_term_matrix(int n_qubits, const PauliTerm& term) {
    Matrix M = Matrix::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q) {
        auto it = term.paulis.find(q);
        M = kron(M, it == term.paulis.end() ? Matrix::Identity(2, 2) : pauli_single(it->second));
    }
    return term.coefficient * M;
}

LocalHamiltonian build_hamiltonian(int n_qubits, const std::vector<PauliTerm>& terms) {
    if (n_qubits < 1 || n_qubits > 12)
        throw std::invalid_argument("build_hamiltonian: n_qubits out of supported range [1,12]");
    LocalHamiltonian H;
    H.n_qubits = n_qubits;
    H.terms = terms;
    H.kappa = static_cast<int>(terms.size());
    H.dense = Matrix::Zero(1 << n_qubits, 1 << n_qubits);
    for (const PauliTerm& t : terms) {
        if (!std::isfinite(t.coefficient))
            throw std::invalid_argument("build_hamiltonian: non-finite coefficient");
        for (const auto& [q, p] : t.paulis) {
            if (q < 0 || q >= n_qubits) {
                std::ostringstream os;
                os << "build_hamiltonian: qubit index " << q << " out of range for n=" << n_qubits;
                throw std::invalid_argument(os.str());
            }
            (void)p;
        }
        H.dense += pauli_term_matrix(n_qubits, t);
    }
    return H;
}

LocalHamiltonian ising3(double alpha, double h, double gamma) {
    std::vector<PauliTerm> terms;
    terms.push_back({-alpha, {{0, 'Z'}, {1, 'Z'}}});
    terms.push_back({-h, {{0, 'Z'}}});
    terms.push_back({-h, {{1, 'Z'}}});
    terms.push_back({-gamma, {{2, 'Z'}}});
    return build_hamiltonian(3, terms);
}

ClassicalChain birth_death(int m, double beta) {
    if (m < 2) throw std::invalid_argument("birth_death: need m >= 2");
    if (!(beta > 0.0)) throw std::invalid_argument("birth_death: need beta > 0 (p > q)");
    const double p = 1.0 / (1.0 + std::exp(-beta));   // move toward |0>
    const double q = 1.0 - p;                         // move toward |m>

    ClassicalChain chain;
    chain.size = m + 1;
    chain.beta = beta;
    chain.transition = RealMatrix::Zero(m + 1, m + 1);
    for (int k = 0; k <= m; ++k) {
        if (k > 0) chain.transition(k, k - 1) = p;
        else chain.transition(0, 0) = p;              // stay instead of stepping below |0>
        if (k < m) chain.transition(k, k + 1) = q;
        else chain.transition(m, m) = q;              // stay instead of stepping above |m>
    }

    chain.stationary = RealVector(m + 1);
    for (int k = 0; k <= m; ++k) chain.stationary(k) = std::exp(-beta * k);
    chain.stationary /= chain.stationary.sum();
    return chain;
}

GibbsState::GibbsState(RealVector energies, Matrix basis, double beta)
    : beta_(beta),
      energies_(std::move(energies)),
      basis_(std::move(basis)),
      power_cache_(std::make_shared<std::pair<std::mutex, std::map<double, Matrix>>>()) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("GibbsState: beta must be finite and >= 0");
    log_partition_ = log_sum_exp(-beta_ * energies_);
    probs_ = (-beta_ * energies_.array() - log_partition_).exp();
    if (!probs_.allFinite() || probs_.minCoeff() <= 0.0)
        throw std::range_error("GibbsState: Gibbs weights overflow/underflow");
    sigma_min_ = probs_.minCoeff();
    rho_ = basis_ * probs_.asDiagonal() * basis_.adjoint();
}

Matrix GibbsState::power(double s) const {
    {
        std::lock_guard<std::mutex> lock(power_cache_->first);
        auto it = power_cache_->second.find(s);
        if (it != power_cache_->second.end()) return it->second;
    }
    RealVector ps = (s * (-beta_ * energies_.array() - log_partition_)).exp();
    Matrix result = basis_ * ps.asDiagonal() * basis_.adjoint();
    std::lock_guard<std::mutex> lock(power_cache_->first);
    power_cache_->second.emplace(s, result);
    return result;
}

GibbsState gibbs_state(const Matrix& H, double beta) {
    Spectrum spec = eig_hermitian(H);
    return GibbsState(spec.levels, spec.vectors, beta);
}

GibbsState gibbs_state(const LocalHamiltonian& H, double beta) {
    return gibbs_state(H.dense, beta);
}

GibbsState classical_gibbs(const ClassicalChain& chain) {
    RealVector energies(chain.size);
    for (int k = 0; k < chain.size; ++k) energies(k) = k;
    return GibbsState(energies, Matrix::Identity(chain.size, chain.size), chain.beta);
}

Complex weighted_inner(const Matrix& A, const Matrix& B, const GibbsState& rho, double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("weighted_inner: s must lie in [0,1]");
    if (A.rows() != rho.dim() || B.rows() != rho.dim())
        throw std::invalid_argument("weighted_inner: dimension mismatch");
    if (rho.sigma_min() <= 0.0 && s != 0.0 && s != 1.0)
        throw std::runtime_error("weighted_inner: rho is singular, fractional powers undefined");
    return weighted_inner_raw(A, B, rho.power(1.0 - s), rho.power(s));
}

Complex weighted_inner_star(const Matrix& A, const Matrix& B, const GibbsState& rho, double s) {
    if (s < 0.0 || s > 1.0) throw std::invalid_argument("weighted_inner_star: s must lie in [0,1]");
    if (rho.sigma_min() <= 0.0)
        throw std::runtime_error("weighted_inner_star: rho is singular");
    return weighted_inner_raw(A, B, rho.power(s - 1.0), rho.power(-s));
}

int BohrDecomposition::index_of(double nu, double tol) const {
    for (size_t i = 0; i < frequencies.size(); ++i)
        if (std::abs(frequencies[i] - nu) <= tol) return static_cast<int>(i);
    return -1;
}

Matrix BohrDecomposition::sum() const {
    if (components.empty()) return Matrix();
    Matrix O = Matrix::Zero(components.front().rows(), components.front().cols());
    for (const Matrix& c : components) O += c;
    return O;
}

BohrDecomposition bohr_decompose(const Matrix& O, const Spectrum& H_spec, double tol) {
    if (O.rows() != H_spec.dim() || O.cols() != H_spec.dim())
        throw std::invalid_argument("bohr_decompose: dimension mismatch");
    const int K = H_spec.n_spaces();
    double scale = std::max(std::abs(H_spec.eigenvalues.front()), std::abs(H_spec.eigenvalues.back()));
    const double cluster = tol >= 0.0 ? tol : 1e-9 * std::max(1.0, scale);

    const int d = H_spec.dim();

    // Distinct nu = E_i - E_j values, gap-clustered at `cluster`, with nu = 0
    // (the diagonal part) always present.
    std::vector<double> raw;
    raw.push_back(0.0);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            if (i != j) raw.push_back(H_spec.eigenvalues[i] - H_spec.eigenvalues[j]);
    std::sort(raw.begin(), raw.end());

    BohrDecomposition bohr;
    size_t start = 0;
    for (size_t k = 1; k <= raw.size(); ++k) {
        if (k == raw.size() || raw[k] - raw[k - 1] > cluster) {
            double rep = 0.0;
            for (size_t t = start; t < k; ++t) rep += raw[t];
            rep /= double(k - start);
            // snap the cluster containing 0 to exactly 0
            if (raw[start] <= 0.0 && raw[k - 1] >= 0.0) rep = 0.0;
            bohr.frequencies.push_back(rep);
            bohr.components.push_back(Matrix::Zero(d, d));
            start = k;
        }
    }

    auto nearest = [&](double nu) {
        int best = 0;
        double dist = std::abs(bohr.frequencies[0] - nu);
        for (size_t t = 1; t < bohr.frequencies.size(); ++t) {
            const double dd = std::abs(bohr.frequencies[t] - nu);
            if (dd < dist) { dist = dd; best = static_cast<int>(t); }
        }
        return best;
    };
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            const double nu = (i == j) ? 0.0 : H_spec.eigenvalues[i] - H_spec.eigenvalues[j];
            bohr.components[nearest(nu)] += H_spec.projectors[i] * O * H_spec.projectors[j];
        }
    return bohr;
}

BohrDecomposition bohr_decompose(const Matrix& O, const LocalHamiltonian& H, double tol) {
    return bohr_decompose(O, eig_hermitian(H.dense), tol);
}

}  // namespace gibbs
