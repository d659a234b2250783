#include "qshuttle/qops.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qshuttle::qops {

namespace {

const Complex kI(0.0, 1.0);

void require_dim(int dim) {
    if (dim != 2 && dim != 4) {
        std::ostringstream msg;
        msg << "dimension must be 2 or 4, got " << dim;
        throw std::invalid_argument(msg.str());
    }
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Operator Operator::unitary(Matrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("operator must be square");
    require_dim(static_cast<int>(m.rows()));
    const Matrix gram = m.adjoint() * m;
    const double err = max_abs(gram - Matrix::Identity(m.rows(), m.cols()));
    if (err > kUnitaryTol) {
        std::ostringstream msg;
        msg << "matrix is not unitary: max |U^dag U - I| = " << err;
        throw std::invalid_argument(msg.str());
    }
    return Operator(std::move(m), true);
}

Operator Operator::matrix(Matrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("operator must be square");
    require_dim(static_cast<int>(m.rows()));
    return Operator(std::move(m), false);
}

Operator Operator::dagger() const {
    Matrix adj = mat_.adjoint();
    return Operator(std::move(adj), unitary_);
}

Matrix tensor(const Matrix& a, const Matrix& b) {
    const auto ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    Matrix out(ra * rb, ca * cb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ca; ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

Operator tensor(const Operator& a, const Operator& b) {
    if (a.dim() * b.dim() > 4)
        throw std::invalid_argument("tensor product dimension exceeds 4");
    Matrix out = tensor(a.mat(), b.mat());
    return (a.is_unitary() && b.is_unitary()) ? Operator::unitary(std::move(out))
                                              : Operator::matrix(std::move(out));
}

QuantumState QuantumState::pure(Vector amplitudes) {
    require_dim(static_cast<int>(amplitudes.size()));
    const double norm2 = amplitudes.squaredNorm();
    if (std::abs(norm2 - 1.0) > kStateTol) {
        std::ostringstream msg;
        msg << "pure state norm^2 deviates from 1 by " << std::abs(norm2 - 1.0);
        throw std::invalid_argument(msg.str());
    }
    QuantumState s;
    s.pure_ = true;
    s.dim_ = static_cast<int>(amplitudes.size());
    s.psi_ = std::move(amplitudes);
    return s;
}

QuantumState QuantumState::mixed(Matrix rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("density matrix must be square");
    require_dim(static_cast<int>(rho.rows()));
    if (max_abs(rho - Matrix(rho.adjoint())) > kStateTol)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > kStateTol || std::abs(rho.trace().imag()) > kStateTol)
        throw std::invalid_argument("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    if (es.eigenvalues().minCoeff() < -kStateTol)
        throw std::invalid_argument("density matrix has negative eigenvalues");
    QuantumState s;
    s.pure_ = false;
    s.dim_ = static_cast<int>(rho.rows());
    s.rho_ = std::move(rho);
    return s;
}

QuantumState QuantumState::basis(int dim, int index) {
    require_dim(dim);
    if (index < 0 || index >= dim) throw std::invalid_argument("basis index out of range");
    Vector v = Vector::Zero(dim);
    v[index] = 1.0;
    return pure(std::move(v));
}

const Vector& QuantumState::amplitudes() const {
    if (!pure_) throw std::logic_error("amplitudes() called on a mixed state");
    return psi_;
}

Matrix QuantumState::density() const {
    if (pure_) return psi_ * psi_.adjoint();
    return rho_;
}

QuantumState QuantumState::to_mixed() const {
    if (!pure_) return *this;
    QuantumState s;
    s.pure_ = false;
    s.dim_ = dim_;
    s.rho_ = psi_ * psi_.adjoint();
    return s;
}

KrausChannel KrausChannel::from_ops(std::vector<Matrix> kraus_ops) {
    if (kraus_ops.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const int dim = static_cast<int>(kraus_ops.front().rows());
    require_dim(dim);
    Matrix sum = Matrix::Zero(dim, dim);
    for (const Matrix& k : kraus_ops) {
        if (k.rows() != dim || k.cols() != dim)
            throw std::invalid_argument("Kraus operators must share one square dimension");
        sum += k.adjoint() * k;
    }
    const double err = max_abs(sum - Matrix::Identity(dim, dim));
    if (err > kUnitaryTol) {
        std::ostringstream msg;
        msg << "channel is not trace preserving: max |sum K^dag K - I| = " << err;
        throw std::invalid_argument(msg.str());
    }
    KrausChannel c;
    c.dim_ = dim;
    c.ops_ = std::move(kraus_ops);
    return c;
}

KrausChannel KrausChannel::identity(int dim) {
    return from_ops({Matrix::Identity(dim, dim)});
}

KrausChannel KrausChannel::on_qubit(int qubit) const {
    if (dim_ != 2) throw std::logic_error("on_qubit expects a single-qubit channel");
    if (qubit != 0 && qubit != 1) throw std::invalid_argument("qubit index must be 0 or 1");
    const Matrix eye = Matrix::Identity(2, 2);
    std::vector<Matrix> expanded;
    expanded.reserve(ops_.size());
    for (const Matrix& k : ops_)
        expanded.push_back(qubit == 0 ? tensor(k, eye) : tensor(eye, k));
    return from_ops(std::move(expanded));
}

QuantumState apply_unitary(const QuantumState& s, const Operator& u) {
    if (u.dim() != s.dim()) throw std::invalid_argument("operator/state dimension mismatch");
    if (s.is_pure()) {
        Vector out = u.mat() * s.amplitudes();
        // Renormalize away accumulated rounding; anything larger is a bug.
        const double norm = out.norm();
        if (std::abs(norm - 1.0) > 1e-8) throw std::logic_error("unitary application broke the norm");
        return QuantumState::pure(out / norm);
    }
    Matrix rho = u.mat() * s.density() * u.mat().adjoint();
    rho = 0.5 * (rho + Matrix(rho.adjoint()));  // re-hermitize rounding noise
    rho /= rho.trace().real();
    return QuantumState::mixed(std::move(rho));
}

QuantumState apply_channel(const QuantumState& s, const KrausChannel& c) {
    if (c.dim() != s.dim()) throw std::invalid_argument("channel/state dimension mismatch");
    const Matrix rho = s.density();
    Matrix out = Matrix::Zero(s.dim(), s.dim());
    for (const Matrix& k : c.ops()) out += k * rho * k.adjoint();
    out = 0.5 * (out + Matrix(out.adjoint()));
    out /= out.trace().real();
    return QuantumState::mixed(std::move(out));
}

std::vector<double> up_probabilities(const QuantumState& s) {
    std::vector<double> probs(s.dim());
    double total = 0.0;
    for (int i = 0; i < s.dim(); ++i) {
        double p = s.is_pure() ? std::norm(s.amplitudes()[i]) : s.density()(i, i).real();
        if (p < -1e-12 || p > 1.0 + 1e-12) throw std::logic_error("probability out of range");
        p = std::clamp(p, 0.0, 1.0);
        probs[i] = p;
        total += p;
    }
    if (std::abs(total - 1.0) > kStateTol) throw std::logic_error("probabilities do not sum to 1");
    return probs;
}

double p_up(const QuantumState& s, int qubit) {
    const std::vector<double> probs = up_probabilities(s);
    if (s.dim() == 2) return probs[1];
    // (Q_L, Q_M) order: Q_L up in {ud, uu}, Q_M up in {du, uu}.
    return qubit == 0 ? probs[2] + probs[3] : probs[1] + probs[3];
}

double p_both_up(const QuantumState& s) {
    if (s.dim() != 4) throw std::invalid_argument("p_both_up needs a 2-qubit state");
    return up_probabilities(s)[3];
}

int64_t sample_shots(double p, int64_t shots, RngStream& rng) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("sample_shots: p outside [0,1]");
    return rng.binomial(shots, p);
}

double phase_overlap(const Matrix& u, const Matrix& v) {
    return std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
}

bool phase_equal(const Matrix& u, const Matrix& v, double tol) {
    if (u.rows() != v.rows() || u.cols() != v.cols()) return false;
    return phase_overlap(u, v) >= 1.0 - tol;
}

Matrix canonical_phase(const Matrix& u) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        const Complex entry = u(0, j);
        if (std::abs(entry) > 1e-8) return u * (std::conj(entry) / std::abs(entry));
    }
    return u;
}

double purity(const QuantumState& s) {
    if (s.is_pure()) return 1.0;
    return (s.density() * s.density()).trace().real();
}

}  // namespace qshuttle::qops
