#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qshuttle/rng.hpp"

namespace qshuttle::qops {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Basis convention: |down> (ground) = index 0, |up> = index 1.
// Two-qubit ordering is (Q_L, Q_M) with Q_L the slow index, so the
// four basis states are {dd, du, ud, uu}.

inline constexpr double kStateTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-9;

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// Square complex matrix of dimension 2 or 4. Construction through
/// unitary() verifies U^dag U = I to 1e-9; matrix() is an unchecked
/// carrier for Hamiltonians and Kraus operators.
class Operator {
  public:
    static Operator unitary(Matrix m);
    static Operator matrix(Matrix m);

    int dim() const { return static_cast<int>(mat_.rows()); }
    bool is_unitary() const { return unitary_; }
    const Matrix& mat() const { return mat_; }
    Operator dagger() const;

  private:
    Operator(Matrix m, bool unitary) : mat_(std::move(m)), unitary_(unitary) {}
    Matrix mat_;
    bool unitary_;
};

/// Tensor product with (Q_L, Q_M) index order; result dimension above 4 is rejected.
Operator tensor(const Operator& a, const Operator& b);
Matrix tensor(const Matrix& a, const Matrix& b);

/// Pure state vector or density matrix over 1-2 qubits.
class QuantumState {
  public:
    static QuantumState pure(Vector amplitudes);
    static QuantumState mixed(Matrix rho);
    static QuantumState basis(int dim, int index);

    bool is_pure() const { return pure_; }
    int dim() const { return dim_; }
    const Vector& amplitudes() const;
    /// Density matrix view; materializes |psi><psi| for pure states.
    Matrix density() const;
    QuantumState to_mixed() const;

  private:
    QuantumState() = default;
    bool pure_ = true;
    int dim_ = 2;
    Vector psi_;
    Matrix rho_;
};

/// Set of Kraus operators; trace preservation checked on construction.
class KrausChannel {
  public:
    static KrausChannel from_ops(std::vector<Matrix> kraus_ops);
    static KrausChannel identity(int dim);

    int dim() const { return dim_; }
    const std::vector<Matrix>& ops() const { return ops_; }

    /// Expand a single-qubit channel to act on one qubit of a 2-qubit state.
    KrausChannel on_qubit(int qubit) const;

  private:
    int dim_ = 2;
    std::vector<Matrix> ops_;
};

QuantumState apply_unitary(const QuantumState& s, const Operator& u);
QuantumState apply_channel(const QuantumState& s, const KrausChannel& c);

/// Per-outcome probabilities in basis order ({P_down, P_up} or
/// {P_dd, P_du, P_ud, P_uu}), clamped to [0,1], summing to 1 within 1e-10.
std::vector<double> up_probabilities(const QuantumState& s);

/// P(up) of one qubit (marginal for 2-qubit states).
double p_up(const QuantumState& s, int qubit = 0);
/// Joint P(up,up) for 2-qubit states.
double p_both_up(const QuantumState& s);

/// Binomial draw of up-counts; deterministic given the stream state.
int64_t sample_shots(double p, int64_t shots, RngStream& rng);

/// Global-phase-insensitive equality: |tr(U^dag V)|/dim >= 1 - tol.
bool phase_equal(const Matrix& u, const Matrix& v, double tol = kUnitaryTol);
/// |tr(U^dag V)|/dim in [0,1]; 1 means equal up to global phase.
double phase_overlap(const Matrix& u, const Matrix& v);
/// Rotate global phase so the first nonzero entry of row 0 is real positive.
Matrix canonical_phase(const Matrix& u);

double purity(const QuantumState& s);

}  // namespace qshuttle::qops
