#pragma once

// Dense simulation of the central spin and its bath, for interactions whose
// dynamics leave the collective diagonal picture (XX, XYZ) and for baths of
// individual spins.
//
// Basis ordering is central spin slowest: index = c * bath_dim + b with c = 0
// for |g> and c = 1 for |e>, so the ground-state projector is the leading
// block. In the Dicke basis b = m counts bath excitations (J_z = m - M/2).
// In the product space bit j of b is bath spin j (1 = excited).

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dnp/model.hpp"
#include "dnp/scheduler.hpp"

namespace dnp::exact {

enum class Basis { DickeSubspace, FullProductSpace };
enum class Frame { Rotating, Lab };

std::string_view to_string(Basis basis);
std::string_view to_string(Frame frame);
Basis parse_basis(std::string_view text);

inline constexpr int kDefaultProductSpaceMaxM = 12;

struct HamiltonianSpec {
  ModelParams params;
  Basis basis = Basis::DickeSubspace;
  Frame frame = Frame::Rotating;
  int product_space_max_M = kDefaultProductSpaceMaxM;

  // XX runs in the lab frame, XY and XYZ in the rotating frame.
  static HamiltonianSpec natural(const ModelParams& params,
                                 Basis basis = Basis::DickeSubspace);

  std::size_t bath_dimension() const;
  std::size_t dimension() const { return 2 * bath_dimension(); }
  void validate() const;
};

using Matrix = Eigen::MatrixXcd;

class DenseOperator {
 public:
  explicit DenseOperator(Matrix entries);

  Eigen::Index dimension() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }

  // max |A - A^dagger|
  double hermiticity_residual() const;
  // max |A^dagger A - I|
  double unitarity_residual() const;

 private:
  Matrix entries_;
};

class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
  explicit DensityMatrix(Matrix entries);

  Eigen::Index dimension() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  double trace() const { return entries_.trace().real(); }

  // Accepts an already-normalized state without the eigenvalue check.
  static DensityMatrix unchecked(Matrix entries);

 private:
  struct Unchecked {};
  DensityMatrix(Matrix entries, Unchecked) : entries_(std::move(entries)) {}
  Matrix entries_;
};

DenseOperator build_hamiltonian(const HamiltonianSpec& spec);

// exp(-i H tau) from a single Hermitian eigendecomposition.
class Propagator {
 public:
  explicit Propagator(const DenseOperator& hamiltonian);

  DenseOperator at(double tau) const;
  const Eigen::VectorXd& energies() const { return energies_; }
  const Matrix& eigenvectors() const { return vectors_; }

 private:
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

DenseOperator propagator(const DenseOperator& hamiltonian, double tau);

struct MeasurementResult {
  DensityMatrix state;
  double probability;
};

// Projects onto |g> of the central spin. Throws RuntimeSignal(Annihilated)
// when the success probability is below kAnnihilationThreshold.
MeasurementResult measure_central_ground(const DensityMatrix& rho);

// |g><g| tensor the thermal bath at beta_omega1.
DensityMatrix initial_state(const HamiltonianSpec& spec);

// Bath J_z eigenvalues along the diagonal of the bath factor.
std::vector<double> bath_jz(const HamiltonianSpec& spec);

// |<J_z>| / (M/2) of the bath.
double bath_polarization(const HamiltonianSpec& spec, const DensityMatrix& rho);

// Von Neumann entropy of the bath reduced state.
double bath_entropy(const HamiltonianSpec& spec, const DensityMatrix& rho);

// Population of each total-excitation sector (central + bath), 0..M+1.
std::vector<double> excitation_sector_populations(const HamiltonianSpec& spec,
                                                  const DensityMatrix& rho);

/// Polarization of the mixture of dark states |J, m = -J> left when every
/// other state of an M-spin product-space bath has been filtered out by
/// repeated measurement with a homogeneous flip-flop coupling. Each dark state
/// keeps its thermal weight x^(M/2 - J), x = exp(-beta_omega1), and there are
/// C(M, M/2 - J) - C(M, M/2 - J - 1) of them per J.
double dark_state_polarization(int M, double beta_omega1);

// Evolve-and-measure simulator that keeps the state in the Hamiltonian
// eigenbasis, so a round costs a few matrix products and a look-ahead over a
// tau grid is one batched product.
class ExactSimulator {
 public:
  explicit ExactSimulator(const HamiltonianSpec& spec);

  const HamiltonianSpec& spec() const { return spec_; }
  DensityMatrix state() const;
  double polarization() const;
  double entropy() const;

  // Exact polarization after one more round of length tau, for each tau;
  // NaN where the round would annihilate the state.
  std::vector<double> look_ahead(std::span<const double> taus) const;
  double numeric_tau(const SearchConfig& config) const;

  // One round; returns the success probability.
  double step(double tau);

 private:
  void refresh_observables();

  HamiltonianSpec spec_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;       // real: every Hamiltonian here is real
  Eigen::MatrixXd ground_rows_;   // rows of vectors_ in the |g> block
  Matrix bath_;                   // bath block of the post-measurement state
  Eigen::MatrixXd rho_re_;        // full state in the eigenbasis, real part
  Eigen::MatrixXd rho_im_;        // and imaginary part
  Eigen::MatrixXd proj_eigen_;    // Pi in the eigenbasis
  Eigen::MatrixXd proj_jz_eigen_; // Pi J_z in the eigenbasis
  std::vector<double> jz_;
};

ProtocolTrace run_exact_protocol(const HamiltonianSpec& spec,
                                 const Strategy& strategy, int N);

// Fixed interval sequence, no strategy.
ProtocolTrace run_exact_schedule(const HamiltonianSpec& spec,
                                 std::span<const double> taus);

}  // namespace dnp::exact
