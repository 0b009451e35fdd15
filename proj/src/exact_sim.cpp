#include "dnp/exact_sim.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace dnp::exact {

std::string_view to_string(Basis basis) {
  return basis == Basis::DickeSubspace ? "dicke" : "product";
}

std::string_view to_string(Frame frame) {
  return frame == Frame::Rotating ? "rotating" : "lab";
}

Basis parse_basis(std::string_view text) {
  if (text == "dicke" || text == "Dicke") return Basis::DickeSubspace;
  if (text == "product" || text == "full") return Basis::FullProductSpace;
  throw ConfigError("unknown basis '" + std::string(text) + "'");
}

HamiltonianSpec HamiltonianSpec::natural(const ModelParams& params, Basis basis) {
  HamiltonianSpec spec;
  spec.params = params;
  spec.basis = basis;
  spec.frame = params.interaction == Interaction::XX ? Frame::Lab : Frame::Rotating;
  return spec;
}

std::size_t HamiltonianSpec::bath_dimension() const {
  if (basis == Basis::DickeSubspace) return static_cast<std::size_t>(params.M) + 1;
  return std::size_t{1} << params.M;
}

void HamiltonianSpec::validate() const {
  params.validate();
  if (basis == Basis::FullProductSpace && params.M > product_space_max_M) {
    throw ConfigError("product space limited to M <= " +
                      std::to_string(product_space_max_M) + " (got " +
                      std::to_string(params.M) + ")");
  }
  if (params.interaction == Interaction::XX && frame == Frame::Rotating) {
    throw ConfigError(
        "XX counter-rotating terms are time dependent in the rotating frame; "
        "use the lab frame");
  }
}

DenseOperator::DenseOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw ConfigError("operator must be square");
}

double DenseOperator::hermiticity_residual() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DenseOperator::unitarity_residual() const {
  const Matrix product = entries_.adjoint() * entries_;
  return (product - Matrix::Identity(dimension(), dimension())).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw ConfigError("density matrix must be square and nonempty");
  }
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ConfigError("density matrix is not Hermitian");
  }
  if (std::abs(trace() - 1.0) > 1e-10) {
    throw ConfigError("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConfigError("eigendecomposition failed");
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw ConfigError("density matrix is not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::unchecked(Matrix entries) {
  return DensityMatrix(std::move(entries), Unchecked{});
}

namespace {

using Index = Eigen::Index;

// Central-spin sign of sigma_z: -1 for |g> (c = 0), +1 for |e>.
double sigma_z(int c) { return c == 0 ? -1.0 : 1.0; }

struct Couplings {
  bool flip_flop = true;        // sigma+ J- + sigma- J+
  bool counter_rotating = false;  // sigma+ J+ + sigma- J-
  double central_z = 0.0;       // coefficient of sigma_z^d / 2
  double bath_z = 0.0;          // coefficient of J_z
  double longitudinal = 0.0;    // coefficient of J_z sigma_z^d
};

Couplings couplings_for(const HamiltonianSpec& spec) {
  const auto& p = spec.params;
  Couplings c;
  if (spec.frame == Frame::Lab) {
    c.central_z = 1.0;  // omega0
    c.bath_z = p.omega1();
  } else {
    c.central_z = p.delta;
  }
  if (p.interaction == Interaction::XX) c.counter_rotating = true;
  if (p.interaction == Interaction::XYZ) c.longitudinal = p.g;
  return c;
}

Matrix dicke_hamiltonian(const HamiltonianSpec& spec, const Couplings& c) {
  const int M = spec.params.M;
  const Index nb = M + 1;
  const double g2 = 2.0 * spec.params.g;
  Matrix H = Matrix::Zero(2 * nb, 2 * nb);
  for (int cs = 0; cs < 2; ++cs) {
    for (int m = 0; m <= M; ++m) {
      const double jz = m - M / 2.0;
      H(cs * nb + m, cs * nb + m) =
          c.central_z / 2.0 * sigma_z(cs) + c.bath_z * jz + c.longitudinal * jz * sigma_z(cs);
    }
  }
  for (int m = 0; m < M; ++m) {
    // J+ |m> = sqrt((M - m)(m + 1)) |m + 1>
    const double a = g2 * std::sqrt(static_cast<double>(M - m) * (m + 1));
    if (c.flip_flop) {  // sigma- J+ : |e, m> -> |g, m + 1>
      H(m + 1, nb + m) = a;
      H(nb + m, m + 1) = a;
    }
    if (c.counter_rotating) {  // sigma+ J+ : |g, m> -> |e, m + 1>
      H(nb + m + 1, m) = a;
      H(m, nb + m + 1) = a;
    }
  }
  return H;
}

Matrix product_hamiltonian(const HamiltonianSpec& spec, const Couplings& c) {
  const int M = spec.params.M;
  const Index nb = Index{1} << M;
  const double g2 = 2.0 * spec.params.g;
  Matrix H = Matrix::Zero(2 * nb, 2 * nb);
  for (int cs = 0; cs < 2; ++cs) {
    for (Index b = 0; b < nb; ++b) {
      const double jz = std::popcount(static_cast<unsigned long long>(b)) - M / 2.0;
      H(cs * nb + b, cs * nb + b) =
          c.central_z / 2.0 * sigma_z(cs) + c.bath_z * jz + c.longitudinal * jz * sigma_z(cs);
    }
  }
  for (Index b = 0; b < nb; ++b) {
    for (int j = 0; j < M; ++j) {
      const Index bit = Index{1} << j;
      if (b & bit) continue;
      // sigma_j^+ takes b to b | bit.
      if (c.flip_flop) {  // sigma_d^- sigma_j^+ : |e, b> -> |g, b | bit>
        H(b | bit, nb + b) += g2;
        H(nb + b, b | bit) += g2;
      }
      if (c.counter_rotating) {  // sigma_d^+ sigma_j^+ : |g, b> -> |e, b | bit>
        H(nb + (b | bit), b) += g2;
        H(b, nb + (b | bit)) += g2;
      }
    }
  }
  return H;
}

}  // namespace

DenseOperator build_hamiltonian(const HamiltonianSpec& spec) {
  spec.validate();
  const Couplings c = couplings_for(spec);
  return DenseOperator(spec.basis == Basis::DickeSubspace ? dicke_hamiltonian(spec, c)
                                                          : product_hamiltonian(spec, c));
}

Propagator::Propagator(const DenseOperator& hamiltonian) {
  if (hamiltonian.hermiticity_residual() > 1e-12) {
    throw ConfigError("propagator needs a Hermitian operator");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigendecomposition failed");
  }
  energies_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

DenseOperator Propagator::at(double tau) const {
  const Eigen::VectorXcd phases =
      (std::complex<double>(0.0, -tau) * energies_.cast<std::complex<double>>())
          .array()
          .exp();
  return DenseOperator(vectors_ * phases.asDiagonal() * vectors_.adjoint());
}

DenseOperator propagator(const DenseOperator& hamiltonian, double tau) {
  return Propagator(hamiltonian).at(tau);
}

MeasurementResult measure_central_ground(const DensityMatrix& rho) {
  const Index n = rho.dimension();
  if (n % 2 != 0) throw ConfigError("state has no central-spin factor");
  const Index half = n / 2;
  const double probability = rho.matrix().topLeftCorner(half, half).trace().real();
  if (!(probability >= kAnnihilationThreshold)) {
    throw RuntimeSignal(RuntimeSignal::Kind::Annihilated,
                        "central spin never found in its ground state");
  }
  Matrix out = Matrix::Zero(n, n);
  out.topLeftCorner(half, half) = rho.matrix().topLeftCorner(half, half) / probability;
  return {DensityMatrix::unchecked(std::move(out)), probability};
}

std::vector<double> bath_jz(const HamiltonianSpec& spec) {
  const int M = spec.params.M;
  std::vector<double> jz(spec.bath_dimension());
  for (std::size_t b = 0; b < jz.size(); ++b) {
    const int excitations = spec.basis == Basis::DickeSubspace
                                ? static_cast<int>(b)
                                : std::popcount(static_cast<unsigned long long>(b));
    jz[b] = excitations - M / 2.0;
  }
  return jz;
}

namespace {

Eigen::VectorXd thermal_bath_diagonal(const HamiltonianSpec& spec) {
  // Single-spin Gibbs weights x^k per excitation; within each symmetric
  // sector this is the collective thermal state.
  const auto jz = bath_jz(spec);
  Eigen::VectorXd w(static_cast<Index>(jz.size()));
  const double M = spec.params.M;
  for (std::size_t b = 0; b < jz.size(); ++b) {
    w[static_cast<Index>(b)] = std::exp(-spec.params.beta_omega1 * (jz[b] + M / 2.0));
  }
  return w / w.sum();
}

double polarization_of(const Matrix& bath, const std::vector<double>& jz, int M) {
  double acc = 0.0;
  for (std::size_t b = 0; b < jz.size(); ++b) {
    acc += bath(static_cast<Index>(b), static_cast<Index>(b)).real() * jz[b];
  }
  return std::abs(acc) / (M / 2.0);
}

double von_neumann(const Matrix& bath) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(bath, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double p = solver.eigenvalues()[i];
    if (p > 1e-300) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

}  // namespace

DensityMatrix initial_state(const HamiltonianSpec& spec) {
  spec.validate();
  const Index nb = static_cast<Index>(spec.bath_dimension());
  Matrix rho = Matrix::Zero(2 * nb, 2 * nb);
  rho.topLeftCorner(nb, nb).diagonal() = thermal_bath_diagonal(spec).cast<std::complex<double>>();
  return DensityMatrix::unchecked(std::move(rho));
}

double bath_polarization(const HamiltonianSpec& spec, const DensityMatrix& rho) {
  if (rho.dimension() != static_cast<Index>(spec.dimension())) {
    throw ConfigError("state dimension does not match the spec");
  }
  // Partial trace over the central spin: sum of the two diagonal blocks.
  const Index nb = rho.dimension() / 2;
  const Matrix bath = rho.matrix().topLeftCorner(nb, nb) + rho.matrix().bottomRightCorner(nb, nb);
  return polarization_of(bath, bath_jz(spec), spec.params.M);
}

double bath_entropy(const HamiltonianSpec& spec, const DensityMatrix& rho) {
  if (rho.dimension() != static_cast<Index>(spec.dimension())) {
    throw ConfigError("state dimension does not match the spec");
  }
  const Index nb = rho.dimension() / 2;
  // Off-diagonal central blocks drop out of the partial trace.
  return von_neumann(rho.matrix().topLeftCorner(nb, nb) + rho.matrix().bottomRightCorner(nb, nb));
}

std::vector<double> excitation_sector_populations(const HamiltonianSpec& spec,
                                                  const DensityMatrix& rho) {
  const auto jz = bath_jz(spec);
  const Index nb = static_cast<Index>(jz.size());
  const int M = spec.params.M;
  std::vector<double> sectors(static_cast<std::size_t>(M) + 2, 0.0);
  for (int c = 0; c < 2; ++c) {
    for (Index b = 0; b < nb; ++b) {
      const int k = c + static_cast<int>(std::lround(jz[b] + M / 2.0));
      sectors[k] += rho.matrix()(c * nb + b, c * nb + b).real();
    }
  }
  return sectors;
}

double dark_state_polarization(int M, double beta_omega1) {
  if (M < 1) throw ConfigError("bath size M must be >= 1");
  // Binomials as doubles; M is small enough (product space) for exactness.
  std::vector<double> binom(static_cast<std::size_t>(M) + 1, 1.0);
  for (int k = 1; k <= M; ++k) binom[k] = binom[k - 1] * (M - k + 1) / k;
  double weight = 0.0;
  double moment = 0.0;
  for (int k = 0; 2 * k <= M; ++k) {  // k = M/2 - J excitations
    const double count = binom[k] - (k > 0 ? binom[k - 1] : 0.0);
    const double w = count * std::exp(-beta_omega1 * k);
    weight += w;
    moment += w * (M / 2.0 - k);
  }
  return moment / weight / (M / 2.0);
}

ExactSimulator::ExactSimulator(const HamiltonianSpec& spec) : spec_(spec) {
  const DenseOperator H = build_hamiltonian(spec_);
  const Eigen::MatrixXd real = H.matrix().real();
  if (H.matrix().imag().cwiseAbs().maxCoeff() > 0.0) {
    throw std::logic_error("Hamiltonian expected to be real in this basis");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(real);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Hermitian eigendecomposition failed");
  }
  energies_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();

  const Index nb = static_cast<Index>(spec_.bath_dimension());
  ground_rows_ = vectors_.topRows(nb);
  jz_ = bath_jz(spec_);
  Eigen::Map<const Eigen::VectorXd> jz(jz_.data(), nb);
  proj_eigen_ = ground_rows_.transpose() * ground_rows_;
  proj_jz_eigen_ = ground_rows_.transpose() * jz.asDiagonal() * ground_rows_;

  bath_ = Matrix::Zero(nb, nb);
  bath_.diagonal() = thermal_bath_diagonal(spec_).cast<std::complex<double>>();
  refresh_observables();
}

void ExactSimulator::refresh_observables() {
  // Real and imaginary parts are copied out: they are strided views.
  const Eigen::MatrixXd bath_re = bath_.real();
  const Eigen::MatrixXd bath_im = bath_.imag();
  rho_re_ = ground_rows_.transpose() * bath_re * ground_rows_;
  rho_im_ = ground_rows_.transpose() * bath_im * ground_rows_;
}

DensityMatrix ExactSimulator::state() const {
  const Index nb = bath_.rows();
  Matrix rho = Matrix::Zero(2 * nb, 2 * nb);
  rho.topLeftCorner(nb, nb) = bath_;
  return DensityMatrix::unchecked(std::move(rho));
}

double ExactSimulator::polarization() const {
  return polarization_of(bath_, jz_, spec_.params.M);
}

double ExactSimulator::entropy() const { return von_neumann(bath_); }

std::vector<double> ExactSimulator::look_ahead(std::span<const double> taus) const {
  // For an observable O supported on the |g> block, Tr(O U rho U^dagger) =
  // sum_kl A_kl rho_kl exp(-i (E_k - E_l) tau) with A = V^T O V. Split into
  // real parts with a = cos(E tau), b = sin(E tau):
  //   a^T R a + b^T R b - 2 a^T I b,  R = A o Re(rho), I = A o Im(rho).
  const Index n = energies_.size();
  const Index B = static_cast<Index>(taus.size());
  std::vector<double> out(taus.size());
  if (B == 0) return out;

  Eigen::MatrixXd cs(n, 2 * B);  // [cos | sin]
  for (Index t = 0; t < B; ++t) {
    for (Index k = 0; k < n; ++k) {
      const double phase = energies_[k] * taus[t];
      cs(k, t) = std::cos(phase);
      cs(k, B + t) = std::sin(phase);
    }
  }
  auto evaluate = [&](const Eigen::MatrixXd& A) {
    const Eigen::MatrixXd R = A.cwiseProduct(rho_re_);
    const Eigen::MatrixXd I = A.cwiseProduct(rho_im_);
    const Eigen::MatrixXd Rcs = R * cs;
    const Eigen::MatrixXd Is = I * cs.rightCols(B);
    Eigen::VectorXd v(B);
    for (Index t = 0; t < B; ++t) {
      v[t] = cs.col(t).dot(Rcs.col(t)) + cs.col(B + t).dot(Rcs.col(B + t)) -
             2.0 * cs.col(t).dot(Is.col(t));
    }
    return v;
  };
  const Eigen::VectorXd weight = evaluate(proj_eigen_);
  const Eigen::VectorXd first = evaluate(proj_jz_eigen_);
  const double half = spec_.params.M / 2.0;
  for (Index t = 0; t < B; ++t) {
    out[t] = weight[t] >= kAnnihilationThreshold
                 ? std::abs(first[t] / weight[t]) / half
                 : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double ExactSimulator::numeric_tau(const SearchConfig& config) const {
  const double upper = detail::search_window(polarization(), spec_.params, config);
  return detail::maximize_on_window_batched(
      [&](const std::vector<double>& taus) { return look_ahead(taus); },
      [&](double tau) { return look_ahead(std::span<const double>(&tau, 1))[0]; },
      upper, config);
}

double ExactSimulator::step(double tau) {
  if (!(tau >= 0.0)) throw ConfigError("measurement interval must be >= 0");
  const Eigen::ArrayXd a = (energies_ * tau).array().cos();
  const Eigen::ArrayXd b = (energies_ * tau).array().sin();
  // u_k conj(u_l) with u = a - i b.
  const Eigen::MatrixXd pr = a.matrix() * a.matrix().transpose() + b.matrix() * b.matrix().transpose();
  const Eigen::MatrixXd pi = a.matrix() * b.matrix().transpose() - b.matrix() * a.matrix().transpose();
  const Eigen::MatrixXd re = rho_re_.cwiseProduct(pr) - rho_im_.cwiseProduct(pi);
  const Eigen::MatrixXd im = rho_re_.cwiseProduct(pi) + rho_im_.cwiseProduct(pr);

  const Eigen::MatrixXd next_re = ground_rows_ * re * ground_rows_.transpose();
  const Eigen::MatrixXd next_im = ground_rows_ * im * ground_rows_.transpose();
  Matrix next(bath_.rows(), bath_.cols());
  next.real() = next_re;
  next.imag() = next_im;
  const double probability = next.trace().real();
  if (!(probability >= kAnnihilationThreshold)) {
    throw RuntimeSignal(RuntimeSignal::Kind::Annihilated,
                        "success probability underflow at tau = " + std::to_string(tau));
  }
  next /= probability;
  bath_ = (next + next.adjoint()) / 2.0;
  refresh_observables();
  return probability;
}

namespace {

void describe(ProtocolTrace& trace, const HamiltonianSpec& spec) {
  trace.metadata.emplace_back("engine", "exact");
  trace.metadata.emplace_back("basis", std::string(to_string(spec.basis)));
  trace.metadata.emplace_back("frame", std::string(to_string(spec.frame)));
  trace.metadata.emplace_back("interaction", std::string(to_string(spec.params.interaction)));
}

}  // namespace

ProtocolTrace run_exact_protocol(const HamiltonianSpec& spec,
                                 const Strategy& strategy, int N) {
  spec.validate();
  ExactSimulator sim(spec);
  ProtocolTrace trace;
  detail::drive_protocol(sim, spec.params, strategy, N, trace);
  describe(trace, spec);
  return trace;
}

ProtocolTrace run_exact_schedule(const HamiltonianSpec& spec,
                                 std::span<const double> taus) {
  spec.validate();
  if (taus.empty()) throw ConfigError("interval sequence is empty");
  ExactSimulator sim(spec);
  ProtocolTrace trace;
  trace.params = spec.params;
  trace.initial_polarization = sim.polarization();
  trace.initial_entropy = sim.entropy();
  double cumulative = 1.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double probability = sim.step(taus[i]);
    cumulative *= probability;
    trace.rounds.push_back({static_cast<int>(i) + 1, taus[i], sim.polarization(),
                            sim.entropy(), probability, cumulative});
  }
  describe(trace, spec);
  return trace;
}

}  // namespace dnp::exact
