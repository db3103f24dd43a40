#include "dtc/modal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace dtc {

double ModeSpec::phi_zpf() const { return std::pow(2.0 * ec / ex(), 0.25); }

double ModeSpec::n_zpf() const { return 0.5 / phi_zpf(); }

int ModeSpec::construction_dim() const {
  if (basis_dim > 0) return basis_dim;
  if (kind == ModeKind::Harmonic) return 2 * dim + 1;
  const double r = kPi / phi_zpf();
  return std::max(dim + 4, static_cast<int>(0.4 * r * r));
}

void ModeSpec::validate() const {
  if (!(ec > 0.0)) throw ConfigError("mode E_C must be positive");
  if (kind == ModeKind::Transmon) {
    if (!(ej > 0.0)) throw ConfigError("transmon mode needs a positive E_J");
    if (el != 0.0) throw ConfigError("transmon mode must not set E_L");
  } else {
    if (!(el > 0.0)) throw ConfigError("harmonic mode needs a positive E_L");
    if (ej != 0.0) throw ConfigError("harmonic mode must not set E_J");
  }
  if (dim < 2) throw InvalidDimension("mode dim must be >= 2, got " + std::to_string(dim));
  if (basis_dim != 0 && basis_dim < dim)
    throw InvalidDimension("basis_dim must be 0 or >= dim");
}

ModeSpec ModeSpec::transmon(double ec, double ej, int dim, int basis_dim) {
  ModeSpec s;
  s.kind = ModeKind::Transmon;
  s.ec = ec;
  s.ej = ej;
  s.dim = dim;
  s.basis_dim = basis_dim;
  return s;
}

ModeSpec ModeSpec::harmonic(double ec, double el, int dim, int basis_dim) {
  ModeSpec s;
  s.kind = ModeKind::Harmonic;
  s.ec = ec;
  s.el = el;
  s.dim = dim;
  s.basis_dim = basis_dim;
  return s;
}

std::pair<Mat, Mat> build_ladder(int dim) {
  if (dim < 1) throw InvalidDimension("ladder dimension must be >= 1");
  Mat lower = Mat::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) lower(k - 1, k) = std::sqrt(double(k));
  Mat raise = lower.transpose();
  return {lower, raise};
}

namespace {

OperatorSet operators_in_basis(const ModeSpec& spec, int d) {
  auto [a, ad] = build_ladder(d);
  OperatorSet ops;
  ops.lower = a;
  ops.phi = spec.phi_zpf() * (a + ad);
  ops.n = cplx(0.0, spec.n_zpf()) * (ad - a).cast<cplx>();

  Eigen::SelfAdjointEigenSolver<Mat> es(ops.phi);
  const Mat& U = es.eigenvectors();
  Vec c = es.eigenvalues().array().cos();
  Vec s = es.eigenvalues().array().sin();
  ops.cos_phi = U * c.asDiagonal() * U.transpose();
  ops.sin_phi = U * s.asDiagonal() * U.transpose();
  // Symmetrize away rounding so downstream symmetry checks are exact.
  ops.cos_phi = 0.5 * (ops.cos_phi + ops.cos_phi.transpose()).eval();
  ops.sin_phi = 0.5 * (ops.sin_phi + ops.sin_phi.transpose()).eval();
  return ops;
}

}  // namespace

OperatorSet build_mode_operators(const ModeSpec& spec) {
  spec.validate();
  return operators_in_basis(spec, spec.dim);
}

Mat mode_hamiltonian(const ModeSpec& spec, const OperatorSet& ops) {
  Mat n_im = ops.n.imag();
  Mat h = -4.0 * spec.ec * (n_im * n_im);
  if (spec.kind == ModeKind::Transmon)
    h -= spec.ej * ops.cos_phi;
  else
    h += 0.5 * spec.el * (ops.phi * ops.phi);
  return 0.5 * (h + h.transpose());
}

LocalMode local_mode(const ModeSpec& spec) {
  spec.validate();
  OperatorSet ops = operators_in_basis(spec, spec.construction_dim());
  Eigen::SelfAdjointEigenSolver<Mat> es(mode_hamiltonian(spec, ops));
  Mat U = es.eigenvectors().leftCols(spec.dim);
  if (spec.kind == ModeKind::Transmon) {
    // A kept state with weight beyond |phi| = pi lives in a copy of the well
    // that the compact transmon does not have.
    Eigen::SelfAdjointEigenSolver<Mat> ps(ops.phi);
    Mat w = (ps.eigenvectors().transpose() * U).cwiseAbs2();
    for (int j = 0; j < spec.dim; ++j) {
      double outside = 0.0;
      for (Eigen::Index k = 0; k < w.rows(); ++k)
        if (std::abs(ps.eigenvalues()(k)) > kPi) outside += w(k, j);
      if (outside > 0.1)
        throw NumericalError("transmon level " + std::to_string(j) + " has weight " + std::to_string(outside) +
                             " beyond |phi| = pi; reduce basis_dim");
    }
  }
  for (int j = 0; j < U.cols(); ++j) {
    Eigen::Index imax = 0;
    U.col(j).cwiseAbs().maxCoeff(&imax);
    if (U(imax, j) < 0) U.col(j) *= -1.0;
  }
  auto project = [&](const Mat& m) {
    Mat r = U.transpose() * m * U;
    return r;
  };
  LocalMode lm;
  lm.energies = es.eigenvalues().head(spec.dim);
  lm.phi = project(ops.phi);
  lm.phi = 0.5 * (lm.phi + lm.phi.transpose()).eval();
  lm.n_im = project(ops.n.imag());
  lm.n_im = 0.5 * (lm.n_im - lm.n_im.transpose()).eval();
  lm.cos_phi = project(ops.cos_phi);
  lm.cos_phi = 0.5 * (lm.cos_phi + lm.cos_phi.transpose()).eval();
  lm.sin_phi = project(ops.sin_phi);
  lm.sin_phi = 0.5 * (lm.sin_phi + lm.sin_phi.transpose()).eval();
  return lm;
}

namespace {

// Kronecker product order: dims[0] is the slowest-varying index.
template <class M>
M embed_impl(const M& op, std::size_t mode_index, const std::vector<int>& dims) {
  if (mode_index >= dims.size()) throw InvalidDimension("embed: mode index out of range");
  if (op.rows() != dims[mode_index] || op.cols() != dims[mode_index])
    throw InvalidDimension("embed: operator does not match mode dimension");
  Eigen::Index left = 1, right = 1;
  for (std::size_t i = 0; i < mode_index; ++i) left *= dims[i];
  for (std::size_t i = mode_index + 1; i < dims.size(); ++i) right *= dims[i];
  M tmp = Eigen::kroneckerProduct(op, M::Identity(right, right)).eval();
  return Eigen::kroneckerProduct(M::Identity(left, left), tmp).eval();
}

}  // namespace

Mat embed(const Mat& op, std::size_t mode_index, const std::vector<int>& dims) {
  return embed_impl(op, mode_index, dims);
}

CMat embed(const CMat& op, std::size_t mode_index, const std::vector<int>& dims) {
  return embed_impl(op, mode_index, dims);
}

SpMat kron_chain(const std::vector<std::pair<std::size_t, const Mat*>>& factors,
                 const std::vector<int>& dims) {
  SpMat out(1, 1);
  out.insert(0, 0) = 1.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const Mat* f = nullptr;
    for (const auto& [idx, m] : factors)
      if (idx == i) {
        if (f) throw InvalidDimension("kron_chain: mode listed twice");
        f = m;
      }
    SpMat local;
    if (f) {
      if (f->rows() != dims[i] || f->cols() != dims[i])
        throw InvalidDimension("kron_chain: factor does not match mode dimension");
      local = f->sparseView(0.0, 0.0);
    } else {
      local.resize(dims[i], dims[i]);
      local.setIdentity();
    }
    SpMat next = Eigen::kroneckerProduct(out, local).eval();
    out = std::move(next);
  }
  for (const auto& [idx, m] : factors)
    if (idx >= dims.size()) throw InvalidDimension("kron_chain: mode index out of range");
  out.makeCompressed();
  return out;
}

Vec transmon_charge_spectrum(double ec, double ej, int charge_cutoff, int count) {
  if (charge_cutoff < 10) throw ConfigError("charge cutoff must be >= 10");
  const int n = 2 * charge_cutoff + 1;
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double m = double(i - charge_cutoff);
    h(i, i) = 4.0 * ec * m * m;
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().head(std::min(count, n));
}

double mode_frequency(const ModeSpec& spec) {
  LocalMode lm = local_mode(spec);
  return lm.energies(1) - lm.energies(0);
}

}  // namespace dtc
