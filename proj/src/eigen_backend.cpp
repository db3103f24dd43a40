#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include <arpack/arpack.hpp>

#include "dtc/spectrum.hpp"

namespace dtc {

namespace {

void fix_signs(Mat& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0) v.col(j) *= -1.0;
  }
}

// The Fortran core keeps SAVE state between reverse-communication calls.
std::mutex& arpack_mutex() {
  static std::mutex m;
  return m;
}

Eigenpairs arpack_lowest(const SpMat& H, int k) {
  const a_int n = static_cast<a_int>(H.rows());
  const a_int nev = k;
  const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * nev + 1, nev + 24));
  const double tol = 1e-13;
  std::vector<double> resid(n), v(static_cast<std::size_t>(n) * ncv), workd(3 * n);
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  for (a_int i = 0; i < n; ++i) resid[i] = 1.0 + 0.5 * std::sin(0.7 * double(i) + 0.3);
  a_int iparam[11] = {0};
  a_int ipntr[14] = {0};
  iparam[0] = 1;
  iparam[2] = 5000;
  iparam[6] = 1;
  a_int ido = 0, info = 1;

  std::lock_guard<std::mutex> lock(arpack_mutex());
  while (true) {
    arpack::saupd(ido, arpack::bmat::identity, n, arpack::which::smallest_algebraic, nev, tol,
                  resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl,
                  info);
    if (ido != 1 && ido != -1) break;
    Eigen::Map<const Vec> x(workd.data() + ipntr[0] - 1, n);
    Eigen::Map<Vec> y(workd.data() + ipntr[1] - 1, n);
    y.noalias() = H * x;
  }
  if (info < 0) throw NumericalError("ARPACK saupd failed with info " + std::to_string(info));
  if (info == 1) throw NumericalError("ARPACK reached its iteration limit");

  std::vector<a_int> select(ncv);
  std::vector<double> d(nev), z(static_cast<std::size_t>(n) * nev);
  a_int rinfo = 0;
  arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n, 0.0,
                arpack::bmat::identity, n, arpack::which::smallest_algebraic, nev, tol, resid.data(),
                ncv, v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, rinfo);
  if (rinfo != 0) throw NumericalError("ARPACK seupd failed with info " + std::to_string(rinfo));

  std::vector<int> order(nev);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  Eigenpairs out;
  out.values.resize(nev);
  out.vectors.resize(n, nev);
  Eigen::Map<const Mat> Z(z.data(), n, nev);
  for (a_int j = 0; j < nev; ++j) {
    out.values(j) = d[order[j]];
    out.vectors.col(j) = Z.col(order[j]);
  }
  return out;
}

}  // namespace

Eigenpairs eigendecompose(const Mat& H, double symmetry_tol) {
  if (H.rows() != H.cols()) throw ValidationError("eigendecompose: matrix is not square");
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol * scale)
    throw ValidationError("eigendecompose: matrix is not symmetric (max asymmetry " +
                          std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecompose: solver did not converge");
  Eigenpairs out{es.eigenvalues(), es.eigenvectors()};
  fix_signs(out.vectors);
  return out;
}

Eigenpairs lowest_eigenpairs(const SpMat& H, int k, Eigen::Index dense_limit) {
  const Eigen::Index n = H.rows();
  if (k <= 0) throw ConfigError("lowest_eigenpairs: k must be positive");
  if (n <= dense_limit || k + 2 >= n) {
    Eigenpairs all = eigendecompose(Mat(H));
    int kk = static_cast<int>(std::min<Eigen::Index>(k, n));
    return {all.values.head(kk), all.vectors.leftCols(kk)};
  }
  Eigenpairs out = arpack_lowest(H, k);
  fix_signs(out.vectors);
  return out;
}

}  // namespace dtc
