#include "hjbd/heat.hpp"

#include "hjbd/transport.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>

namespace hjbd {

namespace {

constexpr double kTheta13 = 5.371920351148152;

constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

Matrix symmetric_generator(const Space& space) {
  const Field s = space.measure().cwiseSqrt();
  const Field s_inv = s.cwiseInverse();
  Matrix q = space.conductance();
  const Field total = q.rowwise().sum();
  q.diagonal() -= total;
  return 0.5 * s_inv.asDiagonal() * q * s_inv.asDiagonal();
}

}  // namespace

Matrix expm_pade(const Matrix& a) {
  require(a.rows() == a.cols(), "matrix exponential needs a square matrix");
  const auto n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Matrix as = a / std::ldexp(1.0, squarings);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const auto& b = kPade13;
  const Matrix u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const Matrix u = as * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  const Matrix v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

Matrix expm_spectral(const Space& space, double h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric_generator(space));
  require(eig.info() == Eigen::Success, "eigen decomposition failed", ErrorCode::numerical);
  const Field s = space.measure().cwiseSqrt();
  const Matrix& v = eig.eigenvectors();
  const Field e = (h * eig.eigenvalues().array()).exp().matrix();
  const Matrix sym = v * e.asDiagonal() * v.transpose();
  return s.cwiseInverse().asDiagonal() * sym * s.asDiagonal();
}

void clean_stochastic(Matrix& k) {
  for (Eigen::Index x = 0; x < k.rows(); ++x) {
    for (Eigen::Index y = 0; y < k.cols(); ++y) {
      double& v = k(x, y);
      require(std::isfinite(v), "kernel entry is not finite", ErrorCode::numerical);
      require(v >= -1e-12, "kernel entry below -1e-12", ErrorCode::numerical);
      if (v < 0.0) v = 0.0;
    }
    const double row = k.row(x).sum();
    require(std::abs(row - 1.0) <= 1e-10, "kernel row sum deviates from 1 by more than 1e-10",
            ErrorCode::numerical);
    k.row(x) /= row;
  }
}

KernelMatrix heat_kernel(const Space& space, double h, ExpMethod method) {
  require(h >= 0.0 && std::isfinite(h), "kernel duration must be nonnegative");
  const auto n = static_cast<Eigen::Index>(space.size());
  KernelMatrix k{h, Matrix::Identity(n, n)};
  if (h == 0.0) return k;
  if (method == ExpMethod::pade) {
    k.entries = expm_pade(0.5 * h * space.generator_matrix());
  } else {
    k.entries = expm_spectral(space, h);
  }
  clean_stochastic(k.entries);
  return k;
}

Field semigroup_apply(const Space& space, double h, const Field& f) {
  return heat_kernel(space, h).entries * f;
}

double kernel_lipschitz_diagnostic(const Space& space, double h) {
  require(h > 0.0, "diagnostic needs h > 0");
  const Matrix k = heat_kernel(space, h).entries;
  const Field m_inv = space.measure().cwiseInverse();
  double lip = 0.0;
  for (const auto& e : space.edges()) {
    const Field p = k.row(e.a).transpose().cwiseProduct(m_inv);
    const Field q = k.row(e.b).transpose().cwiseProduct(m_inv);
    lip = std::max(lip, wasserstein2(space, p, q) / space.metric()(e.a, e.b));
  }
  return lip;
}

Spectrum generator_spectrum(const Space& space) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(-2.0 * symmetric_generator(space));
  require(eig.info() == Eigen::Success, "eigen decomposition failed", ErrorCode::numerical);
  const Field s_inv = space.measure().cwiseSqrt().cwiseInverse();
  return {eig.eigenvalues(), s_inv.asDiagonal() * eig.eigenvectors()};
}

}  // namespace hjbd
