// Copyright 2026 The shearlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>

#include "dynsys.hpp"
#include "errors.hpp"

namespace shearlab {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

IntegratorConfig tight_config(IntegratorConfig c) {
  c.abs_tol = std::min(c.abs_tol, 1e-12);
  c.rel_tol = std::min(c.rel_tol, 1e-12);
  return c;
}

// Integrates a matrix ODE X' = G(s, X) over [0, S], recording X at s_j = j S / M
// for j = 0..M.
template <class Rhs>
std::vector<MatrixXd> sample_matrix_ode(Rhs&& g, const MatrixXd& X0, double S, int M,
                                        const IntegratorConfig& cfg) {
  const int r = static_cast<int>(X0.rows()), c = static_cast<int>(X0.cols());
  std::vector<MatrixXd> out(M + 1);
  out[0] = X0;
  std::vector<double> y(X0.data(), X0.data() + r * c), buf(r * c);
  Dopri5 ode(cfg);
  int next = 1;
  const OdeRhs rhs = [&](double s, std::span<const double> x, std::span<double> dx) {
    const Eigen::Map<const MatrixXd> X(x.data(), r, c);
    Eigen::Map<MatrixXd> D(dx.data(), r, c);
    D = g(s, X);
  };
  ode.integrate(rhs, 0.0, S, y, [&](const DenseStep& step) {
    while (next < M) {
      const double sj = S * next / M;
      if (sj > step.t1()) break;
      step.eval(sj, buf);
      out[next] = Eigen::Map<const MatrixXd>(buf.data(), r, c);
      ++next;
    }
    return true;
  });
  for (; next < M; ++next) out[next] = Eigen::Map<const MatrixXd>(y.data(), r, c);
  out[M] = Eigen::Map<const MatrixXd>(y.data(), r, c);
  return out;
}

// Gram-Schmidt of the rows of U against the unit vector t and each other.
void orthonormalise_rows(MatrixXd& U, const VectorXd& t) {
  for (int i = 0; i < U.rows(); ++i) {
    VectorXd v = U.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      v -= v.dot(t) * t;
      for (int k = 0; k < i; ++k) v -= v.dot(U.row(k).transpose()) * U.row(k).transpose();
    }
    U.row(i) = v.normalized().transpose();
  }
}

// Real logarithm of a rotation; null when it does not exist (eigenvalue -1).
bool rotation_log(const MatrixXd& R, MatrixXd& out) {
  if (R.rows() == 0) {
    out = R;
    return true;
  }
  if (R.determinant() <= 0.0) return false;
  Eigen::EigenSolver<MatrixXd> es(R, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i] + 1.0) < 1e-6) return false;
  if ((R - MatrixXd::Identity(R.rows(), R.cols())).norm() < 1e-15) {
    out = MatrixXd::Zero(R.rows(), R.cols());
    return true;
  }
  out = R.log();
  out = 0.5 * (out - out.transpose());
  return out.allFinite();
}

std::vector<double> column(const std::vector<MatrixXd>& v, int a, int b) {
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j](a, b);
  return out;
}

}  // namespace

const char* to_string(FrameMethod m) noexcept {
  return m == FrameMethod::Frenet ? "frenet" : "parallel_transport";
}

FrameMethod frame_method_from_string(const std::string& s) {
  if (s == "frenet") return FrameMethod::Frenet;
  if (s == "parallel_transport" || s == "parallel") return FrameMethod::ParallelTransport;
  throw Error(ErrorCode::InvalidArgument, "unknown frame method '" + s + "'");
}

double MovingFrame::orthonormality_error() const {
  double e = 0.0;
  for (const auto& M : E)
    e = std::max(e, (M * M.transpose() - MatrixXd::Identity(M.rows(), M.rows())).cwiseAbs().maxCoeff());
  return e;
}

double MovingFrame::skew_error() const {
  double e = 0.0;
  for (const auto& M : K) e = std::max(e, (M + M.transpose()).cwiseAbs().maxCoeff());
  return e;
}

double MovingFrame::tangent_error(const LimitCycle& cycle) const {
  double e = 0.0;
  const int N = cycle.nodes();
  for (int j = 0; j < nodes(); ++j)
    e = std::max(e, (E[j].row(dim() - 1).transpose() - cycle.node_tangents().col(j % N)).norm());
  return e;
}

MovingFrame build_frame(const LimitCycle& cycle, FrameMethod method) {
  const int n = cycle.dim(), N = cycle.nodes(), M = 2 * N;
  const double L = cycle.length();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "a moving frame needs dimension >= 2");
  MovingFrame fr;
  fr.method = method;
  fr.L = L;
  fr.E.resize(M);

  // Spectral representation of gamma on [0, L).
  std::vector<TrigSeries> pos(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(N);
    for (int j = 0; j < N; ++j) v[j] = cycle.node_points()(i, j);
    pos[i] = TrigSeries::from_samples(v, L, 1e-13);
  }
  auto derivs = [&](double s, int order) {
    MatrixXd D(n, order + 1);
    std::vector<double> out(order + 1);
    for (int i = 0; i < n; ++i) {
      pos[i].eval(s, order, out.data());
      for (int k = 0; k <= order; ++k) D(i, k) = out[k];
    }
    return D;
  };
  auto tangent = [&](int j) -> VectorXd { return cycle.node_tangents().col(j % N); };

  if (method == FrameMethod::Frenet) {
    for (int j = 0; j < N; ++j) {
      const MatrixXd D = derivs(cycle.node_s(j), n);
      MatrixXd Ej(n, n);
      Ej.row(n - 1) = tangent(j).transpose();
      for (int k = 0; k < n - 1; ++k) {
        VectorXd v = D.col(k + 2);
        for (int pass = 0; pass < 2; ++pass) {
          v -= v.dot(tangent(j)) * tangent(j);
          for (int q = 0; q < k; ++q) v -= v.dot(Ej.row(q).transpose()) * Ej.row(q).transpose();
        }
        const double piv = v.norm();
        if (piv < 1e-10)
          throw Error(ErrorCode::Precondition,
                      "Frenet frame degenerate: derivatives of gamma are dependent at s = " +
                          std::to_string(cycle.node_s(j)));
        Ej.row(k) = (v / piv).transpose();
      }
      fr.E[j] = Ej;
      fr.E[j + N] = Ej;
    }
    // A sign flip between neighbouring nodes means a derivative of gamma passed
    // through zero (an inflection): the Frenet frame is not continuous there.
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < n - 1; ++k)
        if (fr.E[j].row(k).dot(fr.E[(j + 1) % N].row(k)) < 0.0)
          throw Error(ErrorCode::Precondition,
                      "Frenet frame degenerate: e_" + std::to_string(k + 1) +
                          " flips between s = " + std::to_string(cycle.node_s(j)) + " and the next node");
    fr.holonomy = MatrixXd::Identity(n - 1, n - 1);
    fr.closes_after_L = true;
  } else {
    // Initial normal rows: standard basis vectors orthogonalised against the tangent.
    const VectorXd t0 = tangent(0);
    MatrixXd U0(n - 1, n);
    {
      int filled = 0;
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return std::abs(t0[a]) < std::abs(t0[b]); });
      for (int idx : order) {
        if (filled == n - 1) break;
        VectorXd v = VectorXd::Unit(n, idx);
        for (int pass = 0; pass < 2; ++pass) {
          v -= v.dot(t0) * t0;
          for (int q = 0; q < filled; ++q) v -= v.dot(U0.row(q).transpose()) * U0.row(q).transpose();
        }
        if (v.norm() < 1e-3) continue;
        U0.row(filled++) = v.normalized().transpose();
      }
    }
    // e_i' = -(e_i . gamma'') gamma'.
    const auto transport = [&](double s, const Eigen::Map<const MatrixXd>& U) -> MatrixXd {
      const MatrixXd D = derivs(s, 2);
      const double sp = D.col(1).norm();
      const VectorXd t = D.col(1) / sp;
      const VectorXd k = (D.col(2) - t * t.dot(D.col(2))) / sp;
      return -(U * k) * t.transpose();
    };
    IntegratorConfig cfg;
    cfg.abs_tol = cfg.rel_tol = 1e-12;
    std::vector<MatrixXd> U = sample_matrix_ode(transport, U0, 2.0 * L, M, cfg);
    for (int j = 0; j <= M; ++j) orthonormalise_rows(U[j], tangent(j % N));

    MatrixXd R = U[N] * U[0].transpose();
    fr.holonomy = R;
    MatrixXd Omega;
    double period = L;
    if (!rotation_log(R, Omega)) {
      fr.closes_after_L = false;
      period = 2.0 * L;
      const MatrixXd R2 = U[M] * U[0].transpose();
      if (!rotation_log(R2, Omega))
        throw Error(ErrorCode::Unsupported, "frame holonomy has no real logarithm over 2L");
    }
    Omega /= period;
    for (int j = 0; j < M; ++j) {
      const double s = 2.0 * L * j / M;
      const MatrixXd Q = (-s * Omega).exp();
      MatrixXd Ej(n, n);
      Ej.topRows(n - 1) = Q * U[j];
      Ej.row(n - 1) = tangent(j).transpose();
      fr.E[j] = Ej;
    }
  }

  // Orientation: det E > 0.
  if (fr.E[0].determinant() < 0.0)
    for (auto& Ej : fr.E) Ej.row(0) *= -1.0;

  // K = E' E^T with E' by spectral differentiation over [0, 2L).
  fr.K.assign(M, MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const std::vector<double> dv = spectral_derivative(column(fr.E, a, b), 2.0 * L);
      for (int j = 0; j < M; ++j) fr.K[j](a, b) = dv[j];
    }
  for (int j = 0; j < M; ++j) fr.K[j] = fr.K[j] * fr.E[j].transpose();
  return fr;
}

NormalFormData compute_normal_form(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                                   const MovingFrame& frame, const IntegratorConfig& config) {
  const int n = cycle.dim(), nn = n - 1, N = cycle.nodes(), M = frame.nodes();
  if (frame.dim() != n || M != 2 * N)
    throw Error(ErrorCode::InvalidArgument, "frame does not match the cycle");
  const double L = cycle.length(), S = 2.0 * L;
  FlowSystem sys(prog, config);
  NormalFormData nf;
  nf.L = L;
  nf.s.resize(M);
  nf.b1.resize(M);
  nf.A_tilde.resize(M);
  nf.psi_n1.resize(M);
  std::vector<double> b0s(M);
  for (int j = 0; j < M; ++j) {
    nf.s[j] = S * j / M;
    const VectorXd x = cycle.node_points().col(j % N);
    const VectorXd f = sys.intrinsic(x);
    const MatrixXd Df = sys.intrinsic_jacobian(x);
    const double psi0 = f.norm();
    if (psi0 < 1e-12) throw Error(ErrorCode::Precondition, "flow speed vanishes on the cycle");
    const MatrixXd& E = frame.E[j];
    const MatrixXd& K = frame.K[j];
    const MatrixXd G = E * Df * E.transpose();  // G(j', i') = e_j' . Df e_i'
    b0s[j] = 1.0 / psi0;
    MatrixXd At(nn, nn);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < nn; ++c) At(i, c) = G(i, c) / psi0 - K(c, i);
    VectorXd b1(nn), pn1(nn);
    for (int c = 0; c < nn; ++c) {
      pn1[c] = G(n - 1, c);
      b1[c] = b0s[j] * (K(c, n - 1) - pn1[c] / psi0);
    }
    nf.A_tilde[j] = At;
    nf.b1[j] = b1;
    nf.psi_n1[j] = pn1;
  }
  nf.b0 = TrigSeries::from_samples(b0s, S, 1e-14);

  // Fundamental solution of dY/ds = A~(s) Y over [0, 2L].
  std::vector<TrigSeries> At(nn * nn);
  for (int i = 0; i < nn; ++i)
    for (int c = 0; c < nn; ++c) At[i * nn + c] = TrigSeries::from_samples(column(nf.A_tilde, i, c), S, 1e-14);
  const auto rhs = [&](double s, const Eigen::Map<const MatrixXd>& Y) -> MatrixXd {
    MatrixXd A(nn, nn);
    for (int i = 0; i < nn; ++i)
      for (int c = 0; c < nn; ++c) A(i, c) = At[i * nn + c](s);
    return A * Y;
  };
  nf.Y = sample_matrix_ode(rhs, MatrixXd::Identity(nn, nn), S, M, tight_config(config));
  const MatrixXd Mon = nf.Y[M];

  Eigen::EigenSolver<MatrixXd> es(Mon, true);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Convergence, "eigen-solver failure");
  std::vector<int> idx(nn);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < nn; ++i) {
    const std::complex<double> m = es.eigenvalues()[i];
    if (std::abs(m.imag()) > 1e-10 * std::max(1.0, std::abs(m)))
      throw Error(ErrorCode::Unsupported, "complex normal Floquet multipliers are not supported");
    if (m.real() <= 0.0)
      throw Error(ErrorCode::Unsupported, "non-positive normal Floquet multiplier over 2L");
    if (m.real() >= 1.0)
      throw Error(ErrorCode::Precondition, "normal Floquet multiplier outside the unit circle");
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
  });
  nf.multipliers.resize(nn);
  nf.A.resize(nn);
  nf.V.resize(nn, nn);
  for (int k = 0; k < nn; ++k) {
    const double m = es.eigenvalues()[idx[k]].real();
    nf.multipliers[k] = m;
    nf.A[k] = std::log(m) / S;
    VectorXd v = es.eigenvectors().col(idx[k]).real();
    v.normalize();
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    nf.V.col(k) = v;
  }
  Eigen::JacobiSVD<MatrixXd> svd(nf.V);
  const double rc = svd.singularValues()(nn - 1) / svd.singularValues()(0);
  if (!(rc > 1e-10))
    throw Error(ErrorCode::Unsupported, "normal monodromy is not diagonalizable");
  const MatrixXd Vinv = nf.V.inverse();
  nf.floquet_residual =
      (Mon - nf.V * (S * nf.A).array().exp().matrix().asDiagonal() * Vinv).norm();

  nf.P.resize(M);
  nf.Sigma = VectorXd::Zero(nn);
  for (int j = 0; j < M; ++j) {
    nf.P[j] = nf.Y[j] * nf.V * (-nf.s[j] * nf.A).array().exp().matrix().asDiagonal();
    nf.Sigma += nf.P[j].transpose() * nf.b1[j];
  }
  nf.Sigma *= S / M;
  nf.sigma = nf.Sigma.norm();
  nf.mu.resize(nn);
  nf.d = VectorXd::Zero(nn);
  for (int k = 0; k < nn; ++k) {
    nf.mu[k] = nf.A[0] / nf.A[k];
    if (nf.sigma > 0.0) nf.d[k] = nf.Sigma[k] * nf.mu[k] / nf.sigma;
  }
  return nf;
}

double PhiFunction::s_tilde(double s0) const {
  // B is strictly increasing with slope in [min b0, max b0].
  const double target = B(s0) + rho;
  double x = s0 + rho / B.slope();
  double lo = s0, hi = s0 + 2.0 * rho / B.slope() + two_L();
  while (B(hi) < target) hi += two_L();
  for (int it = 0; it < 100; ++it) {
    const double g = B(x) - target;
    if (g > 0.0) hi = std::min(hi, x);
    else lo = std::max(lo, x);
    if (std::abs(g) < 1e-15 * std::max(1.0, std::abs(target))) break;
    double xn = x - g / b0(x);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

void PhiFunction::eval_direct(double s0, double out[3]) const {
  const double st = s_tilde(s0);
  double b0a[2], b0b[2];
  b0.eval(s0, 1, b0a);
  b0.eval(st, 1, b0b);
  const double sp = b0a[0] / b0b[0];
  const double spp = (b0a[1] - b0b[1] * sp * sp) / b0b[0];
  out[0] = out[1] = out[2] = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    double za[2], zb[2];
    zeta[i].eval(s0, 1, za);
    zeta[i].eval(st, 1, zb);
    out[0] += d[i] * (Z[i](st) - Z[i](s0));
    out[1] += d[i] * (zb[0] * sp - za[0]);
    out[2] += d[i] * (zb[1] * sp * sp + zb[0] * spp - za[1]);
  }
}

MorseAnalysis analyse_morse(const TrigSeries& psi, double threshold, int scan) {
  MorseAnalysis res;
  const double P = psi.period();
  std::vector<double> g1(scan), g2(scan);
  double sup[4] = {0, 0, 0, 0};
  for (int k = 0; k < scan; ++k) {
    double v[4];
    psi.eval(P * k / scan, 3, v);
    g1[k] = v[1];
    g2[k] = v[2];
    for (int q = 0; q < 4; ++q) sup[q] = std::max(sup[q], std::abs(v[q]));
  }
  res.constants.K2 = 1.001 * std::max({sup[0], sup[1], sup[2], sup[3]});
  if (sup[1] < 1e-12 * std::max(1.0, sup[0]) || sup[1] < 1e-14) {
    res.reason = "critical set is the whole circle (Phi' vanishes identically)";
    return res;
  }
  auto polish = [&](double a, double b) {
    double fa = psi.derivative(a, 1);
    double x = 0.5 * (a + b);
    for (int it = 0; it < 100; ++it) {
      double v[3];
      psi.eval(x, 2, v);
      if ((v[1] < 0) == (fa < 0)) {
        a = x;
        fa = v[1];
      } else {
        b = x;
      }
      double xn = v[2] != 0.0 ? x - v[1] / v[2] : 0.5 * (a + b);
      if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
      if (std::abs(xn - x) < 1e-15 * std::max(1.0, P) || b - a < 1e-15 * P) {
        x = xn;
        break;
      }
      x = xn;
    }
    return x;
  };
  const double tiny = 1e-9 * sup[1];
  for (int k = 0; k < scan; ++k) {
    const int k1 = (k + 1) % scan;
    const double a = P * k / scan, b = P * (k + 1) / scan;
    if (g1[k] == 0.0) {
      res.critical_points.push_back({a, g2[k]});
    } else if ((g1[k] < 0) != (g1[k1] < 0) && g1[k1] != 0.0) {
      const double x = polish(a, b);
      res.critical_points.push_back({wrap(x, P), psi.derivative(x, 2)});
    } else {
      // A local minimum of |Phi'| near zero without a sign change hides a root pair.
      const int km = (k + scan - 1) % scan;
      if (std::abs(g1[k]) <= std::abs(g1[km]) && std::abs(g1[k]) <= std::abs(g1[k1]) &&
          std::abs(g1[k]) < tiny) {
        res.reason = "unresolved critical pair near s = " + std::to_string(a);
        return res;
      }
    }
  }
  std::sort(res.critical_points.begin(), res.critical_points.end(),
            [](const CriticalPoint& x, const CriticalPoint& y) { return x.s < y.s; });
  const int q = static_cast<int>(res.critical_points.size());
  if (q == 0) {
    res.reason = "no critical points found";
    return res;
  }
  double d1 = P;
  for (int i = 0; i < q; ++i) {
    const double next = i + 1 < q ? res.critical_points[i + 1].s : res.critical_points[0].s + P;
    if (q > 1) d1 = std::min(d1, next - res.critical_points[i].s);
  }
  auto& c = res.constants;
  c.d1 = d1;
  double minh = 1e300;
  for (const auto& cp : res.critical_points) minh = std::min(minh, std::abs(cp.phi2));
  double delta = d1 / 4.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    double d0 = minh, d2 = 1e300;
    for (int k = 0; k < scan; ++k) {
      const double s = P * k / scan;
      double dist = 1e300;
      for (const auto& cp : res.critical_points) dist = std::min(dist, circle_distance(s, cp.s, P));
      if (dist < delta) d0 = std::min(d0, std::abs(g2[k]));
      else d2 = std::min(d2, std::abs(g1[k]));
    }
    c.delta0 = delta;
    c.d0 = 0.999 * d0;
    c.d2 = d2 > 1e299 ? 0.0 : 0.999 * d2;
    if (c.d0 > 0.0 && c.d2 > 0.0 && d0 > 0.5 * minh) break;
    delta *= 0.5;
  }
  if (minh <= threshold) {
    res.reason = "degenerate critical point (|Phi''| <= " + std::to_string(threshold) + ")";
    return res;
  }
  if (!(c.d0 > 0.0 && c.d2 > 0.0 && c.delta0 < 0.5 * c.d1)) {
    res.reason = "Morse constants could not be established";
    return res;
  }
  res.morse = true;
  return res;
}

PhiFunction compute_phi(const dsl::FieldProgram& prog, const LimitCycle& cycle,
                        const MovingFrame& frame, const NormalFormData& nf,
                        const PhiOptions& opt) {
  if (!(opt.rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  const int n = cycle.dim(), nn = n - 1, N = cycle.nodes(), M = nf.nodes();
  const double S = nf.two_L();
  PhiFunction ph;
  ph.rho = opt.rho;
  ph.L = nf.L;
  ph.b0 = nf.b0;
  ph.B = nf.b0.antiderivative();
  ph.d = nf.d;

  dsl::Evaluator ev(prog);
  std::vector<std::vector<double>> zs(nn, std::vector<double>(M, 0.0));
  std::vector<double> F(n, 0.0);
  for (int j = 0; j < M; ++j) {
    const VectorXd x = cycle.node_points().col(j % N);
    if (prog.has_forcing()) ev.value(dsl::Which::Forcing, {x.data(), static_cast<std::size_t>(n)}, F);
    VectorXd phi(nn);
    for (int c = 0; c < nn; ++c) {
      phi[c] = 0.0;
      for (int i = 0; i < n; ++i) phi[c] += frame.E[j](c, i) * F[i];
    }
    const VectorXd z = nf.P[j].lu().solve(phi) * nf.b0(nf.s[j]);
    for (int c = 0; c < nn; ++c) zs[c][j] = z[c];
  }
  for (int c = 0; c < nn; ++c) {
    ph.zeta.push_back(TrigSeries::from_samples(zs[c], S, 1e-14));
    ph.Z.push_back(ph.zeta.back().antiderivative());
  }
  std::vector<double> samples(M);
  for (int j = 0; j < M; ++j) {
    const double s0 = nf.s[j];
    const double st = ph.s_tilde(s0);
    double v = 0.0;
    for (int c = 0; c < nn; ++c) v += ph.d[c] * (ph.Z[c](st) - ph.Z[c](s0));
    samples[j] = v;
  }
  ph.phi = TrigSeries::from_samples(samples, S, 1e-14);
  MorseAnalysis ma = analyse_morse(ph.phi, opt.hessian_threshold, opt.scan_points);
  ph.critical_points = std::move(ma.critical_points);
  ph.constants = ma.constants;
  ph.morse = ma.morse;
  ph.morse_reason = std::move(ma.reason);
  return ph;
}

void save_normal_form(const std::string& json_path, const std::string& csv_path,
                      const NormalFormData& nf, const PhiFunction* phi) {
  auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json h;
  h["L"] = nf.L;
  h["two_L"] = nf.two_L();
  h["nodes"] = nf.nodes();
  h["A"] = vec(nf.A);
  h["multipliers_2L"] = vec(nf.multipliers);
  h["Sigma"] = vec(nf.Sigma);
  h["sigma"] = nf.sigma;
  h["mu"] = vec(nf.mu);
  h["d"] = vec(nf.d);
  h["floquet_residual"] = nf.floquet_residual;
  if (phi) {
    nlohmann::json p;
    p["rho"] = phi->rho;
    nlohmann::json cps = nlohmann::json::array();
    for (const auto& cp : phi->critical_points) cps.push_back({{"s", cp.s}, {"phi2", cp.phi2}});
    p["critical_points"] = cps;
    p["morse"] = phi->morse;
    if (!phi->morse) p["reason"] = phi->morse_reason;
    p["constants"] = {{"K2", phi->constants.K2},
                      {"d0", phi->constants.d0},
                      {"d1", phi->constants.d1},
                      {"d2", phi->constants.d2},
                      {"delta0", phi->constants.delta0}};
    h["phi"] = p;
  }
  std::ofstream js(json_path);
  if (!js) throw Error(ErrorCode::Io, "cannot write " + json_path);
  js << std::setw(2) << h << '\n';

  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::Io, "cannot write " + csv_path);
  const int nn = nf.normal_dim();
  csv << "s,b0";
  for (int c = 0; c < nn; ++c) csv << ",b1_" << c + 1;
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < nn; ++b) csv << ",P" << a + 1 << b + 1;
  if (phi) {
    for (int c = 0; c < nn; ++c) csv << ",zeta_" << c + 1;
    csv << ",Phi,dPhi,d2Phi";
  }
  csv << '\n' << std::setprecision(17);
  for (int j = 0; j < nf.nodes(); ++j) {
    const double s = nf.s[j];
    csv << s << ',' << nf.b0(s);
    for (int c = 0; c < nn; ++c) csv << ',' << nf.b1[j][c];
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) csv << ',' << nf.P[j](a, b);
    if (phi) {
      for (int c = 0; c < nn; ++c) csv << ',' << phi->zeta[c](s);
      double v[3];
      phi->phi.eval(s, 2, v);
      csv << ',' << v[0] << ',' << v[1] << ',' << v[2];
    }
    csv << '\n';
  }
}

}  // namespace shearlab
