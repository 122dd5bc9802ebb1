#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "envq/discrete_chain.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const envq::GeneratorMatrix& g) { return Eigen::MatrixXd(g.R); }

// Grassmann-Taksar-Heyman elimination: stationary vector of an irreducible
// generator without subtractions.
inline std::vector<double> gth(Eigen::MatrixXd Q) {
  const int n = static_cast<int>(Q.rows());
  for (int i = 0; i < n; ++i) Q(i, i) = 0.0;
  for (int k = n - 1; k > 0; --k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += Q(k, j);
    for (int i = 0; i < k; ++i) {
      const double f = Q(i, k) / s;
      for (int j = 0; j < k; ++j) Q(i, j) += f * Q(k, j);
      Q(i, k) = f;  // kept for the back substitution
    }
  }
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  for (int k = 1; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += pi[i] * Q(i, k);
    pi[k] = s;
  }
  double tot = 0.0;
  for (double x : pi) tot += x;
  for (double& x : pi) x /= tot;
  return pi;
}

// Row x0 of exp(t Q) through Eigen's Pade scaling and squaring.
inline std::vector<double> expm_row(const Eigen::MatrixXd& Q, int x0, double t) {
  const Eigen::MatrixXd P = (Q * t).exp();
  std::vector<double> r(P.cols());
  for (int j = 0; j < P.cols(); ++j) r[j] = P(x0, j);
  return r;
}

inline double half_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// Second-largest eigenvalue real part magnitude: spectral gap of a generator.
inline double spectral_gap(const Eigen::MatrixXd& Q) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(Q);
  double gap = 1e300;
  for (int i = 0; i < Q.rows(); ++i) {
    const double re = -es.eigenvalues()[i].real();
    if (re > 1e-9) gap = std::min(gap, re);
  }
  return gap;
}


// 1 + a * int_0^inf e^{(a - beta) t} min(1, alpha e^{-gamma t}) dt: Simpson on
// [0, ln(alpha)/gamma], the exponential tail beyond it in closed form.
inline double theta_integral(double alpha, double beta, double gamma, double a) {
  const double t0 = std::log(alpha) / gamma;
  double s = 0.0;
  if (t0 > 0.0) {
    const int n = 2000;
    const double h = t0 / n;
    auto f = [&](double t) { return std::exp((a - beta) * t); };
    double acc = f(0.0) + f(t0);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
    s += acc * h / 3.0;
  }
  s += std::exp((a - beta) * t0) / (beta + gamma - a);
  return 1.0 + a * s;
}

}  // namespace oracle
