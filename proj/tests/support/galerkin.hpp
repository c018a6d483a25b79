#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "critmag/functionals.hpp"

namespace galerkin {

// Dense assembly of f''_0(z_0) through the pointwise bilinear form. Column j of
// block l is the image of the j-th nodal profile times one degree-l harmonic;
// every degree is excited at once since f''_0(z_0) does not couple modes.
struct DenseBlocks {
  std::vector<Eigen::MatrixXd> real, imag;  // per degree, radial x radial
  double coupling = 0.0;  // largest image mass outside the excited modes, relative
};

inline DenseBlocks assemble(const critmag::DiscretizationPtr& disc) {
  using namespace critmag;
  const int L = disc->k_max(), R = disc->n_radial();
  const Bubble b = Bubble::unit(disc->dim());
  std::vector<int> rep(L + 1);
  for (int l = 0; l <= L; ++l) rep[l] = disc->modes_of_degree(l).front();
  DenseBlocks out;
  out.real.assign(L + 1, Eigen::MatrixXd(R, R));
  out.imag.assign(L + 1, Eigen::MatrixXd(R, R));
  for (int block = 0; block < 2; ++block) {
    for (int j = 0; j < R; ++j) {
      ComplexField v(disc, b.frame());
      Eigen::MatrixXd& c = block == 0 ? v.re() : v.im();
      for (int l = 0; l <= L; ++l) c(rep[l], j) = 1.0;
      const ComplexField h = hessian_f0_apply(b, v);
      const Eigen::MatrixXd& hc = block == 0 ? h.re() : h.im();
      const Eigen::MatrixXd& other = block == 0 ? h.im() : h.re();
      Eigen::MatrixXd rest = hc;
      for (int l = 0; l <= L; ++l) {
        (block == 0 ? out.real : out.imag)[l].col(j) = hc.row(rep[l]).transpose();
        rest.row(rep[l]).setZero();
      }
      out.coupling = std::max(out.coupling, (rest.norm() + other.norm()) / hc.norm());
    }
  }
  return out;
}

// Eigenvalues of the E-representative matrix, ascending.
inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  Eigen::VectorXd ev = es.eigenvalues().real();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

}  // namespace galerkin
