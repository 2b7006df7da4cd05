#pragma once

#include <functional>
#include <string>

#include "ahres/extension.hpp"

namespace ahres {

// Boundary handling at mu_right. Disk models carry the polar center there;
// the cylinder neck is a regular point split into reflection-parity sectors,
// which together stand in for the periodic double cover.
enum class BoundaryKind { center_regularity, neck_even, neck_odd };
const char* to_string(BoundaryKind b);

// Two Chebyshev-Lobatto blocks: [mu_left, mu_split] carries the absorbing
// layer, [mu_split, mu_right] contains mu = 0 as an interior point. The left
// block has no condition at mu_left (outflow across a spacelike end); it is
// joined to the right block by value and derivative matching at mu_split.
struct Grid {
  VecR nodes;  // left block then right block, each ascending; mu_split appears twice
  int n_left = 0, n_right = 0;
  Real mu_left = 0, mu_split = 0, mu_right = 0;
  MatR D1, D2;        // block diagonal
  VecR quad_weights;  // Clenshaw-Curtis, per block
  BoundaryKind bc = BoundaryKind::center_regularity;
  int mode = 0;

  int size() const { return n_left + n_right; }
  int right_begin() const { return n_left; }
};

struct ChebBlock {
  VecR nodes;  // ascending on [a, b]
  MatR D1;
  VecR weights;
};
// Chebyshev-Lobatto nodes, differentiation matrix and Clenshaw-Curtis weights.
ChebBlock chebyshev_block(Real a, Real b, int N);

// Barycentric interpolation of block values at x.
Cplx barycentric_eval(const VecR& nodes, const VecC& values, Real x);

Grid build_grid(Real mu_left, Real mu_split, Real mu_right, int n_left, int n_right, BoundaryKind bc, int mode);

// Default split of a total node count N between the two blocks.
int default_left_nodes(int N);

// D_mu = -i d/dmu throughout.
struct BlockOperator {
  MatC A2, A1, A0;
};
// Rows of P_sigma = A2 s^2 + A1 s + A0 collocated at every node of one block.
BlockOperator assemble_block_operator(const ExtendedCoeffs& c, const VecR& nodes, const MatR& D1, int mode);

struct ModeOperatorPencil {
  Grid grid;
  int mode = 0;
  int n = 2;
  MatC A2, A1, A0;
  std::function<MatC(Cplx)> Q_rule;  // absorption, on the full grid; empty means off
  bool q_is_polynomial = true;
  std::string absorption_mode = "off";

  // T(s) = A2 s^2 + A1 s + A0 - i Q(s).
  MatC T(Cplx s) const;
  MatC dT(Cplx s) const;
  MatC Q(Cplx s) const;
  // Nodes where the ODE is collocated (rows free for a right-hand side).
  std::vector<int> equation_rows() const;
};

ModeOperatorPencil assemble_pencil(const ExtendedCoeffs& c, const Grid& grid, int mode_index,
                                   const EvenMetricModel& model);

// Gram matrix of the semiclassical H^s_h norm on the grid. Integer s >= 0 sums
// h^{2j} (D1^j)^* W D1^j; fractional s uses (1 + h^2 lambda)^s on the W-eigenbasis
// of D1^* W D1; s < 0 gives the dual norm W M_{|s|}^{-1} W.
MatC sobolev_norm_matrix(const Grid& grid, Real s, Real h);
Real sobolev_norm(const MatC& gram, const VecC& u);

// Discrete self-adjointness defect for real sigma, density w^{(n-1)/2} dmu:
// max over pairs of smooth bumps |<Pu,v> - <u,Pv>| / (|Pu| |v|) on one block.
Real weighted_asymmetry(const ExtendedCoeffs& c, int mode, Real sigma, int N, Real a, Real b);

// h Im<P u, u>/<u, u> for u = exp(i xi mu/h) times a bump of width sqrt(h) at mu = 0.
Real subprincipal_rayleigh(const ExtendedCoeffs& c, int mode, Cplx sigma, Real xi, Real h);

}  // namespace ahres
