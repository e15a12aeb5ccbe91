#pragma once

// Dirac matrices gamma^P with {gamma^P, gamma^Q} = 2 a^PQ, a = diag(1,-1,-1,-1).

#include "finsleroid/types.hpp"

#include <array>

namespace finsleroid {

struct GammaAlgebra {
  std::array<CMat4, 4> up;  // gamma^P

  // gamma_P = a_PQ gamma^Q
  CMat4 low(int P) const { return minkowski_sign(P) * up[P]; }

  // gamma^P k_P
  CMat4 slash(const CVec4& k) const {
    CMat4 s = CMat4::Zero();
    for (int P = 0; P < 4; ++P) s += k[P] * up[P];
    return s;
  }
  CMat4 slash(const Vec4& k) const { return slash(CVec4(k.cast<cplx>())); }
};

namespace detail {

inline std::array<Eigen::Matrix2cd, 3> pauli() {
  Eigen::Matrix2cd s1, s2, s3;
  s1 << 0, 1, 1, 0;
  s2 << 0, -kI, kI, 0;
  s3 << 1, 0, 0, -1;
  return {s1, s2, s3};
}

inline CMat4 blocks(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, const Eigen::Matrix2cd& c,
                    const Eigen::Matrix2cd& d) {
  CMat4 m;
  m << a, b, c, d;
  return m;
}

}  // namespace detail

// Standard representation: gamma^0 = diag(I, -I), gamma^a = [[0, s_a], [-s_a, 0]].
inline GammaAlgebra dirac_representation() {
  const auto s = detail::pauli();
  const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity(), Z = Eigen::Matrix2cd::Zero();
  GammaAlgebra G;
  G.up[0] = detail::blocks(I, Z, Z, -I);
  for (int a = 0; a < 3; ++a) G.up[a + 1] = detail::blocks(Z, s[a], -s[a], Z);
  return G;
}

// U gamma^P U^dagger
inline GammaAlgebra transformed(const GammaAlgebra& G, const CMat4& U) {
  GammaAlgebra out;
  for (int P = 0; P < 4; ++P) out.up[P] = U * G.up[P] * U.adjoint();
  return out;
}

// The unitary taking the standard representation to the chiral one.
inline CMat4 chiral_unitary() {
  const Eigen::Matrix2cd I = Eigen::Matrix2cd::Identity();
  return detail::blocks(I, -I, I, I) / std::sqrt(2.0);
}

inline GammaAlgebra chiral_representation() { return transformed(dirac_representation(), chiral_unitary()); }

// max |gamma^P gamma^Q + gamma^Q gamma^P - 2 a^PQ|
inline double anticommutator_defect(const GammaAlgebra& G) {
  double d = 0;
  for (int P = 0; P < 4; ++P)
    for (int Q = 0; Q < 4; ++Q) {
      const CMat4 ac = G.up[P] * G.up[Q] + G.up[Q] * G.up[P] - 2.0 * minkowski()(P, Q) * CMat4::Identity();
      d = std::max(d, ac.cwiseAbs().maxCoeff());
    }
  return d;
}

}  // namespace finsleroid
