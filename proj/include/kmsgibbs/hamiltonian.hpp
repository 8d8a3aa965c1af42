// Copyright 2026 The kmsgibbs Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kmsgibbs/linalg.hpp"

namespace kmsgibbs {

struct BohrCluster {
  double nu = 0.0;
  std::vector<std::pair<int, int>> pairs;  // (i, j) with E_i - E_j ~ nu
};

/**
 * Hermitian H (inverse temperature already absorbed) with its eigensystem,
 * Bohr frequencies clustered to an absolute tolerance, and distinct energy
 * levels clustered the same way.
 */
class HamiltonianModel {
 public:
  explicit HamiltonianModel(const CMatrix& h, double cluster_tol = -1.0) : h_(h) {
    require_hermitian(h, "Hamiltonian");
    h_ = hermitian_part(h);
    eig_ = herm_eig(h_);
    norm_ = eig_.values.cwiseAbs().maxCoeff();
    tol_ = cluster_tol > 0 ? cluster_tol : 1e-9 * std::max(1.0, norm_);
    build_clusters();
    build_levels();
  }

  int dim() const { return static_cast<int>(h_.rows()); }
  const CMatrix& H() const { return h_; }
  const EigenSystem& eig() const { return eig_; }
  const RVector& energies() const { return eig_.values; }
  const CMatrix& V() const { return eig_.vectors; }
  double norm() const { return norm_; }
  double cluster_tol() const { return tol_; }
  const std::vector<BohrCluster>& bohr() const { return clusters_; }
  int num_clusters() const { return static_cast<int>(clusters_.size()); }
  int cluster_of(int i, int j) const { return cluster_index_(i, j); }
  int zero_cluster() const { return cluster_index_(0, 0); }
  /** Index of the cluster at -nu. */
  int mirror(int k) const { return num_clusters() - 1 - k; }
  const std::vector<double>& levels() const { return levels_; }
  int level_of(int i) const { return level_index_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& notes() const { return notes_; }

  std::optional<int> find_cluster(double nu) const {
    auto it = std::lower_bound(clusters_.begin(), clusters_.end(), nu,
                               [](const BohrCluster& c, double v) { return c.nu < v; });
    std::optional<int> best;
    double best_dist = 0;
    for (auto jt : {it, it == clusters_.begin() ? it : std::prev(it)}) {
      if (jt == clusters_.end()) continue;
      const double dist = std::abs(jt->nu - nu);
      if (dist <= tol_ && (!best || dist < best_dist)) {
        best = static_cast<int>(jt - clusters_.begin());
        best_dist = dist;
      }
    }
    return best;
  }

  CMatrix to_eigenbasis(const CMatrix& m) const { return V().adjoint() * m * V(); }
  CMatrix from_eigenbasis(const CMatrix& m) const { return V() * m * V().adjoint(); }

  /** W(i, j) = f(nu of the cluster containing (i, j)). */
  template <class F>
  CMatrix weight_matrix(F&& f) const {
    std::vector<cplx> per_cluster(clusters_.size());
    for (std::size_t k = 0; k < clusters_.size(); ++k) per_cluster[k] = cplx(f(clusters_[k].nu));
    const int d = dim();
    CMatrix w(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) w(i, j) = per_cluster[static_cast<std::size_t>(cluster_index_(i, j))];
    return w;
  }

 private:
  void build_clusters() {
    const int d = dim();
    std::vector<std::tuple<double, int, int>> diffs;
    diffs.reserve(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) diffs.emplace_back(eig_.values(i) - eig_.values(j), i, j);
    std::sort(diffs.begin(), diffs.end());
    cluster_index_.resize(d, d);
    std::vector<double> sums;
    for (std::size_t k = 0; k < diffs.size(); ++k) {
      const auto& [v, i, j] = diffs[k];
      if (k == 0 || v - std::get<0>(diffs[k - 1]) > tol_) {
        clusters_.push_back({});
        sums.push_back(0.0);
      }
      clusters_.back().pairs.emplace_back(i, j);
      sums.back() += v;
      cluster_index_(i, j) = static_cast<int>(clusters_.size()) - 1;
    }
    // The difference multiset is exactly antisymmetric, so cluster k mirrors
    // cluster n-1-k; symmetrizing the means makes nu_k = -nu_{n-1-k} exactly.
    const std::size_t n = clusters_.size();
    std::vector<double> means(n);
    for (std::size_t k = 0; k < n; ++k) means[k] = sums[k] / static_cast<double>(clusters_[k].pairs.size());
    for (std::size_t k = 0; k < n; ++k) clusters_[k].nu = 0.5 * (means[k] - means[n - 1 - k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (clusters_[k + 1].nu - clusters_[k].nu < 10 * tol_) {
        std::ostringstream os;
        os << "Bohr clusters at " << clusters_[k].nu << " and " << clusters_[k + 1].nu
           << " are closer than 10*cluster_tol=" << 10 * tol_;
        notes_.push_back(os.str());
      }
    }
  }

  void build_levels() {
    const int d = dim();
    level_index_.resize(static_cast<std::size_t>(d));
    std::vector<double> sums;
    std::vector<int> counts;
    for (int i = 0; i < d; ++i) {
      if (i == 0 || eig_.values(i) - eig_.values(i - 1) > tol_) {
        sums.push_back(0.0);
        counts.push_back(0);
      }
      sums.back() += eig_.values(i);
      counts.back() += 1;
      level_index_[static_cast<std::size_t>(i)] = static_cast<int>(sums.size()) - 1;
    }
    for (std::size_t k = 0; k < sums.size(); ++k) levels_.push_back(sums[k] / counts[k]);
  }

  CMatrix h_;
  EigenSystem eig_;
  double norm_ = 0.0;
  double tol_ = 0.0;
  std::vector<BohrCluster> clusters_;
  Eigen::MatrixXi cluster_index_;
  std::vector<double> levels_;
  std::vector<int> level_index_;
  std::vector<std::string> notes_;
};

/** M_nu for the cluster with index k. */
inline CMatrix component_at_cluster(const CMatrix& m, const HamiltonianModel& h, int k) {
  const CMatrix mt = h.to_eigenbasis(m);
  CMatrix out = CMatrix::Zero(mt.rows(), mt.cols());
  for (const auto& [i, j] : h.bohr()[static_cast<std::size_t>(k)].pairs) out(i, j) = mt(i, j);
  return h.from_eigenbasis(out);
}

/** M_nu = sum over pairs with E_i - E_j = nu of <psi_i|M|psi_j> |psi_i><psi_j|. */
inline CMatrix component_at_frequency(const CMatrix& m, const HamiltonianModel& h, double nu) {
  if (m.rows() != h.dim() || m.cols() != h.dim()) fail(ErrorCode::kShape, "operator dimension does not match H");
  const auto k = h.find_cluster(nu);
  if (!k) {
    std::ostringstream os;
    os << "frequency " << nu << " is not a Bohr frequency of H (cluster_tol " << h.cluster_tol() << ")";
    fail(ErrorCode::kUnknownFrequency, os.str());
  }
  return component_at_cluster(m, h, *k);
}

/** All components, indexed like h.bohr(). */
inline std::vector<CMatrix> components(const CMatrix& m, const HamiltonianModel& h) {
  std::vector<CMatrix> out;
  out.reserve(h.bohr().size());
  for (int k = 0; k < h.num_clusters(); ++k) out.push_back(component_at_cluster(m, h, k));
  return out;
}

/** Gibbs state rho = e^{-(H - E_min)} / Z with cached fractional powers. */
struct GibbsState {
  CMatrix rho;
  CMatrix rho_quarter;       // rho^{1/4}
  CMatrix rho_mquarter;      // rho^{-1/4}
  CMatrix rho_half;          // rho^{1/2}
  CMatrix rho_mhalf;         // rho^{-1/2}
  RVector populations;       // eigenvalues of rho in the eigenbasis order of H
  CMatrix vectors;           // eigenvectors of H
  double shift = 0.0;        // E_min
  double condition = 1.0;    // p_max / p_min
  std::vector<std::string> notes;

  int dim() const { return static_cast<int>(rho.rows()); }

  /** rho^a computed spectrally. */
  CMatrix power(double a) const {
    CVector v(populations.size());
    for (Eigen::Index i = 0; i < populations.size(); ++i) v(i) = std::pow(populations(i), a);
    return vectors * v.asDiagonal() * vectors.adjoint();
  }
};

inline constexpr double kMaxHamiltonianNorm = 60.0;

inline GibbsState gibbs(const HamiltonianModel& h) {
  if (h.norm() > kMaxHamiltonianNorm) {
    std::ostringstream os;
    os << "||H|| = " << h.norm() << " exceeds the supported cap " << kMaxHamiltonianNorm;
    fail(ErrorCode::kDomain, os.str());
  }
  GibbsState g;
  const RVector& e = h.energies();
  g.shift = e.minCoeff();
  RVector w(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) w(i) = std::exp(-(e(i) - g.shift));
  g.populations = w / w.sum();
  g.vectors = h.V();
  g.rho = g.power(1.0);
  g.rho_quarter = g.power(0.25);
  g.rho_mquarter = g.power(-0.25);
  g.rho_half = g.power(0.5);
  g.rho_mhalf = g.power(-0.5);
  g.condition = g.populations.maxCoeff() / g.populations.minCoeff();
  if (g.condition > 1e14) {
    std::ostringstream os;
    os << "ill-conditioned Gibbs state: condition number " << g.condition;
    g.notes.push_back(os.str());
  }
  return g;
}

struct JumpSet {
  std::vector<CMatrix> ops;
  std::vector<std::string> labels;
  bool self_adjoint = false;
};

/** True when every adjoint equals some member to 1e-12. */
inline bool closed_under_adjoint(const std::vector<CMatrix>& ops, double tol = 1e-12) {
  for (const auto& a : ops) {
    const CMatrix ad = a.adjoint();
    bool found = false;
    for (const auto& b : ops) {
      if (b.rows() == ad.rows() && (b - ad).cwiseAbs().maxCoeff() <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline JumpSet make_jump_set(std::vector<CMatrix> ops, std::vector<std::string> labels = {}) {
  JumpSet js;
  if (labels.empty())
    for (std::size_t k = 0; k < ops.size(); ++k) labels.push_back("A" + std::to_string(k));
  js.self_adjoint = closed_under_adjoint(ops);
  js.ops = std::move(ops);
  js.labels = std::move(labels);
  return js;
}

namespace pauli {
inline CMatrix I2() { return CMatrix::Identity(2, 2); }
inline CMatrix X() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline CMatrix Y() {
  CMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline CMatrix Z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

/** Single-site operator `op` on site `site` of an L-qubit chain (site 0 most significant). */
inline CMatrix site_operator(const CMatrix& op, int site, int L) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = 0; s < L; ++s) out = kron(out, s == site ? op : pauli::I2());
  return out;
}

inline CMatrix two_site_operator(const CMatrix& a, int i, const CMatrix& b, int j, int L) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = 0; s < L; ++s) out = kron(out, s == i ? a : (s == j ? b : pauli::I2()));
  return out;
}

/** 3L single-site Pauli jumps X, Y, Z per site. */
inline JumpSet pauli_jump_set(int L) {
  if (L < 1) fail(ErrorCode::kDomain, "pauli_jump_set needs L >= 1");
  JumpSet js;
  const char* names[3] = {"X", "Y", "Z"};
  const CMatrix ps[3] = {pauli::X(), pauli::Y(), pauli::Z()};
  for (int s = 0; s < L; ++s)
    for (int a = 0; a < 3; ++a) {
      js.ops.push_back(site_operator(ps[a], s, L));
      js.labels.push_back(std::string(names[a]) + std::to_string(s));
    }
  js.self_adjoint = true;
  return js;
}

/** Model descriptor; see README for the JSON form. */
struct ModelSpec {
  std::string model = "ising";  // ising | heisenberg | diagonal | matrix
  int L = 1;
  double beta = 1.0;
  double J = 1.0;
  double hx = 0.0;
  double hz = 0.0;
  bool periodic = false;
  std::optional<RVector> diagonal;  // for "diagonal"
  std::optional<CMatrix> matrix;    // for "matrix"
};

inline constexpr long kMaxSuperopDim = 4096;

inline int model_dimension(const ModelSpec& s) {
  if (s.model == "diagonal") return s.diagonal ? static_cast<int>(s.diagonal->size()) : 0;
  if (s.model == "matrix") return s.matrix ? static_cast<int>(s.matrix->rows()) : 0;
  if (s.L < 1 || s.L > 30) return -1;
  return 1 << s.L;
}

/** Unscaled model Hamiltonian (before multiplying by beta). */
inline CMatrix model_matrix(const ModelSpec& s) {
  const int d = model_dimension(s);
  if (d < 0 || static_cast<long>(d) * d > kMaxSuperopDim) {
    std::ostringstream os;
    os << "model dimension too large for dense superoperators (d^2 > " << kMaxSuperopDim << ")";
    fail(ErrorCode::kSize, os.str());
  }
  if (s.model == "diagonal") {
    if (!s.diagonal || s.diagonal->size() == 0) fail(ErrorCode::kParse, "diagonal model needs entries");
    return s.diagonal->cast<cplx>().asDiagonal();
  }
  if (s.model == "matrix") {
    if (!s.matrix) fail(ErrorCode::kParse, "matrix model needs entries");
    return *s.matrix;
  }
  const int L = s.L;
  CMatrix h = CMatrix::Zero(d, d);
  const bool heis = s.model == "heisenberg";
  if (!heis && s.model != "ising") fail(ErrorCode::kParse, "unknown model '" + s.model + "'");
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < L; ++i) bonds.emplace_back(i, i + 1);
  if (s.periodic && L >= 3) bonds.emplace_back(L - 1, 0);
  for (const auto& [i, j] : bonds) {
    h += s.J * two_site_operator(pauli::Z(), i, pauli::Z(), j, L);
    if (heis) {
      h += s.J * two_site_operator(pauli::X(), i, pauli::X(), j, L);
      h += s.J * two_site_operator(pauli::Y(), i, pauli::Y(), j, L);
    }
  }
  for (int i = 0; i < L; ++i) {
    if (s.hx != 0.0) h += s.hx * site_operator(pauli::X(), i, L);
    if (s.hz != 0.0) h += s.hz * site_operator(pauli::Z(), i, L);
  }
  return h;
}

/** beta * H_model as a HamiltonianModel. */
inline HamiltonianModel lattice_hamiltonian(const ModelSpec& s) {
  return HamiltonianModel(s.beta * model_matrix(s));
}

}  // namespace kmsgibbs
