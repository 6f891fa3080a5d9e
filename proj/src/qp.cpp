#include "retarget/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "retarget/error.hpp"
#include "retarget/format.hpp"

namespace retarget::qp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Solved: return "solved";
    case Status::MaxIters: return "max-iters";
    case Status::Infeasible: return "infeasible";
  }
  return "unknown";
}

void ConvexProgram::validate() const {
  const auto nv = static_cast<Eigen::Index>(q.size());
  require(P.rows() == nv && P.cols() == nv, "objective matrix must be n x n");
  require(A.cols() == nv, "constraint matrix must have n columns");
  require(lower.size() == A.rows() && upper.size() == A.rows(), "one bound pair per constraint row");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    require(!(lower[i] > upper[i]) && !std::isnan(lower[i]) && !std::isnan(upper[i]),
            "constraint row " + std::to_string(i) + " has lower > upper");
  for (int k = 0; k < P.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(P, k); it; ++it)
      if (it.row() == it.col()) require(it.value() >= 0, "objective matrix has a negative diagonal");
}

double ConvexProgram::objective(const Vector& x) const { return 0.5 * x.dot(P * x) + q.dot(x) + constant; }

double ConvexProgram::max_violation(const Vector& x) const {
  const Vector ax = A * x;
  double v = 0;
  for (Eigen::Index i = 0; i < ax.size(); ++i) v = std::max({v, lower[i] - ax[i], ax[i] - upper[i]});
  return v;
}

int ProgramBuilder::add_variables(int count) {
  const int first = n_;
  n_ += count;
  return first;
}

void ProgramBuilder::add_quadratic(int i, int j, double value) {
  p_.emplace_back(i, j, value);
  if (i != j) p_.emplace_back(j, i, value);
}

void ProgramBuilder::add_linear(int i, double value) { q_.emplace_back(i, value); }

int ProgramBuilder::add_constraint(std::initializer_list<Term> terms, double lower, double upper) {
  for (const Term& t : terms) a_.emplace_back(rows_, t.var, t.coef);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return rows_++;
}

int ProgramBuilder::add_constraint(const std::vector<Term>& terms, double lower, double upper) {
  for (const Term& t : terms) a_.emplace_back(rows_, t.var, t.coef);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return rows_++;
}

ConvexProgram ProgramBuilder::build() const {
  ConvexProgram prog;
  prog.P.resize(n_, n_);
  prog.P.setFromTriplets(p_.begin(), p_.end());
  prog.q = Vector::Zero(n_);
  for (const auto& [i, v] : q_) prog.q[i] += v;
  prog.constant = constant_;
  prog.A.resize(rows_, n_);
  prog.A.setFromTriplets(a_.begin(), a_.end());
  prog.lower = Eigen::Map<const Vector>(lower_.data(), static_cast<Eigen::Index>(lower_.size()));
  prog.upper = Eigen::Map<const Vector>(upper_.data(), static_cast<Eigen::Index>(upper_.size()));
  return prog;
}

namespace {

// Inequalities G x <= h and equalities E x = b split out of l <= Ax <= u.
struct StandardForm {
  SparseMatrix G, Gt, E, Et;
  Vector h, b;
};

StandardForm to_standard_form(const ConvexProgram& prog) {
  const SparseMatrix At = prog.A.transpose();
  std::vector<Eigen::Triplet<double>> g, e;
  std::vector<double> h, b;
  int gi = 0, ei = 0;
  for (int r = 0; r < At.outerSize(); ++r) {
    const double lo = prog.lower[r], hi = prog.upper[r];
    auto emit = [&](std::vector<Eigen::Triplet<double>>& out, int row, double sign) {
      for (SparseMatrix::InnerIterator it(At, r); it; ++it) out.emplace_back(row, static_cast<int>(it.row()), sign * it.value());
    };
    if (lo == hi) {
      emit(e, ei++, 1.0);
      b.push_back(lo);
      continue;
    }
    if (hi < kInf) {
      emit(g, gi++, 1.0);
      h.push_back(hi);
    }
    if (lo > -kInf) {
      emit(g, gi++, -1.0);
      h.push_back(-lo);
    }
  }
  StandardForm sf;
  const int n = prog.n();
  sf.G.resize(gi, n);
  sf.G.setFromTriplets(g.begin(), g.end());
  sf.E.resize(ei, n);
  sf.E.setFromTriplets(e.begin(), e.end());
  sf.Gt = sf.G.transpose();
  sf.Et = sf.E.transpose();
  sf.h = Eigen::Map<const Vector>(h.data(), gi);
  sf.b = Eigen::Map<const Vector>(b.data(), ei);
  return sf;
}

// Fill-reducing ordering that keeps the factor local. Nodes are swept in
// breadth-first order from a peripheral node and cut into consecutive
// blocks; each block is ordered by minimum degree with the nodes that touch
// later blocks moved to its end. On chain-like programs the blocks follow
// time, so the triangular solves stream through memory.
struct BlockedAmdOrdering {
  static constexpr int kBlock = 4096;

  template <typename MatrixType>
  void operator()(const MatrixType& mat, Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& perm) {
    const int n = static_cast<int>(mat.rows());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int k = 0; k < mat.outerSize(); ++k)
      for (typename MatrixType::InnerIterator it(mat, k); it; ++it) {
        const int i = static_cast<int>(it.index()), j = static_cast<int>(it.outer());
        if (i == j) continue;
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
      }
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    const std::vector<int> sweep = breadth_first(adj);
    std::vector<int> block_of(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) block_of[static_cast<std::size_t>(sweep[static_cast<std::size_t>(k)])] = k / kBlock;

    perm.resize(n);
    int out = 0;
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (int start = 0; start < n; start += kBlock) {
      const int size = std::min(kBlock, n - start);
      const int block = start / kBlock;
      for (int k = 0; k < size; ++k) local[static_cast<std::size_t>(sweep[static_cast<std::size_t>(start + k)])] = k;
      std::vector<Eigen::Triplet<double>> trip;
      for (int k = 0; k < size; ++k) {
        const int v = sweep[static_cast<std::size_t>(start + k)];
        trip.emplace_back(k, k, 1.0);
        for (int u : adj[static_cast<std::size_t>(v)])
          if (block_of[static_cast<std::size_t>(u)] == block) trip.emplace_back(local[static_cast<std::size_t>(u)], k, 1.0);
      }
      SparseMatrix sub(size, size);
      sub.setFromTriplets(trip.begin(), trip.end());
      Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> sub_perm;
      Eigen::AMDOrdering<int>()(sub, sub_perm);
      std::vector<int> tail;
      for (int k = 0; k < size; ++k) {
        const int v = sweep[static_cast<std::size_t>(start + sub_perm.indices()[k])];
        const bool boundary = std::any_of(adj[static_cast<std::size_t>(v)].begin(), adj[static_cast<std::size_t>(v)].end(),
                                          [&](int u) { return block_of[static_cast<std::size_t>(u)] > block; });
        if (boundary)
          tail.push_back(v);
        else
          perm.indices()[out++] = v;
      }
      for (int v : tail) perm.indices()[out++] = v;
    }
  }

 private:
  static std::vector<int> bfs_from(const std::vector<std::vector<int>>& adj, int root, std::vector<char>& seen) {
    std::vector<int> order{root};
    seen[static_cast<std::size_t>(root)] = 1;
    for (std::size_t head = 0; head < order.size(); ++head)
      for (int u : adj[static_cast<std::size_t>(order[head])])
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          order.push_back(u);
        }
    return order;
  }

  // Components in turn, each swept from the last node reached by a first sweep.
  static std::vector<int> breadth_first(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<char> seen(static_cast<std::size_t>(n), 0), probe(static_cast<std::size_t>(n), 0);
    std::vector<int> sweep;
    sweep.reserve(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      const std::vector<int> first = bfs_from(adj, v, probe);
      const std::vector<int> comp = bfs_from(adj, first.back(), seen);
      sweep.insert(sweep.end(), comp.begin(), comp.end());
    }
    return sweep;
  }
};

// Solves the quasi-definite system
//   [P + rI   E'    G'      ] [x]   [r1]
//   [E        -rI   0       ] [y] = [r2]
//   [G        0     -(D + rI)] [z]   [r3]
// and refines the answer against the unregularized matrix. The matrix is
// stored pre-permuted so the factorization and refinement run without
// further reordering.
class KktSolver {
 public:
  KktSolver(const SparseMatrix& P, const StandardForm& sf) {
    n_ = static_cast<int>(P.rows());
    p_ = static_cast<int>(sf.E.rows());
    m_ = static_cast<int>(sf.G.rows());
    const int size = n_ + p_ + m_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(P.nonZeros() + 2 * (sf.E.nonZeros() + sf.G.nonZeros()) + size));
    for (int k = 0; k < P.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(P, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    auto add_block = [&](const SparseMatrix& B, int row0) {
      for (int k = 0; k < B.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
          trip.emplace_back(row0 + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
          trip.emplace_back(static_cast<int>(it.col()), row0 + static_cast<int>(it.row()), it.value());
        }
    };
    add_block(sf.E, n_);
    add_block(sf.G, n_ + p_);
    for (int i = 0; i < size; ++i) trip.emplace_back(i, i, 0.0);
    SparseMatrix K(size, size);
    K.setFromTriplets(trip.begin(), trip.end());

    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> order;
    BlockedAmdOrdering()(K, order);
    pos_.resize(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) pos_[static_cast<std::size_t>(order.indices()[k])] = k;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> to_new(size);
    for (int i = 0; i < size; ++i) to_new.indices()[i] = pos_[static_cast<std::size_t>(i)];
    K_ = K.twistedBy(to_new);

    diag_.resize(static_cast<std::size_t>(size));
    base_diag_.resize(static_cast<std::size_t>(size));
    sign_ = Vector::Ones(size);
    for (int i = 0; i < size; ++i) {
      const int k = pos_[static_cast<std::size_t>(i)];
      diag_[static_cast<std::size_t>(i)] = &K_.coeffRef(k, k);
      base_diag_[static_cast<std::size_t>(i)] = *diag_[static_cast<std::size_t>(i)];
      if (i >= n_) sign_[k] = -1.0;
    }
    ldlt_.analyzePattern(K_);
  }

  bool factor(const Vector& d, double reg) {
    reg_ = reg;
    for (int i = 0; i < n_; ++i) *diag_[static_cast<std::size_t>(i)] = base_diag_[static_cast<std::size_t>(i)] + reg;
    for (int i = 0; i < p_; ++i) *diag_[static_cast<std::size_t>(n_ + i)] = -reg;
    for (int i = 0; i < m_; ++i) *diag_[static_cast<std::size_t>(n_ + p_ + i)] = -(d[i] + reg);
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  void solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& x, Vector& y, Vector& z) const {
    const int size = n_ + p_ + m_;
    Vector rhs(size);
    for (int i = 0; i < n_; ++i) rhs[pos_[static_cast<std::size_t>(i)]] = r1[i];
    for (int i = 0; i < p_; ++i) rhs[pos_[static_cast<std::size_t>(n_ + i)]] = r2[i];
    for (int i = 0; i < m_; ++i) rhs[pos_[static_cast<std::size_t>(n_ + p_ + i)]] = r3[i];
    Vector sol = ldlt_.solve(rhs);
    const double tol = 1e-13 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    for (int pass = 0; pass < 5; ++pass) {
      // K_ carries the regularization; the refinement target does not.
      const Vector res = rhs - K_ * sol + reg_ * sign_.cwiseProduct(sol);
      if (res.lpNorm<Eigen::Infinity>() <= tol) break;
      sol += ldlt_.solve(res);
    }
    x.resize(n_);
    y.resize(p_);
    z.resize(m_);
    for (int i = 0; i < n_; ++i) x[i] = sol[pos_[static_cast<std::size_t>(i)]];
    for (int i = 0; i < p_; ++i) y[i] = sol[pos_[static_cast<std::size_t>(n_ + i)]];
    for (int i = 0; i < m_; ++i) z[i] = sol[pos_[static_cast<std::size_t>(n_ + p_ + i)]];
  }

 private:
  int n_ = 0, p_ = 0, m_ = 0;
  double reg_ = 0;
  std::vector<int> pos_;  // original index -> factor index
  SparseMatrix K_;
  Vector sign_;
  std::vector<double*> diag_;
  std::vector<double> base_diag_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Upper, Eigen::NaturalOrdering<int>> ldlt_;
};

// The gap bounds (x - x*)'P(x - x*), so it is held well below eps_abs.
constexpr double kGapFactor = 1e-4;
constexpr double kStepFraction = 0.99;

double max_step(const Vector& v, const Vector& dv) {
  double a = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

double norm_inf(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

Solution solve(const ConvexProgram& prog, const SolveOptions& options) {
  prog.validate();
  require(options.eps_abs > 0 && options.max_iters > 0, "solver tolerances must be positive");
  const int n = prog.n();
  const StandardForm sf = to_standard_form(prog);
  const int m = static_cast<int>(sf.G.rows());

  // Normalize the objective so termination does not depend on its scale.
  double scale = norm_inf(prog.q);
  for (int k = 0; k < prog.P.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(prog.P, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  scale = scale > 0 ? 1.0 / scale : 1.0;
  const SparseMatrix P = prog.P * scale;
  const Vector q = prog.q * scale;

  Solution sol;
  KktSolver kkt(P, sf);
  double reg = 1e-9;
  auto factor = [&](const Vector& w) {
    for (int attempt = 0; attempt < 8; ++attempt, reg *= 100)
      if (kkt.factor(w, reg)) return;
    fail(ErrorKind::Solver, "KKT factorization failed");
  };

  Vector x(n), y(sf.E.rows()), s(m), z(m);
  factor(Vector::Ones(m));
  kkt.solve(-q, sf.b, sf.h, x, y, z);
  if (options.warm_start) {
    require(options.warm_start->size() == n, "warm start has the wrong dimension");
    x = *options.warm_start;
  }
  if (m > 0) {
    s = sf.h - sf.G * x;
    z = -s;
    const double ap = -s.minCoeff();
    if (ap >= 0) s.array() += 1.0 + ap;
    const double ad = -z.minCoeff();
    if (ad >= 0) z.array() += 1.0 + ad;
  }

  Vector dx(n), dy(y.size()), ds(m), dz(m);
  // Newton step for rd, re, rp and the complementarity target s o z = rc.
  auto direction = [&](const Vector& rd, const Vector& rp, const Vector& re, const Vector& rc) {
    kkt.solve(-rd, -re, (-rp.array() + rc.array() / z.array()).matrix(), dx, dy, dz);
    ds = ((-rc.array() - s.array() * dz.array()) / z.array()).matrix();
  };

  // Lowest-objective iterate that met the primal tolerance, returned on max-iters.
  std::optional<Vector> best_x;
  double best_f = std::numeric_limits<double>::infinity(), best_primal = 0, best_dual = 0;
  int stalled = 0;
  for (int iter = 0;; ++iter) {
    const Vector rd = P * x + q + sf.Gt * z + sf.Et * y;
    const Vector rp = sf.G * x + s - sf.h;
    const Vector re = sf.E * x - sf.b;
    const double gap = m > 0 ? s.dot(z) : 0.0;
    const double mu = m > 0 ? gap / m : 0.0;
    const double fx = 0.5 * x.dot(P * x) + q.dot(x);

    sol.iterations = iter;
    sol.primal_residual = std::max(norm_inf(rp), norm_inf(re));
    sol.dual_residual = norm_inf(rd);
    sol.gap = gap;
    if (options.keep_log)
      sol.log.push_back({iter, sol.primal_residual, sol.dual_residual, gap, iter == 0 ? 0.0 : sol.log.back().step});

    if (sol.primal_residual <= options.eps_abs && fx < best_f) {
      best_f = fx;
      best_x = x;
      best_primal = sol.primal_residual;
      best_dual = sol.dual_residual;
    }
    if (!std::isfinite(sol.primal_residual + sol.dual_residual + gap)) {
      sol.status = Status::Infeasible;
      break;
    }
    if (sol.primal_residual <= options.eps_abs && sol.dual_residual <= options.eps_abs &&
        gap <= kGapFactor * options.eps_abs * std::max(1.0, std::abs(fx))) {
      sol.status = Status::Solved;
      break;
    }
    if (m > 0 && norm_inf(z) > 1e12 && sol.primal_residual > options.eps_abs) {
      sol.status = Status::Infeasible;
      break;
    }
    if (iter >= options.max_iters) {
      sol.status = Status::MaxIters;
      break;
    }

    if (m == 0) {
      factor(Vector::Zero(0));
      direction(rd, rp, re, Vector::Zero(0));
      x += dx;
      y += dy;
      continue;
    }

    factor((s.array() / z.array()).matrix());
    // Predictor.
    direction(rd, rp, re, (s.array() * z.array()).matrix());
    const double a_aff = std::min(1.0, std::min(max_step(s, ds), max_step(z, dz)));
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / m;
    const double sigma = std::pow(mu_aff / mu, 3);
    // Corrector.
    const Vector rc = (s.array() * z.array() + ds.array() * dz.array() - sigma * mu).matrix();
    direction(rd, rp, re, rc);
    double a = std::min(1.0, kStepFraction * std::min(max_step(s, ds), max_step(z, dz)));
    if (a < 0.5 * a_aff) {
      // Second-order term blocked the step: retry with centering only.
      direction(rd, rp, re, (s.array() * z.array() - sigma * mu).matrix());
      a = std::min(1.0, kStepFraction * std::min(max_step(s, ds), max_step(z, dz)));
    }
    x += a * dx;
    y += a * dy;
    s += a * ds;
    z += a * dz;
    if (options.keep_log) sol.log.back().step = a;

    stalled = a < 1e-10 ? stalled + 1 : 0;
    if (stalled >= 10) {
      sol.status = sol.primal_residual > options.eps_abs ? Status::Infeasible : Status::MaxIters;
      break;
    }
  }

  if (sol.status == Status::MaxIters && best_x) {
    sol.x = std::move(*best_x);
    sol.primal_residual = best_primal;
    sol.dual_residual = best_dual;
  } else {
    sol.x = std::move(x);
  }
  sol.objective_value = prog.objective(sol.x);
  return sol;
}

void write_iteration_log(std::ostream& out, const Solution& sol) {
  out << "iteration,primal_residual,dual_residual,gap,step\n";
  for (const IterationRecord& r : sol.log)
    out << r.iteration << ',' << exact(r.primal_residual) << ',' << exact(r.dual_residual) << ',' << exact(r.gap)
        << ',' << exact(r.step) << '\n';
}

}  // namespace retarget::qp
