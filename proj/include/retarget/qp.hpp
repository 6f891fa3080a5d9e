#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace retarget::qp {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// minimize 0.5 x'Px + q'x + constant  subject to  lower <= Ax <= upper.
// P is stored with both triangles. Infinite bounds mark one-sided rows;
// lower == upper makes an equality row.
struct ConvexProgram {
  SparseMatrix P;
  Vector q;
  double constant = 0.0;
  SparseMatrix A;
  Vector lower;
  Vector upper;

  int n() const { return static_cast<int>(q.size()); }
  int m() const { return static_cast<int>(A.rows()); }

  void validate() const;
  double objective(const Vector& x) const;
  // Largest bound violation of Ax, zero when feasible.
  double max_violation(const Vector& x) const;
};

// Incremental assembly with named variable blocks left to the caller.
class ProgramBuilder {
 public:
  int add_variables(int count);
  int n() const { return n_; }

  // Adds value to P(i, j) and P(j, i) (once when i == j): the objective gains
  // value * x_i * x_j for i != j, 0.5 * value * x_i^2 for i == j.
  void add_quadratic(int i, int j, double value);
  void add_linear(int i, double value);
  void add_constant(double value) { constant_ += value; }

  struct Term {
    int var;
    double coef;
  };
  // Returns the row index.
  int add_constraint(std::initializer_list<Term> terms, double lower, double upper);
  int add_constraint(const std::vector<Term>& terms, double lower, double upper);

  ConvexProgram build() const;

 private:
  int n_ = 0;
  int rows_ = 0;
  std::vector<Eigen::Triplet<double>> p_;
  std::vector<Eigen::Triplet<double>> a_;
  std::vector<std::pair<int, double>> q_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  double constant_ = 0.0;
};

enum class Status { Solved, MaxIters, Infeasible };

const char* to_string(Status s) noexcept;

struct IterationRecord {
  int iteration;
  double primal_residual;
  double dual_residual;
  double gap;
  double step;
};

struct Solution {
  Vector x;
  double objective_value = 0.0;
  double primal_residual = 0.0;  // max |Gx + s - h|, |Ex - b| in problem units
  double dual_residual = 0.0;    // max |Px + q + A'y| after objective normalization
  double gap = 0.0;
  int iterations = 0;
  Status status = Status::MaxIters;
  std::vector<IterationRecord> log;
};

struct SolveOptions {
  double eps_abs = 1e-6;
  int max_iters = 20000;
  std::optional<Vector> warm_start;
  bool keep_log = false;
};

// Primal-dual interior point (Mehrotra predictor-corrector). Each step
// factors P + G'WG with a sparse LDL'; for banded programs that is O(n).
// Deterministic for identical inputs.
Solution solve(const ConvexProgram& prog, const SolveOptions& options = {});

void write_iteration_log(std::ostream& out, const Solution& sol);

}  // namespace retarget::qp
