#pragma once

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pfol/random.hpp"

namespace pfol {

// Set shapes. All sets are assumed to be centred so that ||x|| <= D holds for
// every member; translating a set before use is the caller's responsibility.
struct Ball {
  double radius;
};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// {x >= 0, sum(x) = scale}
struct Simplex {
  double scale;
};

struct L1Ball {
  double radius;
};

/// Convex hull of a finite vertex list.
struct Polytope {
  std::vector<Eigen::VectorXd> vertices;
};

using SetShape = std::variant<Ball, Box, Simplex, L1Ball, Polytope>;

/// Convex compact action set together with its exact norm bound D.
class FeasibleSet {
 public:
  static FeasibleSet ball(int dim, double radius);
  static FeasibleSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static FeasibleSet simplex(int dim, double scale);
  static FeasibleSet l1_ball(int dim, double radius);
  static FeasibleSet polytope(std::vector<Eigen::VectorXd> vertices);

  int dim() const { return dim_; }
  /// max ||x|| over the set (exact).
  double norm_bound() const { return norm_bound_; }
  const SetShape& shape() const { return shape_; }
  std::string_view kind_name() const;

  bool supports_projection() const;

  /// sup over x in the set of ||x - p||, attained at an extreme point.
  double max_distance_from(const Eigen::VectorXd& p) const;

  /// Membership up to `tol`. Polytopes are not supported (needs an LP).
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;

 private:
  FeasibleSet(SetShape shape, int dim);

  SetShape shape_;
  int dim_;
  double norm_bound_;
};

/// Linear optimization oracle: a maximizer of <y, x> over the set. Ties go to
/// the lowest index; y = 0 returns the lowest-index maximizer of the zero
/// objective (radius * e_1 for balls).
Eigen::VectorXd linear_argmax(const FeasibleSet& set, const Eigen::VectorXd& y);

/// Value oracle, computed as <y, linear_argmax(set, y)>.
double linear_max(const FeasibleSet& set, const Eigen::VectorXd& y);

/// Euclidean projection. Throws CapabilityError for polytopes.
Eigen::VectorXd euclidean_project(const FeasibleSet& set, const Eigen::VectorXd& x);

/// Reference scan over an explicit vertex list, lowest index wins ties.
Eigen::VectorXd brute_force_argmax(std::span<const Eigen::VectorXd> vertices,
                                   const Eigen::VectorXd& y);

/// Random member of the set: a random convex combination of oracle answers at
/// random directions. Uses only the linear oracle.
Eigen::VectorXd sample_feasible(const FeasibleSet& set, Rng& rng);

nlohmann::json to_json(const FeasibleSet& set);
FeasibleSet feasible_set_from_json(const nlohmann::json& j);

}  // namespace pfol
