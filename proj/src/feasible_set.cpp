#include "pfol/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "pfol/errors.hpp"

namespace pfol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_vector(const Eigen::VectorXd& v, int dim, const char* what) {
  if (v.size() != dim) {
    throw InputError(std::string(what) + ": dimension " + std::to_string(v.size()) +
                     " does not match set dimension " + std::to_string(dim));
  }
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

void check_nonnegative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InputError(std::string(what) + " must be finite and nonnegative");
  }
}

void check_dim(int dim) {
  if (dim < 1) throw InputError("set dimension must be >= 1");
}

// Sort-threshold projection onto {w >= 0, sum(w) = scale}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double scale) {
  const auto n = v.size();
  if (scale == 0.0) return Eigen::VectorXd::Zero(n);
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - scale) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Eigen::VectorXd unit(int dim, Eigen::Index i, double value) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[i] = value;
  return e;
}

}  // namespace

FeasibleSet::FeasibleSet(SetShape shape, int dim) : shape_(std::move(shape)), dim_(dim) {
  norm_bound_ = std::visit(
      Overloaded{
          [](const Ball& b) { return b.radius; },
          [](const Box& b) {
            return b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).norm();
          },
          [](const Simplex& s) { return s.scale; },
          [](const L1Ball& b) { return b.radius; },
          [](const Polytope& p) {
            double best = 0.0;
            for (const auto& v : p.vertices) best = std::max(best, v.norm());
            return best;
          },
      },
      shape_);
}

FeasibleSet FeasibleSet::ball(int dim, double radius) {
  check_dim(dim);
  check_nonnegative(radius, "ball radius");
  return FeasibleSet(Ball{radius}, dim);
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  const int dim = static_cast<int>(lower.size());
  check_dim(dim);
  check_vector(upper, dim, "box upper");
  check_vector(lower, dim, "box lower");
  if ((lower.array() > upper.array()).any()) throw InputError("box requires lower <= upper");
  return FeasibleSet(Box{std::move(lower), std::move(upper)}, dim);
}

FeasibleSet FeasibleSet::simplex(int dim, double scale) {
  check_dim(dim);
  check_nonnegative(scale, "simplex scale");
  return FeasibleSet(Simplex{scale}, dim);
}

FeasibleSet FeasibleSet::l1_ball(int dim, double radius) {
  check_dim(dim);
  check_nonnegative(radius, "l1 ball radius");
  return FeasibleSet(L1Ball{radius}, dim);
}

FeasibleSet FeasibleSet::polytope(std::vector<Eigen::VectorXd> vertices) {
  if (vertices.empty()) throw InputError("polytope needs at least one vertex");
  const int dim = static_cast<int>(vertices.front().size());
  check_dim(dim);
  for (const auto& v : vertices) check_vector(v, dim, "polytope vertex");
  return FeasibleSet(Polytope{std::move(vertices)}, dim);
}

std::string_view FeasibleSet::kind_name() const {
  return std::visit(Overloaded{
                        [](const Ball&) { return std::string_view("ball"); },
                        [](const Box&) { return std::string_view("box"); },
                        [](const Simplex&) { return std::string_view("simplex"); },
                        [](const L1Ball&) { return std::string_view("l1_ball"); },
                        [](const Polytope&) { return std::string_view("polytope"); },
                    },
                    shape_);
}

bool FeasibleSet::supports_projection() const {
  return !std::holds_alternative<Polytope>(shape_);
}

double FeasibleSet::max_distance_from(const Eigen::VectorXd& p) const {
  check_vector(p, dim_, "max_distance_from");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return p.norm() + b.radius; },
          [&](const Box& b) {
            return (b.lower - p).cwiseAbs().cwiseMax((b.upper - p).cwiseAbs()).norm();
          },
          [&](const Simplex& s) {
            double best = 0.0;
            for (int i = 0; i < dim_; ++i) best = std::max(best, (unit(dim_, i, s.scale) - p).norm());
            return best;
          },
          [&](const L1Ball& b) {
            double best = 0.0;
            for (int i = 0; i < dim_; ++i) {
              best = std::max(best, (unit(dim_, i, b.radius) - p).norm());
              best = std::max(best, (unit(dim_, i, -b.radius) - p).norm());
            }
            return best;
          },
          [&](const Polytope& poly) {
            double best = 0.0;
            for (const auto& v : poly.vertices) best = std::max(best, (v - p).norm());
            return best;
          },
      },
      shape_);
}

bool FeasibleSet::contains(const Eigen::VectorXd& x, double tol) const {
  check_vector(x, dim_, "contains");
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return x.norm() <= b.radius + tol; },
          [&](const Box& b) {
            return ((x.array() >= b.lower.array() - tol) && (x.array() <= b.upper.array() + tol))
                .all();
          },
          [&](const Simplex& s) {
            return (x.array() >= -tol).all() && std::abs(x.sum() - s.scale) <= tol;
          },
          [&](const L1Ball& b) { return x.lpNorm<1>() <= b.radius + tol; },
          [&](const Polytope&) -> bool {
            throw CapabilityError("membership test is not available for polytopes");
          },
      },
      shape_);
}

Eigen::VectorXd linear_argmax(const FeasibleSet& set, const Eigen::VectorXd& y) {
  const int d = set.dim();
  check_vector(y, d, "linear_argmax");
  return std::visit(
      Overloaded{
          [&](const Ball& b) -> Eigen::VectorXd {
            const double norm = y.norm();
            if (norm == 0.0) return unit(d, 0, b.radius);
            return y * (b.radius / norm);
          },
          [&](const Box& b) -> Eigen::VectorXd {
            return (y.array() > 0.0).select(b.upper.array(), b.lower.array()).matrix();
          },
          [&](const Simplex& s) -> Eigen::VectorXd {
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < d; ++i) {
              if (y[i] > y[best]) best = i;
            }
            return unit(d, best, s.scale);
          },
          [&](const L1Ball& b) -> Eigen::VectorXd {
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < d; ++i) {
              if (std::abs(y[i]) > std::abs(y[best])) best = i;
            }
            return unit(d, best, y[best] < 0.0 ? -b.radius : b.radius);
          },
          [&](const Polytope& p) -> Eigen::VectorXd { return brute_force_argmax(p.vertices, y); },
      },
      set.shape());
}

double linear_max(const FeasibleSet& set, const Eigen::VectorXd& y) {
  return y.dot(linear_argmax(set, y));
}

Eigen::VectorXd euclidean_project(const FeasibleSet& set, const Eigen::VectorXd& x) {
  check_vector(x, set.dim(), "euclidean_project");
  return std::visit(
      Overloaded{
          [&](const Ball& b) -> Eigen::VectorXd {
            const double norm = x.norm();
            if (norm <= b.radius) return x;
            return x * (b.radius / norm);
          },
          [&](const Box& b) -> Eigen::VectorXd { return x.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Simplex& s) -> Eigen::VectorXd { return project_simplex(x, s.scale); },
          [&](const L1Ball& b) -> Eigen::VectorXd {
            if (x.lpNorm<1>() <= b.radius) return x;
            const Eigen::VectorXd magnitude = project_simplex(x.cwiseAbs(), b.radius);
            return (x.array() < 0.0).select(-magnitude.array(), magnitude.array()).matrix();
          },
          [&](const Polytope&) -> Eigen::VectorXd {
            throw CapabilityError("euclidean projection is not available for polytopes");
          },
      },
      set.shape());
}

Eigen::VectorXd brute_force_argmax(std::span<const Eigen::VectorXd> vertices,
                                   const Eigen::VectorXd& y) {
  if (vertices.empty()) throw InputError("brute_force_argmax: empty vertex list");
  std::size_t best = 0;
  double best_value = y.dot(vertices[0]);
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const double value = y.dot(vertices[i]);
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  return vertices[best];
}

Eigen::VectorXd sample_feasible(const FeasibleSet& set, Rng& rng) {
  constexpr int kPoints = 4;
  const int d = set.dim();
  Eigen::VectorXd point = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    // Exponential weights give a uniform Dirichlet combination.
    const double w = -std::log1p(-rng.uniform());
    point += w * linear_argmax(set, sample_unit_sphere(rng, d));
    total += w;
  }
  if (total <= 0.0) return linear_argmax(set, sample_unit_sphere(rng, d));
  return point / total;
}

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw InputError(std::string("set field '") + field + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

nlohmann::json to_json(const FeasibleSet& set) {
  nlohmann::json j{{"kind", set.kind_name()}, {"dim", set.dim()}};
  std::visit(Overloaded{
                 [&](const Ball& b) { j["radius"] = b.radius; },
                 [&](const Box& b) {
                   j["lower"] = vector_to_json(b.lower);
                   j["upper"] = vector_to_json(b.upper);
                 },
                 [&](const Simplex& s) { j["scale"] = s.scale; },
                 [&](const L1Ball& b) { j["radius"] = b.radius; },
                 [&](const Polytope& p) {
                   auto& vs = j["vertices"] = nlohmann::json::array();
                   for (const auto& v : p.vertices) vs.push_back(vector_to_json(v));
                 },
             },
             set.shape());
  return j;
}

FeasibleSet feasible_set_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    FeasibleSet set = [&] {
      if (kind == "ball") return FeasibleSet::ball(j.at("dim").get<int>(), j.value("radius", 1.0));
      if (kind == "simplex") {
        return FeasibleSet::simplex(j.at("dim").get<int>(), j.value("scale", 1.0));
      }
      if (kind == "l1_ball") {
        return FeasibleSet::l1_ball(j.at("dim").get<int>(), j.value("radius", 1.0));
      }
      if (kind == "box") {
        return FeasibleSet::box(vector_from_json(j.at("lower"), "lower"),
                                vector_from_json(j.at("upper"), "upper"));
      }
      if (kind == "polytope") {
        std::vector<Eigen::VectorXd> vertices;
        for (const auto& v : j.at("vertices")) vertices.push_back(vector_from_json(v, "vertices"));
        return FeasibleSet::polytope(std::move(vertices));
      }
      throw InputError("unknown set kind '" + kind + "'");
    }();
    if (j.contains("dim") && j.at("dim").get<int>() != set.dim()) {
      throw InputError("set 'dim' disagrees with the data");
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad set descriptor: ") + e.what());
  }
}

}  // namespace pfol
