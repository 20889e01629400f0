#include "pfol/adversary.hpp"

#include <cmath>
#include <string>

#include "pfol/errors.hpp"
#include "pfol/random.hpp"

namespace pfol {

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::linear_stochastic:
      return "linear_stochastic";
    case AdversaryKind::quadratic_stochastic:
      return "quadratic_stochastic";
    case AdversaryKind::quadratic_adaptive:
      return "quadratic_adaptive";
    case AdversaryKind::linear_adaptive:
      return "linear_adaptive";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(std::string_view name) {
  for (auto kind : {AdversaryKind::linear_stochastic, AdversaryKind::quadratic_stochastic,
                    AdversaryKind::quadratic_adaptive, AdversaryKind::linear_adaptive}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown adversary kind '" + std::string(name) + "'");
}

nlohmann::json to_json(const AdversarySpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)},
                   {"horizon", spec.horizon},
                   {"seed", spec.seed},
                   {"radius", spec.radius},
                   {"noise", spec.noise}};
  if (spec.direction.size() > 0) {
    j["direction"] =
        std::vector<double>(spec.direction.data(), spec.direction.data() + spec.direction.size());
  }
  return j;
}

AdversarySpec adversary_spec_from_json(const nlohmann::json& j) {
  try {
    AdversarySpec spec;
    spec.kind = adversary_kind_from_string(j.at("kind").get<std::string>());
    spec.horizon = j.value("horizon", 1);
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.radius = j.value("radius", 1.0);
    spec.noise = j.value("noise", 0.0);
    if (j.contains("direction")) {
      const auto values = j.at("direction").get<std::vector<double>>();
      spec.direction = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size()));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad adversary spec: ") + e.what());
  }
}

Adversary::Adversary(AdversarySpec spec, const FeasibleSet& set)
    : spec_(std::move(spec)), dim_(set.dim()) {
  if (spec_.horizon < 1) throw ConfigError("adversary horizon must be >= 1");
  if (!(spec_.radius >= 0.0) || !(spec_.noise >= 0.0)) {
    throw ConfigError("adversary radius and noise must be nonnegative");
  }
  if (spec_.direction.size() == 0) spec_.direction = Eigen::VectorXd::Unit(dim_, 0);
  if (spec_.direction.size() != dim_) throw ConfigError("adversary direction has wrong dimension");

  const double D = set.norm_bound();
  switch (spec_.kind) {
    case AdversaryKind::linear_stochastic:
      grad_bound_ = spec_.direction.norm() + spec_.noise;
      break;
    case AdversaryKind::linear_adaptive:
      grad_bound_ = spec_.radius;
      break;
    case AdversaryKind::quadratic_stochastic:
    case AdversaryKind::quadratic_adaptive:
      // sup ||x - c|| over x in K and ||c|| <= radius.
      grad_bound_ = D + spec_.radius;
      break;
  }
}

double Adversary::smoothness() const {
  return spec_.kind == AdversaryKind::quadratic_stochastic ||
                 spec_.kind == AdversaryKind::quadratic_adaptive
             ? 1.0
             : 0.0;
}

const Eigen::VectorXd& Adversary::history_sum(std::span<const Eigen::VectorXd> history) const {
  const bool extends = summed_ > 0 && summed_ <= history.size() &&
                       history[summed_ - 1].size() == last_seen_.size() &&
                       history[summed_ - 1] == last_seen_;
  if (!extends) {
    sum_ = Eigen::VectorXd::Zero(dim_);
    summed_ = 0;
  }
  for (; summed_ < history.size(); ++summed_) {
    const auto& x = history[summed_];
    if (x.size() != dim_) throw ProtocolError("history action has wrong dimension");
    sum_ += x;
  }
  if (summed_ > 0) last_seen_ = history[summed_ - 1];
  return sum_;
}

LossFunction Adversary::next_loss(std::span<const Eigen::VectorXd> history) const {
  if (history.size() >= static_cast<std::size_t>(spec_.horizon)) {
    throw ProtocolError("adversary asked for round " + std::to_string(history.size() + 1) +
                        " beyond horizon " + std::to_string(spec_.horizon));
  }
  const auto t = static_cast<std::uint64_t>(history.size() + 1);
  Rng rng = substream(spec_.seed, StreamDomain::adversary, t);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_);
  if (spec_.kind == AdversaryKind::quadratic_adaptive ||
      spec_.kind == AdversaryKind::linear_adaptive) {
    mean = history_sum(history);
    if (!history.empty()) mean /= static_cast<double>(history.size());
  }

  switch (spec_.kind) {
    case AdversaryKind::linear_stochastic: {
      Eigen::VectorXd g = spec_.direction + spec_.noise * sample_unit_ball(rng, dim_);
      return LossFunction::linear(std::move(g), grad_bound_);
    }
    case AdversaryKind::quadratic_stochastic:
      return LossFunction::squared_distance(spec_.radius * sample_unit_ball(rng, dim_),
                                            grad_bound_);
    case AdversaryKind::quadratic_adaptive: {
      Eigen::VectorXd sign(dim_);
      for (int i = 0; i < dim_; ++i) {
        if (mean[i] > 0.0) {
          sign[i] = 1.0;
        } else if (mean[i] < 0.0) {
          sign[i] = -1.0;
        } else {
          sign[i] = (rng() & 1U) ? 1.0 : -1.0;
        }
      }
      return LossFunction::squared_distance(-spec_.radius / std::sqrt(dim_) * sign, grad_bound_);
    }
    case AdversaryKind::linear_adaptive: {
      const double norm = mean.norm();
      Eigen::VectorXd direction =
          norm > 0.0 ? Eigen::VectorXd(mean / norm) : sample_unit_sphere(rng, dim_);
      return LossFunction::linear(spec_.radius * direction, grad_bound_);
    }
  }
  throw ConfigError("unhandled adversary kind");
}

}  // namespace pfol
