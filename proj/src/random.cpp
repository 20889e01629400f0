#include "pfol/random.hpp"

#include <cmath>
#include <random>

#include "pfol/errors.hpp"

namespace pfol {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::result_type Rng::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

Rng substream(std::uint64_t seed, StreamDomain domain, std::uint64_t t, std::uint64_t j) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(domain) * 0xbb67ae8584caa73bULL));
  h = mix64(h ^ (t * 0x3c6ef372fe94f82bULL));
  h = mix64(h ^ (j * 0xa54ff53a5f1d36f1ULL));
  return Rng(h);
}

namespace {

Eigen::VectorXd gaussian_direction(Rng& rng, int dim) {
  if (dim < 1) throw InputError("sampler dimension must be >= 1");
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

}  // namespace

Eigen::VectorXd sample_unit_ball(Rng& rng, int dim) {
  Eigen::VectorXd v = gaussian_direction(rng, dim);
  return v * std::pow(rng.uniform(), 1.0 / dim);
}

Eigen::VectorXd sample_unit_sphere(Rng& rng, int dim) { return gaussian_direction(rng, dim); }

}  // namespace pfol
