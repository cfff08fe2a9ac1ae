// ---------------------------------------------------------------------------
// generators.cpp
// ---------------------------------------------------------------------------

#include "rhkit/generators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "rhkit/matfun.hpp"

namespace rhkit {

namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = Complex(d(rng), d(rng)) / std::sqrt(2.0);
  return m;
}

// Random square matrix kept away from singularity (condition estimate via
// extreme singular values).
Matrix well_conditioned(Index n, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix q = gaussian(n, n, rng);
    if (n == 0) return q;
    Eigen::JacobiSVD<Matrix> svd(q);
    double smin = svd.singularValues()(n - 1);
    double smax = svd.singularValues()(0);
    if (smin > 0.02 * smax) return q;
  }
  throw std::runtime_error("generators: failed to draw an invertible matrix");
}

// Model whose r has the prescribed eigenvalues (plus |n-m| zeros): embed a
// square matrix with that spectrum through a full-rank linkage, so both
// products are exact and the instance is valid by construction.
LocalModel model_with_spectrum(Index n, Index m, const Vector& eigenvalues,
                               std::mt19937_64& rng) {
  const Index d = std::min(n, m);
  Matrix q = well_conditioned(d, rng);
  Matrix lambda = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) lambda(i, i) = eigenvalues(i);
  Matrix core = q * lambda * q.fullPivLu().inverse();

  LocalModel model;
  if (m <= n) {
    // t full row rank, s = t^+ core; then t s = core exactly.
    Matrix t = gaussian(m, n, rng);
    Matrix right_inv =
        t.adjoint() * (t * t.adjoint()).fullPivLu().inverse();  // t ri = id
    model.t = t;
    model.s = right_inv * core;
  } else {
    Matrix s = gaussian(n, m, rng);
    Matrix right_inv = s.adjoint() * (s * s.adjoint()).fullPivLu().inverse();
    model.s = s;
    model.t = right_inv * core;
  }
  model.r = model.s * model.t;
  model.theta_f = model.t * model.s;
  return model;
}

}  // namespace

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gaussian(rows, cols, rng);
}

LocalModel random_model(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LocalModel model;
  model.s = gaussian(n, m, rng);
  model.t = gaussian(m, n, rng);
  double d = std::sqrt(std::max(1.0, norm1(model.s * model.t)));
  model.s /= d;
  model.t /= d;
  model.r = model.s * model.t;
  model.theta_f = model.t * model.s;
  return model;
}

LocalModel random_strip_model(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index d = std::min(n, m);
  std::uniform_real_distribution<double> re(0.05, 0.8), im(-0.4, 0.4);
  Vector eigenvalues(d);
  for (Index i = 0; i < d; ++i) eigenvalues(i) = Complex(re(rng), im(rng));
  return model_with_spectrum(n, m, eigenvalues, rng);
}

LocalModel random_resonant_model(Index n, Index m, std::uint64_t seed,
                                 int max_gap) {
  const Index d = std::min(n, m);
  if (d < 2)
    throw std::invalid_argument(
        "random_resonant_model: need min(n, m) >= 2 for a resonant pair");
  if (max_gap < 1)
    throw std::invalid_argument("random_resonant_model: max_gap must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(-1.2, 1.2), extra(-2.0, 2.0);
  std::uniform_int_distribution<int> gap(1, max_gap);

  std::vector<double> values;
  values.push_back(base(rng));
  values.push_back(values[0] + double(gap(rng)));
  while (Index(values.size()) < d) {
    double candidate = extra(rng);
    bool separated = true;
    for (double v : values)
      if (std::abs(candidate - v) < 0.15) separated = false;
    if (separated) values.push_back(candidate);
  }
  Vector eigenvalues(d);
  for (Index i = 0; i < d; ++i) eigenvalues(i) = Complex(values[size_t(i)], 0);
  return model_with_spectrum(n, m, eigenvalues, rng);
}

FuchsianSystem random_fuchsian(Index k, Index n, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("random_fuchsian: need k >= 2");
  for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * attempt);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    FuchsianSystem sys;
    Matrix sum = Matrix::Zero(n, n);
    for (Index a = 0; a + 1 < k; ++a) {
      Matrix residue = 0.15 * gaussian(n, n, rng);
      sum += residue;
      sys.residues.push_back(residue);
    }
    sys.residues.push_back(-sum);
    for (Index a = 0; a < k; ++a)
      sys.punctures.push_back(Complex(double(2 * a) - double(k - 1) + jitter(rng),
                                      jitter(rng)));
    sys.base = Complex(0.0, -3.0 - double(k));

    bool clean = true;
    for (const Matrix& a : sys.residues)
      if (!resonance_report(a, default_cluster_tol(a)).good()) clean = false;
    if (clean) return sys;
  }
  throw std::runtime_error("random_fuchsian: could not avoid resonance");
}

Flag coordinate_flag(Index dim, const std::vector<Index>& step_dims) {
  if (step_dims.empty() || step_dims.back() != dim)
    throw std::invalid_argument(
        "coordinate_flag: last step dimension must equal dim");
  Flag f;
  f.dim = dim;
  Index prev = -1;
  for (Index sd : step_dims) {
    if (sd < 0 || sd <= prev)
      throw std::invalid_argument(
          "coordinate_flag: step dimensions must strictly increase");
    prev = sd;
    f.steps.push_back(Matrix::Identity(dim, dim).leftCols(sd));
  }
  return f;
}

StabilityBundle random_stability_bundle(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  StabilityBundle bundle;
  bundle.model = random_model(n, m, seed);
  auto random_steps = [&](Index dim) {
    std::vector<Index> dims;
    std::uniform_int_distribution<int> coin(0, 1);
    for (Index d = 1; d < dim; ++d)
      if (coin(rng)) dims.push_back(d);
    dims.push_back(dim);
    return dims;
  };
  bundle.flag_e = coordinate_flag(n, random_steps(n));
  bundle.flag_f = coordinate_flag(m, random_steps(m));
  return bundle;
}

}  // namespace rhkit
