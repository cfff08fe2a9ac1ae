// ---------------------------------------------------------------------------
// finite_description.cpp
//
// Finite descriptions on punctured surfaces: validation, base change,
// generated subobjects, composition series, isomorphism and S-equivalence,
// degenerations toward an associated graded.  The rank-sensitive algorithms
// are written once, templated over two scalar engines: exact Gaussian
// rationals and floating point with tolerances.
// ---------------------------------------------------------------------------

#include "rhkit/finite_description.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "exactmat.hpp"
#include "rhkit/matfun.hpp"

namespace rhkit {

namespace {

std::string dim_str(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

// Structural (shape / labeling) problems; residual-level checks live in
// validate_fd.
std::vector<std::string> shape_errors(const FiniteDescription& fd) {
  std::vector<std::string> errors;
  if (fd.genus < 0) errors.push_back("genus must be non-negative");
  const Index k = Index(fd.punctures.size());
  const std::vector<std::string> labels =
      surface_generator_labels(std::max<Index>(fd.genus, 0), k);
  for (const std::string& label : labels)
    if (!fd.rho.count(label))
      errors.push_back("missing generator rho(" + label + ")");
  for (const auto& [label, mat] : fd.rho)
    if (std::find(labels.begin(), labels.end(), label) == labels.end())
      errors.push_back("unexpected generator rho(" + label + ")");
  if (!errors.empty()) return errors;

  const Index n = fd.dim();
  for (const std::string& label : labels) {
    const Matrix& m = fd.rho.at(label);
    if (m.rows() != n || m.cols() != n)
      errors.push_back("rho(" + label + ") is " + dim_str(m.rows(), m.cols()) +
                       ", expected " + dim_str(n, n));
  }
  for (Index a = 0; a < k; ++a) {
    const Puncture& p = fd.punctures[size_t(a)];
    const Index m = p.tau_f.rows();
    std::ostringstream who;
    who << "puncture " << (a + 1);
    if (p.tau_f.cols() != m)
      errors.push_back(who.str() + ": tau_f is not square");
    if (p.c.rows() != m || p.c.cols() != n)
      errors.push_back(who.str() + ": c is " + dim_str(p.c.rows(), p.c.cols()) +
                       ", expected " + dim_str(m, n));
    if (p.v.rows() != n || p.v.cols() != m)
      errors.push_back(who.str() + ": v is " + dim_str(p.v.rows(), p.v.cols()) +
                       ", expected " + dim_str(n, m));
  }
  return errors;
}

void require_shapes(const FiniteDescription& fd, const char* where) {
  std::vector<std::string> errors = shape_errors(fd);
  if (!errors.empty())
    throw std::invalid_argument(std::string(where) + ": " + errors.front());
}

// ------------------------------------------------------------------
// scalar engines
// ------------------------------------------------------------------

struct ExactEngine {
  using Mat = RatMat;
  using Vec = std::vector<GaussRat>;

  double tol = 0.0;  // unused; kept for a uniform interface
  bool ambiguous = false;
  std::vector<std::string> warnings;

  explicit ExactEngine(double) {}

  static Mat from_eigen(const Matrix& m) { return RatMat::from_eigen(m); }
  static Matrix to_eigen(const Mat& m) { return m.to_eigen(); }
  static Index rows(const Mat& m) { return m.rows; }
  static Index cols(const Mat& m) { return m.cols; }
  static Mat mul(const Mat& a, const Mat& b) { return a * b; }
  static Mat identity(Index n) { return RatMat::identity(n); }
  static Mat zero(Index r, Index c) { return RatMat(r, c); }

  static Vec zero_vec(Index n) { return Vec(size_t(n)); }
  static Vec unit_vec(Index n, Index i) {
    Vec v(static_cast<size_t>(n));
    v[size_t(i)] = GaussRat(1);
    return v;
  }
  static Vec apply(const Mat& m, const Vec& v) {
    Vec w(size_t(m.rows));
    for (Index i = 0; i < m.rows; ++i)
      for (Index j = 0; j < m.cols; ++j) {
        if (m(i, j).is_zero()) continue;
        w[size_t(i)] += m(i, j) * v[size_t(j)];
      }
    return w;
  }
  static Vec col(const Mat& m, Index j) {
    Vec v(size_t(m.rows));
    for (Index i = 0; i < m.rows; ++i) v[size_t(i)] = m(i, j);
    return v;
  }
  static Mat hcat(const Mat& a, const Mat& b) {
    Mat r(a.rows, a.cols + b.cols);
    for (Index i = 0; i < a.rows; ++i) {
      for (Index j = 0; j < a.cols; ++j) r(i, j) = a(i, j);
      for (Index j = 0; j < b.cols; ++j) r(i, a.cols + j) = b(i, j);
    }
    return r;
  }
  static Mat block(const Mat& m, Index i0, Index j0, Index r, Index c) {
    Mat b(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) b(i, j) = m(i0 + i, j0 + j);
    return b;
  }
  static Mat cols_to_mat(Index dim, const std::vector<Vec>& columns) {
    Mat m(dim, Index(columns.size()));
    for (size_t j = 0; j < columns.size(); ++j)
      for (Index i = 0; i < dim; ++i) m(i, Index(j)) = columns[j][size_t(i)];
    return m;
  }
  static void add_block_scaled(Mat& x, const Mat& m, Index r0, Index c0,
                               const Complex& coeff) {
    GaussRat c = GaussRat::from_complex(coeff);
    for (Index i = 0; i < m.rows; ++i)
      for (Index j = 0; j < m.cols; ++j)
        x(r0 + i, c0 + j) += c * m(i, j);
  }
  static Mat reshape_segment(const Mat& colvec, Index offset, Index r,
                             Index c) {
    Mat m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = colvec(offset + j * r + i, 0);
    return m;
  }

  std::optional<Mat> inverse(const Mat& m) { return rat_inverse(m); }
  Mat kernel(const Mat& m) { return rat_kernel(m); }

  // Incremental span: reduced rows for membership, with the accepted original
  // vectors kept as the basis.
  struct Span {
    Index width = 0;
    std::vector<Vec> rrows;
    std::vector<Index> pivots;
    std::vector<Vec> accepted;

    bool insert(ExactEngine&, const Vec& v) {
      Vec w = v;
      for (size_t i = 0; i < rrows.size(); ++i) {
        GaussRat f = w[size_t(pivots[i])];
        if (f.is_zero()) continue;
        for (Index j = 0; j < width; ++j) w[size_t(j)] -= f * rrows[i][size_t(j)];
      }
      Index p = -1;
      for (Index j = 0; j < width; ++j)
        if (!w[size_t(j)].is_zero()) {
          p = j;
          break;
        }
      if (p < 0) return false;
      GaussRat inv = GaussRat(1) / w[size_t(p)];
      for (Index j = 0; j < width; ++j) w[size_t(j)] *= inv;
      // Keep the stored rows mutually reduced so elimination order is safe.
      for (size_t i = 0; i < rrows.size(); ++i) {
        GaussRat f = rrows[i][size_t(p)];
        if (f.is_zero()) continue;
        for (Index j = 0; j < width; ++j) rrows[i][size_t(j)] -= f * w[size_t(j)];
      }
      rrows.push_back(std::move(w));
      pivots.push_back(p);
      accepted.push_back(v);
      return true;
    }
    Index dim() const { return Index(accepted.size()); }
    Mat basis() const { return cols_to_mat(width, accepted); }
  };
  Span make_span(Index width) {
    Span s;
    s.width = width;
    return s;
  }

  static Complex random_coeff(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(-3, 3);
    return Complex(double(d(rng)), double(d(rng)));
  }
  static GaussRat random_entry(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(-5, 5);
    return GaussRat(Rational(d(rng)), Rational(d(rng)));
  }
};

struct NumericEngine {
  using Mat = Matrix;
  using Vec = Vector;

  double tol;
  bool ambiguous = false;
  std::vector<std::string> warnings;

  explicit NumericEngine(double t) : tol(std::max(t, 1e-14)) {}

  static Mat from_eigen(const Matrix& m) { return m; }
  static Matrix to_eigen(const Mat& m) { return m; }
  static Index rows(const Mat& m) { return m.rows(); }
  static Index cols(const Mat& m) { return m.cols(); }
  static Mat mul(const Mat& a, const Mat& b) { return a * b; }
  static Mat identity(Index n) { return eye(n); }
  static Mat zero(Index r, Index c) { return Matrix::Zero(r, c); }

  static Vec zero_vec(Index n) { return Vector::Zero(n); }
  static Vec unit_vec(Index n, Index i) {
    Vector v = Vector::Zero(n);
    v(i) = Complex(1, 0);
    return v;
  }
  static Vec apply(const Mat& m, const Vec& v) { return m * v; }
  static Vec col(const Mat& m, Index j) { return m.col(j); }
  static Mat hcat(const Mat& a, const Mat& b) {
    Mat r(a.rows(), a.cols() + b.cols());
    r << a, b;
    return r;
  }
  static Mat block(const Mat& m, Index i0, Index j0, Index r, Index c) {
    return m.block(i0, j0, r, c);
  }
  static Mat cols_to_mat(Index dim, const std::vector<Vec>& columns) {
    Mat m(dim, Index(columns.size()));
    for (size_t j = 0; j < columns.size(); ++j) m.col(Index(j)) = columns[j];
    return m;
  }
  static void add_block_scaled(Mat& x, const Mat& m, Index r0, Index c0,
                               const Complex& coeff) {
    x.block(r0, c0, m.rows(), m.cols()) += coeff * m;
  }
  static Mat reshape_segment(const Mat& colvec, Index offset, Index r,
                             Index c) {
    Mat m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = colvec(offset + j * r + i, 0);
    return m;
  }

  std::optional<Mat> inverse(const Mat& m) {
    if (m.rows() != m.cols()) return std::nullopt;
    if (m.rows() == 0) return Mat(0, 0);
    Eigen::JacobiSVD<Matrix> svd(m);
    double s0 = svd.singularValues()(0);
    double smin = svd.singularValues()(m.rows() - 1);
    if (s0 <= 0.0 || smin <= tol * std::max(1.0, s0)) return std::nullopt;
    return m.fullPivLu().inverse();
  }
  Mat kernel(const Mat& m) {
    if (m.cols() == 0) return Mat(0, 0);
    if (m.rows() == 0) return identity(m.cols());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double s0 = sv(0);
    double cut = tol * std::max(1.0, s0);
    Index r = 0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) ++r;
      if (sv(i) > cut && sv(i) <= 10.0 * cut) {
        ambiguous = true;
        std::ostringstream os;
        os << "borderline singular value " << sv(i) << " near cutoff " << cut;
        warnings.push_back(os.str());
      }
    }
    return svd.matrixV().rightCols(m.cols() - r);
  }

  struct Span {
    Index width = 0;
    std::vector<Vector> q;  // orthonormal

    bool insert(NumericEngine& eng, const Vec& v) {
      double nv = v.norm();
      Vector r = v;
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& qi : q) r -= qi * qi.dot(r);
      double ratio = r.norm() / std::max(1.0, nv);
      if (ratio <= eng.tol) return false;
      if (ratio <= 10.0 * eng.tol) {
        eng.ambiguous = true;
        std::ostringstream os;
        os << "ambiguous span membership: residual ratio " << ratio;
        eng.warnings.push_back(os.str());
        return false;
      }
      q.push_back(r / r.norm());
      return true;
    }
    Index dim() const { return Index(q.size()); }
    Mat basis() const { return cols_to_mat(width, q); }
  };
  Span make_span(Index width) {
    Span s;
    s.width = width;
    return s;
  }

  static Complex random_coeff(std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    return Complex(d(rng), d(rng));
  }
  static Complex random_entry(std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    return Complex(d(rng), d(rng));
  }
};

// ------------------------------------------------------------------
// module view: all maps in engine scalars, components indexed 0 = e,
// 1..k = punctures
// ------------------------------------------------------------------

template <class E>
struct Module {
  Index genus = 0;
  std::vector<std::string> labels;
  std::vector<Index> dims;              // [n, m_1, ..., m_k]
  std::vector<typename E::Mat> rho;     // label order
  std::vector<typename E::Mat> tau, c, v;

  Index components() const { return Index(dims.size()); }
  Index total_dim() const {
    Index t = 0;
    for (Index d : dims) t += d;
    return t;
  }
};

template <class E>
struct MapRef {
  Index from = 0, to = 0;
  const typename E::Mat* m = nullptr;
};

template <class E>
std::vector<MapRef<E>> module_maps(const Module<E>& m) {
  std::vector<MapRef<E>> maps;
  for (const auto& r : m.rho) maps.push_back({0, 0, &r});
  for (size_t a = 0; a < m.tau.size(); ++a) {
    Index comp = Index(a) + 1;
    maps.push_back({comp, comp, &m.tau[a]});
    maps.push_back({0, comp, &m.c[a]});
    maps.push_back({comp, 0, &m.v[a]});
  }
  return maps;
}

template <class E>
Module<E> module_from_fd(const FiniteDescription& fd, E&) {
  Module<E> m;
  m.genus = fd.genus;
  m.labels = surface_generator_labels(fd.genus, fd.puncture_count());
  m.dims.push_back(fd.dim());
  for (const Puncture& p : fd.punctures) m.dims.push_back(p.tau_f.rows());
  for (const std::string& label : m.labels)
    m.rho.push_back(E::from_eigen(fd.rho.at(label)));
  for (const Puncture& p : fd.punctures) {
    m.tau.push_back(E::from_eigen(p.tau_f));
    m.c.push_back(E::from_eigen(p.c));
    m.v.push_back(E::from_eigen(p.v));
  }
  return m;
}

template <class E>
FiniteDescription module_to_fd(const Module<E>& m, E&) {
  FiniteDescription fd;
  fd.genus = m.genus;
  for (size_t i = 0; i < m.labels.size(); ++i)
    fd.rho[m.labels[i]] = E::to_eigen(m.rho[i]);
  for (size_t a = 0; a < m.tau.size(); ++a)
    fd.punctures.push_back(
        {E::to_eigen(m.tau[a]), E::to_eigen(m.c[a]), E::to_eigen(m.v[a])});
  return fd;
}

// ------------------------------------------------------------------
// generated subobjects: breadth-first closure of component seeds under
// every structure map.  Closure under the forward maps suffices: on a
// finite-dimensional invariant subspace an invertible map restricts to a
// bijection, so stability under inverses is automatic.
// ------------------------------------------------------------------

template <class E>
using SeedVec = std::vector<typename E::Vec>;  // one block per component

template <class E>
std::vector<typename E::Span> spin_closure(const Module<E>& m, E& eng,
                                           const std::vector<SeedVec<E>>& seeds) {
  const Index comps = m.components();
  std::vector<typename E::Span> spans;
  for (Index cidx = 0; cidx < comps; ++cidx)
    spans.push_back(eng.make_span(m.dims[size_t(cidx)]));

  std::vector<std::pair<Index, typename E::Vec>> work;
  auto feed = [&](Index comp, const typename E::Vec& vec) {
    if (spans[size_t(comp)].insert(eng, vec)) work.push_back({comp, vec});
  };
  for (const SeedVec<E>& seed : seeds)
    for (Index comp = 0; comp < comps && size_t(comp) < seed.size(); ++comp)
      feed(comp, seed[size_t(comp)]);

  const std::vector<MapRef<E>> maps = module_maps(m);
  for (size_t head = 0; head < work.size(); ++head) {
    Index comp = work[head].first;
    typename E::Vec vec = work[head].second;  // copy: work may reallocate
    for (const MapRef<E>& mr : maps) {
      if (mr.from != comp) continue;
      feed(mr.to, E::apply(*mr.m, vec));
    }
  }
  return spans;
}

// ------------------------------------------------------------------
// probe seeds: eigen-structure of a random element of the algebra acting on
// the total space.  Exact mode factors the characteristic polynomial into
// squarefree parts and takes kernels; numeric mode takes spectral projector
// columns.
// ------------------------------------------------------------------

template <class E>
std::vector<Index> component_offsets(const Module<E>& m) {
  std::vector<Index> off(size_t(m.components()) + 1, 0);
  for (Index i = 0; i < m.components(); ++i)
    off[size_t(i) + 1] = off[size_t(i)] + m.dims[size_t(i)];
  return off;
}

template <class E>
typename E::Mat random_algebra_element(const Module<E>& m, E&,
                                       std::mt19937_64& rng) {
  const std::vector<Index> off = component_offsets(m);
  const Index total = off.back();
  typename E::Mat x = E::zero(total, total);
  for (const MapRef<E>& mr : module_maps(m))
    E::add_block_scaled(x, *mr.m, off[size_t(mr.to)], off[size_t(mr.from)],
                        E::random_coeff(rng));
  return x;
}

template <class E>
SeedVec<E> split_total_column(const Module<E>& m, const typename E::Mat& k,
                              Index col) {
  const std::vector<Index> off = component_offsets(m);
  SeedVec<E> seed;
  for (Index comp = 0; comp < m.components(); ++comp) {
    typename E::Vec v = E::zero_vec(m.dims[size_t(comp)]);
    for (Index i = 0; i < m.dims[size_t(comp)]; ++i)
      v[size_t(i)] = k(off[size_t(comp)] + i, col);
    seed.push_back(v);
  }
  return seed;
}

// (Vector indexing differs between engines; specialize the copy.)
template <>
SeedVec<NumericEngine> split_total_column(const Module<NumericEngine>& m,
                                          const Matrix& k, Index col) {
  const std::vector<Index> off = component_offsets(m);
  SeedVec<NumericEngine> seed;
  for (Index comp = 0; comp < m.components(); ++comp)
    seed.push_back(k.col(col).segment(off[size_t(comp)], m.dims[size_t(comp)]));
  return seed;
}

template <class E>
typename E::Vec engine_vec(const Vector& v);

template <>
ExactEngine::Vec engine_vec<ExactEngine>(const Vector& v) {
  ExactEngine::Vec w(size_t(v.size()));
  for (Index i = 0; i < v.size(); ++i) w[size_t(i)] = GaussRat::from_complex(v(i));
  return w;
}

template <>
NumericEngine::Vec engine_vec<NumericEngine>(const Vector& v) {
  return v;
}

std::vector<SeedVec<ExactEngine>> probe_seeds(const Module<ExactEngine>& m,
                                              ExactEngine& eng,
                                              std::mt19937_64& rng) {
  std::vector<SeedVec<ExactEngine>> seeds;
  RatMat x = random_algebra_element(m, eng, rng);
  for (const SquarefreeFactor& f : squarefree_factors(rat_charpoly(x))) {
    RatMat ker = rat_kernel(poly_eval_matrix(f.poly, x));
    for (Index j = 0; j < ker.cols; ++j)
      seeds.push_back(split_total_column(m, ker, j));
  }
  return seeds;
}

std::vector<SeedVec<NumericEngine>> probe_seeds(const Module<NumericEngine>& m,
                                                NumericEngine& eng,
                                                std::mt19937_64& rng) {
  std::vector<SeedVec<NumericEngine>> seeds;
  Matrix x = random_algebra_element(m, eng, rng);
  if (x.rows() == 0) return seeds;
  SpectralSplit split = spectral_split(x, default_cluster_tol(x));
  for (const SpectralCluster& cl : split.clusters)
    for (Index j = 0; j < cl.projector.cols(); ++j)
      if (cl.projector.col(j).norm() > 1e-8)
        seeds.push_back(split_total_column(m, cl.projector, j));
  return seeds;
}

// ------------------------------------------------------------------
// subobject search; the simplicity certificate is relative to this battery
// ------------------------------------------------------------------

template <class E>
std::optional<std::vector<typename E::Mat>> find_proper_subobject(
    const Module<E>& m, E& eng, std::mt19937_64& rng) {
  const Index total = m.total_dim();
  if (total <= 1) return std::nullopt;

  auto try_seeds = [&](const std::vector<SeedVec<E>>& seeds)
      -> std::optional<std::vector<typename E::Mat>> {
    auto spans = spin_closure(m, eng, seeds);
    Index d = 0;
    for (const auto& s : spans) d += s.dim();
    if (d == 0 || d >= total) return std::nullopt;
    std::vector<typename E::Mat> bases;
    for (const auto& s : spans) bases.push_back(s.basis());
    return bases;
  };

  // standard basis vectors, one component at a time
  for (Index comp = 0; comp < m.components(); ++comp)
    for (Index i = 0; i < m.dims[size_t(comp)]; ++i) {
      SeedVec<E> seed;
      for (Index c2 = 0; c2 < m.components(); ++c2)
        seed.push_back(c2 == comp ? E::unit_vec(m.dims[size_t(c2)], i)
                                  : E::zero_vec(m.dims[size_t(c2)]));
      if (auto s = try_seeds({seed})) return s;
    }

  // seeded random vectors across all components
  for (int t = 0; t < 16; ++t) {
    SeedVec<E> seed;
    for (Index c2 = 0; c2 < m.components(); ++c2) {
      typename E::Vec v = E::zero_vec(m.dims[size_t(c2)]);
      for (Index i = 0; i < m.dims[size_t(c2)]; ++i)
        v[size_t(i)] = E::random_entry(rng);
      seed.push_back(v);
    }
    if (auto s = try_seeds({seed})) return s;
  }

  // eigen-structure probes of random algebra elements
  for (int attempt = 0; attempt < 3; ++attempt)
    for (const SeedVec<E>& seed : probe_seeds(m, eng, rng))
      if (auto s = try_seeds({seed})) return s;

  return std::nullopt;
}

// ------------------------------------------------------------------
// composition series
// ------------------------------------------------------------------

// Complete basis columns: greedy standard vectors (exact), orthonormal
// complement from a full QR (numeric).
RatMat complement_basis(ExactEngine& eng, const RatMat& b, Index dim) {
  auto span = eng.make_span(dim);
  for (Index j = 0; j < b.cols; ++j) span.insert(eng, ExactEngine::col(b, j));
  std::vector<ExactEngine::Vec> extra;
  for (Index i = 0; i < dim && span.dim() < dim; ++i) {
    ExactEngine::Vec e = ExactEngine::unit_vec(dim, i);
    if (span.insert(eng, e)) extra.push_back(e);
  }
  return ExactEngine::cols_to_mat(dim, extra);
}

Matrix complement_basis(NumericEngine&, const Matrix& b, Index dim) {
  if (b.cols() == 0) return eye(dim);
  Eigen::HouseholderQR<Matrix> qr(b);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  return q.rightCols(dim - b.cols());
}

template <class E>
struct JHPieces {
  std::vector<FiniteDescription> factors;
  std::vector<SubObject> filtration;
};

template <class E>
SubObject emit_subobject(E& eng, const std::vector<typename E::Mat>& bases) {
  SubObject s;
  s.e_basis = E::to_eigen(bases[0]);
  for (size_t a = 1; a < bases.size(); ++a)
    s.f_bases.push_back(E::to_eigen(bases[a]));
  s.warnings = eng.warnings;
  return s;
}

template <class E>
JHPieces<E> jh_recurse(const Module<E>& m, E& eng, std::mt19937_64& rng,
                       const std::vector<typename E::Mat>& frame,
                       const std::vector<typename E::Mat>& base) {
  JHPieces<E> out;
  auto sub_bases = find_proper_subobject(m, eng, rng);
  if (!sub_bases) {
    out.factors.push_back(module_to_fd(m, eng));
    return out;
  }

  const Index comps = m.components();
  std::vector<typename E::Mat> t, tinv, comp_basis;
  std::vector<Index> sdim;
  for (Index cidx = 0; cidx < comps; ++cidx) {
    const typename E::Mat& b = (*sub_bases)[size_t(cidx)];
    typename E::Mat cb = complement_basis(eng, b, m.dims[size_t(cidx)]);
    typename E::Mat tt = E::hcat(b, cb);
    auto inv = eng.inverse(tt);
    if (!inv)
      throw std::runtime_error(
          "jordan_holder: subobject basis failed to complete to a frame");
    t.push_back(tt);
    tinv.push_back(*inv);
    comp_basis.push_back(cb);
    sdim.push_back(E::cols(b));
  }

  auto transformed = [&](const MapRef<E>& mr) {
    return E::mul(tinv[size_t(mr.to)], E::mul(*mr.m, t[size_t(mr.from)]));
  };
  Module<E> sub, quot;
  sub.genus = quot.genus = m.genus;
  sub.labels = quot.labels = m.labels;
  for (Index cidx = 0; cidx < comps; ++cidx) {
    sub.dims.push_back(sdim[size_t(cidx)]);
    quot.dims.push_back(m.dims[size_t(cidx)] - sdim[size_t(cidx)]);
  }
  auto split_map = [&](Index from, Index to, const typename E::Mat& mm,
                       std::vector<typename E::Mat>& sub_list,
                       std::vector<typename E::Mat>& quot_list) {
    MapRef<E> mr{from, to, &mm};
    typename E::Mat w = transformed(mr);
    sub_list.push_back(E::block(w, 0, 0, sdim[size_t(to)], sdim[size_t(from)]));
    quot_list.push_back(E::block(w, sdim[size_t(to)], sdim[size_t(from)],
                                 quot.dims[size_t(to)],
                                 quot.dims[size_t(from)]));
  };
  for (const auto& r : m.rho) split_map(0, 0, r, sub.rho, quot.rho);
  for (size_t a = 0; a < m.tau.size(); ++a) {
    Index comp = Index(a) + 1;
    split_map(comp, comp, m.tau[a], sub.tau, quot.tau);
    split_map(0, comp, m.c[a], sub.c, quot.c);
    split_map(comp, 0, m.v[a], sub.v, quot.v);
  }

  std::vector<typename E::Mat> frame_sub, frame_quot, step, base_quot;
  for (Index cidx = 0; cidx < comps; ++cidx) {
    typename E::Mat fs =
        E::mul(frame[size_t(cidx)], (*sub_bases)[size_t(cidx)]);
    typename E::Mat fq = E::mul(frame[size_t(cidx)], comp_basis[size_t(cidx)]);
    frame_sub.push_back(fs);
    frame_quot.push_back(fq);
    step.push_back(E::hcat(base[size_t(cidx)], fs));
    base_quot.push_back(E::hcat(base[size_t(cidx)], fs));
  }

  JHPieces<E> left = jh_recurse(sub, eng, rng, frame_sub, base);
  SubObject middle = emit_subobject(eng, step);
  JHPieces<E> right = jh_recurse(quot, eng, rng, frame_quot, base_quot);

  out.factors = std::move(left.factors);
  out.factors.insert(out.factors.end(), right.factors.begin(),
                     right.factors.end());
  out.filtration = std::move(left.filtration);
  out.filtration.push_back(std::move(middle));
  out.filtration.insert(out.filtration.end(), right.filtration.begin(),
                        right.filtration.end());
  return out;
}

template <class E>
JordanHolderResult jordan_holder_impl(const FiniteDescription& fd, double tol,
                                      std::uint64_t seed) {
  E eng(tol);
  Module<E> m = module_from_fd(fd, eng);
  std::mt19937_64 rng(seed);
  std::vector<typename E::Mat> frame, base;
  for (Index d : m.dims) {
    frame.push_back(E::identity(d));
    base.push_back(E::zero(d, 0));
  }
  JHPieces<E> pieces = jh_recurse(m, eng, rng, frame, base);
  JordanHolderResult result;
  result.factors = std::move(pieces.factors);
  result.filtration = std::move(pieces.filtration);
  result.status = eng.ambiguous ? JHStatus::Unresolved : JHStatus::Certified;
  result.notes = eng.warnings;
  return result;
}

// ------------------------------------------------------------------
// isomorphism witness search
// ------------------------------------------------------------------

template <class E>
std::optional<FDWitness> fd_isomorphic_impl(const FiniteDescription& x,
                                            const FiniteDescription& y,
                                            double tol, std::uint64_t seed) {
  const Index n = x.dim();
  const Index k = x.puncture_count();
  std::vector<Index> md;
  for (const Puncture& p : x.punctures) md.push_back(p.tau_f.rows());

  // variable layout: phi (n^2) then psi_a (m_a^2), all column-major
  std::vector<Index> voff{0};
  voff.push_back(n * n);
  for (Index a = 0; a < k; ++a)
    voff.push_back(voff.back() + md[size_t(a)] * md[size_t(a)]);
  const Index nvars = voff.back();
  const std::vector<std::string> labels = surface_generator_labels(x.genus, k);

  Index nrows = Index(labels.size()) * n * n;
  for (Index a = 0; a < k; ++a)
    nrows += md[size_t(a)] * md[size_t(a)] + 2 * md[size_t(a)] * n;
  Matrix sys = Matrix::Zero(nrows, nvars);
  Index row0 = 0;
  auto phi_var = [&](Index p, Index q) { return voff[0] + p + n * q; };
  auto psi_var = [&](Index a, Index p, Index q) {
    return voff[size_t(a) + 1] + p + md[size_t(a)] * q;
  };

  // phi rho_x(g) - rho_y(g) phi = 0
  for (const std::string& label : labels) {
    const Matrix& r1 = x.rho.at(label);
    const Matrix& r2 = y.rho.at(label);
    for (Index p = 0; p < n; ++p)
      for (Index q = 0; q < n; ++q) {
        Index row = row0 + p + n * q;
        for (Index r = 0; r < n; ++r) {
          sys(row, phi_var(p, r)) += r1(r, q);
          sys(row, phi_var(r, q)) -= r2(p, r);
        }
      }
    row0 += n * n;
  }
  for (Index a = 0; a < k; ++a) {
    const Index ma = md[size_t(a)];
    const Puncture& px = x.punctures[size_t(a)];
    const Puncture& py = y.punctures[size_t(a)];
    // psi tau_x - tau_y psi = 0
    for (Index p = 0; p < ma; ++p)
      for (Index q = 0; q < ma; ++q) {
        Index row = row0 + p + ma * q;
        for (Index r = 0; r < ma; ++r) {
          sys(row, psi_var(a, p, r)) += px.tau_f(r, q);
          sys(row, psi_var(a, r, q)) -= py.tau_f(p, r);
        }
      }
    row0 += ma * ma;
    // psi c_x - c_y phi = 0
    for (Index p = 0; p < ma; ++p)
      for (Index q = 0; q < n; ++q) {
        Index row = row0 + p + ma * q;
        for (Index r = 0; r < ma; ++r) sys(row, psi_var(a, p, r)) += px.c(r, q);
        for (Index r = 0; r < n; ++r) sys(row, phi_var(r, q)) -= py.c(p, r);
      }
    row0 += ma * n;
    // phi v_x - v_y psi = 0
    for (Index p = 0; p < n; ++p)
      for (Index q = 0; q < ma; ++q) {
        Index row = row0 + p + n * q;
        for (Index r = 0; r < ma; ++r) sys(row, phi_var(p, r)) += px.v(r, q);
        for (Index r = 0; r < ma; ++r) sys(row, psi_var(a, r, q)) -= py.v(p, r);
      }
    row0 += n * ma;
  }

  E eng(tol);
  typename E::Mat kernel = eng.kernel(E::from_eigen(sys));
  const Index kd = E::cols(kernel);
  if (kd == 0) return std::nullopt;

  std::mt19937_64 rng(seed);
  auto try_candidate =
      [&](const typename E::Mat& coeffs) -> std::optional<FDWitness> {
    typename E::Mat sol = E::mul(kernel, coeffs);
    typename E::Mat phi = E::reshape_segment(sol, voff[0], n, n);
    auto phi_inv = eng.inverse(phi);
    if (!phi_inv) return std::nullopt;
    FDWitness w;
    w.g = E::to_eigen(*phi_inv);
    for (Index a = 0; a < k; ++a) {
      const Index ma = md[size_t(a)];
      typename E::Mat psi =
          E::reshape_segment(sol, voff[size_t(a) + 1], ma, ma);
      auto psi_inv = eng.inverse(psi);
      if (!psi_inv) return std::nullopt;
      w.g_a.push_back(E::to_eigen(*psi_inv));
    }
    return w;
  };

  auto verified = [&](const FDWitness& w) {
    FiniteDescription moved;
    try {
      moved = act(x, w.g, w.g_a);
    } catch (const std::invalid_argument&) {
      return false;  // witness block too ill-conditioned to apply
    }
    double resid = 0.0, scale = 1.0;
    for (const std::string& label : labels) {
      resid = std::max(resid, norm1(moved.rho.at(label) - y.rho.at(label)));
      scale = std::max(scale, norm1(y.rho.at(label)));
    }
    for (Index a = 0; a < k; ++a) {
      const Puncture& pm = moved.punctures[size_t(a)];
      const Puncture& py = y.punctures[size_t(a)];
      resid = std::max({resid, norm1(pm.tau_f - py.tau_f),
                        norm1(pm.c - py.c), norm1(pm.v - py.v)});
      scale = std::max({scale, norm1(py.tau_f), norm1(py.c), norm1(py.v)});
    }
    return resid <= 1e4 * std::max(tol, 1e-10) * scale;
  };

  for (Index j = 0; j < kd; ++j) {
    typename E::Mat coeffs = E::zero(kd, 1);
    E::add_block_scaled(coeffs, E::identity(1), j, 0, Complex(1, 0));
    if (auto w = try_candidate(coeffs))
      if (verified(*w)) return w;
  }
  for (int t = 0; t < 32; ++t) {
    typename E::Mat coeffs = E::zero(kd, 1);
    for (Index j = 0; j < kd; ++j)
      E::add_block_scaled(coeffs, E::identity(1), j, 0, E::random_coeff(rng));
    if (auto w = try_candidate(coeffs))
      if (verified(*w)) return w;
  }
  return std::nullopt;
}

// ------------------------------------------------------------------
// adapted bases for degenerations (per component)
// ------------------------------------------------------------------

double containment_residual_vec(const Vector& v, const Matrix& q) {
  Vector r = v;
  if (q.cols() > 0) r -= q * (q.adjoint() * v);
  return r.norm() / std::max(1.0, v.norm());
}

struct AdaptedComponent {
  Matrix basis;                // unitary, columns ordered by weight
  std::vector<Index> weight;   // 1-based step index of first appearance
};

// steps: strictly increasing bases of one component (possibly zero-width),
// not including the ambient space.
AdaptedComponent adapt_component(const std::vector<Matrix>& steps, Index dim,
                                 double tol, const char* what) {
  AdaptedComponent ad;
  ad.basis = Matrix(dim, 0);
  auto extend = [&](const Matrix& target, Index w) {
    for (Index j = 0; j < target.cols(); ++j) {
      Vector v = target.col(j);
      Vector r = v;
      if (ad.basis.cols() > 0) r -= ad.basis * (ad.basis.adjoint() * v);
      double ratio = r.norm() / std::max(1.0, v.norm());
      if (ratio <= 100.0 * std::max(tol, 1e-13)) continue;  // already present
      Matrix grown(dim, ad.basis.cols() + 1);
      grown << ad.basis, r / r.norm();
      ad.basis = grown;
      ad.weight.push_back(w);
    }
  };
  Index prev = 0;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].rows() != dim)
      throw std::invalid_argument(std::string("degenerate_family: ") + what +
                                  " step has wrong row count");
    extend(steps[i], Index(i) + 1);
    if (ad.basis.cols() < prev)
      throw std::logic_error("degenerate_family: adapted basis shrank");
    prev = ad.basis.cols();
  }
  extend(eye(dim), Index(steps.size()) + 1);
  if (ad.basis.cols() != dim)
    throw std::logic_error("degenerate_family: adapted basis incomplete");
  return ad;
}

Matrix weight_conjugator(const AdaptedComponent& ad, const Complex& tau,
                         bool inverse) {
  Index d = ad.basis.cols();
  Matrix diag = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    Complex p(1, 0);
    for (Index w = 0; w < ad.weight[size_t(i)]; ++w) p *= tau;
    diag(i, i) = inverse ? Complex(1, 0) / p : p;
  }
  return ad.basis * diag * ad.basis.adjoint();
}

// keep only the blocks where row and column weight agree (associated graded)
Matrix graded_part(const Matrix& m, const AdaptedComponent& row,
                   const AdaptedComponent& col) {
  Matrix a = row.basis.adjoint() * m * col.basis;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (row.weight[size_t(i)] != col.weight[size_t(j)]) a(i, j) = Complex(0, 0);
  return row.basis * a * col.basis.adjoint();
}

}  // namespace

// ------------------------------------------------------------------
// public surface
// ------------------------------------------------------------------

Index FiniteDescription::dim() const {
  if (!rho.empty()) return rho.begin()->second.rows();
  if (!punctures.empty()) return punctures.front().c.cols();
  return 0;
}

Index FiniteDescription::puncture_count() const {
  return Index(punctures.size());
}

Index FiniteDescription::total_dim() const {
  Index t = dim();
  for (const Puncture& p : punctures) t += p.tau_f.rows();
  return t;
}

Index SubObject::total_dim() const {
  Index t = e_basis.cols();
  for (const Matrix& b : f_bases) t += b.cols();
  return t;
}

std::vector<std::string> surface_generator_labels(Index genus, Index k) {
  std::vector<std::string> labels;
  for (Index i = 1; i <= genus; ++i) {
    labels.push_back("a" + std::to_string(i));
    labels.push_back("b" + std::to_string(i));
  }
  for (Index a = 1; a <= k; ++a) labels.push_back("c" + std::to_string(a));
  return labels;
}

FDValidation validate_fd(const FiniteDescription& fd, double tol) {
  FDValidation val;
  val.errors = shape_errors(fd);
  if (!val.errors.empty()) return val;

  const Index n = fd.dim();
  const Index k = fd.puncture_count();
  const double t = std::max(tol, 1e-12);

  // surface relation: product of genus commutators, then puncture loops
  Matrix rel = eye(n);
  bool relation_computable = true;
  for (Index i = 1; i <= fd.genus; ++i) {
    const Matrix& a = fd.rho.at("a" + std::to_string(i));
    const Matrix& b = fd.rho.at("b" + std::to_string(i));
    Eigen::FullPivLU<Matrix> lua(a), lub(b);
    if (!lua.isInvertible() || !lub.isInvertible()) {
      val.errors.push_back("singular handle generator at index " +
                           std::to_string(i));
      relation_computable = false;
      continue;
    }
    rel = rel * a * b * lua.inverse() * lub.inverse();
  }
  if (relation_computable) {
    for (Index a = 1; a <= k; ++a) rel = rel * fd.rho.at("c" + std::to_string(a));
    val.relation_residual = norm1(rel - eye(n)) / std::max(1.0, norm1(rel));
  }

  for (Index a = 0; a < k; ++a) {
    const Puncture& p = fd.punctures[size_t(a)];
    const Matrix& loop = fd.rho.at("c" + std::to_string(a + 1));
    const Index m = p.tau_f.rows();
    double scale = std::max({1.0, norm1(loop), norm1(p.tau_f),
                             norm1(p.c) * std::max(1.0, norm1(p.v))});
    double r = std::max({norm1(p.v * p.c - (loop - eye(n))),
                         norm1(p.c * p.v - (p.tau_f - eye(m))),
                         norm1(p.c * loop - p.tau_f * p.c),
                         norm1(p.v * p.tau_f - loop * p.v)});
    val.invariant_residual = std::max(val.invariant_residual, r / scale);
  }

  val.ok = val.errors.empty() && relation_computable &&
           val.relation_residual <= t && val.invariant_residual <= t;
  return val;
}

FiniteDescription act(const FiniteDescription& fd, const Matrix& g,
                      const std::vector<Matrix>& g_a) {
  require_shapes(fd, "act");
  const Index n = fd.dim();
  const Index k = fd.puncture_count();
  if (g.rows() != n || g.cols() != n)
    throw std::invalid_argument("act: g has the wrong shape");
  if (Index(g_a.size()) != k)
    throw std::invalid_argument("act: need one g_a per puncture");
  Eigen::FullPivLU<Matrix> lug(g);
  if (!lug.isInvertible()) throw std::invalid_argument("act: g is singular");
  Matrix gi = lug.inverse();

  FiniteDescription out;
  out.genus = fd.genus;
  for (const auto& [label, m] : fd.rho) out.rho[label] = gi * m * g;
  for (Index a = 0; a < k; ++a) {
    const Puncture& p = fd.punctures[size_t(a)];
    const Matrix& ga = g_a[size_t(a)];
    const Index m = p.tau_f.rows();
    if (ga.rows() != m || ga.cols() != m)
      throw std::invalid_argument("act: g_a[" + std::to_string(a) +
                                  "] has the wrong shape");
    Eigen::FullPivLU<Matrix> luga(ga);
    if (!luga.isInvertible())
      throw std::invalid_argument("act: g_a[" + std::to_string(a) +
                                  "] is singular");
    Matrix gai = luga.inverse();
    out.punctures.push_back({gai * p.tau_f * ga, gai * p.c * g, gi * p.v * ga});
  }
  return out;
}

SubObject spin(const FiniteDescription& fd, const std::vector<FDVector>& seeds,
               ScalarMode mode, double tol) {
  require_shapes(fd, "spin");
  const Index n = fd.dim();
  const Index k = fd.puncture_count();
  for (const FDVector& s : seeds) {
    if (s.e.size() != 0 && s.e.size() != n)
      throw std::invalid_argument("spin: seed e-block has the wrong size");
    if (!s.f.empty() && Index(s.f.size()) != k)
      throw std::invalid_argument("spin: seed has the wrong puncture count");
    for (Index a = 0; a < Index(s.f.size()); ++a)
      if (s.f[size_t(a)].size() != 0 &&
          s.f[size_t(a)].size() != fd.punctures[size_t(a)].tau_f.rows())
        throw std::invalid_argument("spin: seed f-block has the wrong size");
  }

  auto run = [&](auto eng) -> SubObject {
    using E = decltype(eng);
    Module<E> m = module_from_fd(fd, eng);
    std::vector<SeedVec<E>> converted;
    for (const FDVector& s : seeds) {
      SeedVec<E> seed;
      seed.push_back(s.e.size() == 0 ? E::zero_vec(n)
                                     : engine_vec<E>(s.e));
      for (Index a = 0; a < k; ++a) {
        Index ma = fd.punctures[size_t(a)].tau_f.rows();
        if (Index(s.f.size()) == k && s.f[size_t(a)].size() != 0)
          seed.push_back(engine_vec<E>(s.f[size_t(a)]));
        else
          seed.push_back(E::zero_vec(ma));
      }
      converted.push_back(seed);
    }
    auto spans = spin_closure(m, eng, converted);
    std::vector<typename E::Mat> bases;
    for (const auto& sp : spans) bases.push_back(sp.basis());
    return emit_subobject(eng, bases);
  };
  if (mode == ScalarMode::Exact) return run(ExactEngine(tol));
  return run(NumericEngine(tol));
}

JordanHolderResult jordan_holder(const FiniteDescription& fd, ScalarMode mode,
                                 double tol, std::uint64_t seed,
                                 Index dim_bound) {
  require_shapes(fd, "jordan_holder");
  if (fd.total_dim() > dim_bound)
    throw std::invalid_argument(
        "jordan_holder: total dimension exceeds dim_bound");
  if (mode == ScalarMode::Exact)
    return jordan_holder_impl<ExactEngine>(fd, tol, seed);
  return jordan_holder_impl<NumericEngine>(fd, tol, seed);
}

std::optional<FDWitness> fd_isomorphic(const FiniteDescription& x,
                                       const FiniteDescription& y,
                                       ScalarMode mode, double tol,
                                       std::uint64_t seed) {
  require_shapes(x, "fd_isomorphic");
  require_shapes(y, "fd_isomorphic");
  if (x.genus != y.genus || x.puncture_count() != y.puncture_count() ||
      x.dim() != y.dim())
    return std::nullopt;
  for (Index a = 0; a < x.puncture_count(); ++a)
    if (x.punctures[size_t(a)].tau_f.rows() !=
        y.punctures[size_t(a)].tau_f.rows())
      return std::nullopt;
  if (mode == ScalarMode::Exact)
    return fd_isomorphic_impl<ExactEngine>(x, y, tol, seed);
  return fd_isomorphic_impl<NumericEngine>(x, y, tol, seed);
}

std::optional<bool> s_equivalent(const FiniteDescription& x,
                                 const FiniteDescription& y, ScalarMode mode,
                                 double tol, std::uint64_t seed) {
  JordanHolderResult jx = jordan_holder(x, mode, tol, seed);
  JordanHolderResult jy = jordan_holder(y, mode, tol, seed);
  if (jx.status == JHStatus::Unresolved || jy.status == JHStatus::Unresolved)
    return std::nullopt;
  if (jx.factors.size() != jy.factors.size()) return false;
  std::vector<bool> used(jy.factors.size(), false);
  for (const FiniteDescription& fx : jx.factors) {
    bool matched = false;
    for (size_t j = 0; j < jy.factors.size(); ++j) {
      if (used[j]) continue;
      if (fx.total_dim() != jy.factors[j].total_dim()) continue;
      if (fd_isomorphic(fx, jy.factors[j], mode, tol, seed)) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

FiniteDescription degenerate_family(const FiniteDescription& fd,
                                    const std::vector<SubObject>& filtration,
                                    const Complex& tau, double tol) {
  require_shapes(fd, "degenerate_family");
  if (tau == Complex(1, 0)) return fd;
  const Index n = fd.dim();
  const Index k = fd.puncture_count();
  const double t = std::max(tol, 1e-12);

  // collect per-component step bases and validate monotonicity + invariance
  std::vector<Matrix> e_steps;
  std::vector<std::vector<Matrix>> f_steps(static_cast<size_t>(k));
  Index prev_total = 0;
  for (const SubObject& s : filtration) {
    if (Index(s.f_bases.size()) != k)
      throw std::invalid_argument(
          "degenerate_family: filtration step has the wrong puncture count");
    if (s.total_dim() <= prev_total || s.total_dim() >= fd.total_dim())
      throw std::invalid_argument(
          "degenerate_family: filtration must be strictly increasing and "
          "proper");
    prev_total = s.total_dim();
    e_steps.push_back(s.e_basis);
    for (Index a = 0; a < k; ++a)
      f_steps[size_t(a)].push_back(s.f_bases[size_t(a)]);
  }

  AdaptedComponent ade = adapt_component(e_steps, n, tol, "e");
  std::vector<AdaptedComponent> adf;
  for (Index a = 0; a < k; ++a)
    adf.push_back(adapt_component(
        f_steps[size_t(a)], fd.punctures[size_t(a)].tau_f.rows(), tol, "f"));

  // invariance of every step under every structure map
  const std::vector<std::string> labels = surface_generator_labels(fd.genus, k);
  auto check_invariant = [&](const Matrix& map, const Matrix& from,
                             const Matrix& to, const char* what) {
    if (from.cols() == 0) return;
    Eigen::ColPivHouseholderQR<Matrix> qr(to);
    Matrix qq = qr.householderQ() * Matrix::Identity(to.rows(), to.rows());
    Matrix q = qq.leftCols(qr.rank());
    for (Index j = 0; j < from.cols(); ++j)
      if (containment_residual_vec(map * from.col(j), q) > 1e3 * t)
        throw std::invalid_argument(
            std::string("degenerate_family: filtration step is not "
                        "invariant under ") +
            what);
  };
  for (size_t i = 0; i < filtration.size(); ++i) {
    const SubObject& s = filtration[i];
    for (const std::string& label : labels)
      check_invariant(fd.rho.at(label), s.e_basis, s.e_basis, "rho");
    for (Index a = 0; a < k; ++a) {
      const Puncture& p = fd.punctures[size_t(a)];
      check_invariant(p.tau_f, s.f_bases[size_t(a)], s.f_bases[size_t(a)],
                      "tau_f");
      check_invariant(p.c, s.e_basis, s.f_bases[size_t(a)], "c");
      check_invariant(p.v, s.f_bases[size_t(a)], s.e_basis, "v");
    }
  }

  FiniteDescription out;
  out.genus = fd.genus;
  if (tau == Complex(0, 0)) {
    for (const std::string& label : labels)
      out.rho[label] = graded_part(fd.rho.at(label), ade, ade);
    for (Index a = 0; a < k; ++a) {
      const Puncture& p = fd.punctures[size_t(a)];
      const AdaptedComponent& ada = adf[size_t(a)];
      out.punctures.push_back({graded_part(p.tau_f, ada, ada),
                               graded_part(p.c, ada, ade),
                               graded_part(p.v, ade, ada)});
    }
    return out;
  }

  Matrix ge = weight_conjugator(ade, tau, false);
  Matrix ge_inv = weight_conjugator(ade, tau, true);
  for (const std::string& label : labels)
    out.rho[label] = ge_inv * fd.rho.at(label) * ge;
  for (Index a = 0; a < k; ++a) {
    const Puncture& p = fd.punctures[size_t(a)];
    Matrix ga = weight_conjugator(adf[size_t(a)], tau, false);
    Matrix ga_inv = weight_conjugator(adf[size_t(a)], tau, true);
    out.punctures.push_back(
        {ga_inv * p.tau_f * ga, ga_inv * p.c * ge, ge_inv * p.v * ga});
  }
  return out;
}

FiniteDescription direct_sum(const FiniteDescription& x,
                             const FiniteDescription& y) {
  require_shapes(x, "direct_sum");
  require_shapes(y, "direct_sum");
  if (x.genus != y.genus || x.puncture_count() != y.puncture_count())
    throw std::invalid_argument(
        "direct_sum: genus and puncture count must agree");
  auto blockdiag = [](const Matrix& a, const Matrix& b) {
    Matrix m = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    m.topLeftCorner(a.rows(), a.cols()) = a;
    m.bottomRightCorner(b.rows(), b.cols()) = b;
    return m;
  };
  FiniteDescription out;
  out.genus = x.genus;
  for (const auto& [label, m] : x.rho)
    out.rho[label] = blockdiag(m, y.rho.at(label));
  for (Index a = 0; a < x.puncture_count(); ++a) {
    const Puncture& px = x.punctures[size_t(a)];
    const Puncture& py = y.punctures[size_t(a)];
    out.punctures.push_back({blockdiag(px.tau_f, py.tau_f),
                             blockdiag(px.c, py.c), blockdiag(px.v, py.v)});
  }
  return out;
}

FiniteDescription fd_from_local(const LocalRHData& d) {
  const Index n = d.t_e.rows();
  if (d.t_e.cols() != n)
    throw std::invalid_argument("fd_from_local: t_e must be square");
  Eigen::FullPivLU<Matrix> lu(d.t_e);
  if (!lu.isInvertible())
    throw std::invalid_argument("fd_from_local: t_e is singular");
  Matrix te_inv = lu.inverse();

  FiniteDescription fd;
  fd.genus = 0;
  fd.rho["c1"] = d.t_e;
  fd.rho["c2"] = te_inv;
  fd.punctures.push_back({d.t_f, d.c, d.v});
  fd.punctures.push_back({te_inv, te_inv - eye(n), eye(n)});
  return fd;
}

}  // namespace rhkit
