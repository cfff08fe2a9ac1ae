#include "rhkit/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rhkit {

namespace {

const Complex kM2PiI(0.0, -2.0 * kPi);

// ---- scaled Taylor exponential ----

Matrix expm_taylor(Matrix a) {
  const Index n = a.rows();
  if (n == 0) return a;
  double nrm = norm1(a);
  int s = 0;
  if (nrm > 0.5) {
    s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    s = std::min(s, 64);
    a /= std::pow(2.0, s);
  }
  Matrix sum = eye(n) + a;
  Matrix term = a;
  for (int k = 2; k <= 64; ++k) {
    term = (term * a) / static_cast<double>(k);
    sum += term;
    if (norm1(term) <= 1e-18 * std::max(1.0, norm1(sum))) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// phi1(a) = (exp(a) - 1) a^{-1} extended over singular a, read off the
// top-right block of exp([[a, I], [0, 0]]).
Matrix phi1(const Matrix& a) {
  const Index n = a.rows();
  if (n == 0) return a;
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, n) = eye(n);
  return expm_taylor(aug).topRightCorner(n, n);
}

Matrix atomic_entire(const Matrix& block, EntireKind kind) {
  switch (kind) {
    case EntireKind::ExpM2Pi: return expm_taylor(kM2PiI * block);
    case EntireKind::PhiM2Pi: return kM2PiI * phi1(kM2PiI * block);
    case EntireKind::ExpPlain: return expm_taylor(block);
    case EntireKind::PhiPlain: return phi1(block);
  }
  throw std::logic_error("unreachable");
}

// ---- Schur form, clustering, reordering ----

struct Schur {
  Matrix t, u;  // a = u t u^*, t upper triangular
};

Schur schur_of(const Matrix& a) {
  Eigen::ComplexSchur<Matrix> dec(a, /*computeU=*/true);
  if (dec.info() != Eigen::Success)
    throw std::runtime_error("complex Schur decomposition failed");
  return {dec.matrixT(), dec.matrixU()};
}

// Union-find grouping of the diagonal under a merge predicate.
template <class Pred>
std::vector<int> cluster_diagonal(const Matrix& t, Pred merge) {
  const Index n = t.rows();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (merge(t(i, i), t(j, j))) {
        int a = find(int(i)), b = find(int(j));
        if (a != b) parent[b] = a;
      }
  // Relabel by first occurrence.
  std::vector<int> label(n, -1), assign(n);
  int next = 0;
  for (Index i = 0; i < n; ++i) {
    int r = find(int(i));
    if (label[r] < 0) label[r] = next++;
    assign[i] = label[r];
  }
  return assign;
}

// Swaps the 1x1 diagonal blocks at positions i, i+1 of the triangular
// factor with a unitary similarity, updating u accordingly.
void swap_adjacent(Matrix& t, Matrix& u, Index i) {
  const Complex a = t(i, i), b = t(i, i + 1), d = t(i + 1, i + 1);
  Complex v0 = b, v1 = d - a;
  double nv = std::sqrt(std::norm(v0) + std::norm(v1));
  if (nv == 0.0) return;  // identical blocks, nothing to do
  Complex c = v0 / nv, s = v1 / nv;
  Matrix g(2, 2);
  g << c, -std::conj(s), s, std::conj(c);
  t.middleRows(i, 2) = g.adjoint() * t.middleRows(i, 2);
  t.middleCols(i, 2) = t.middleCols(i, 2) * g;
  u.middleCols(i, 2) = u.middleCols(i, 2) * g;
  t(i + 1, i) = Complex(0, 0);
}

// Reorders positions so that the given integer keys are non-decreasing,
// using adjacent swaps.  Keys move together with the diagonal.
void sort_by_keys(Matrix& t, Matrix& u, std::vector<int>& keys) {
  const Index n = t.rows();
  bool moved = true;
  while (moved) {
    moved = false;
    for (Index i = 0; i + 1 < n; ++i) {
      if (keys[i] > keys[i + 1]) {
        swap_adjacent(t, u, i);
        std::swap(keys[i], keys[i + 1]);
        moved = true;
      }
    }
  }
}

// Solves t1 x - x t2 = b with t1, t2 upper triangular (sizes p, q).
Matrix sylvester_tri(const Matrix& t1, const Matrix& t2, const Matrix& b) {
  const Index p = t1.rows(), q = t2.rows();
  Matrix x = Matrix::Zero(p, q);
  for (Index j = 0; j < q; ++j) {
    Vector rhs = b.col(j);
    if (j > 0) rhs += x.leftCols(j) * t2.topRows(j).col(j);
    Matrix m = t1 - t2(j, j) * eye(p);
    x.col(j) = m.triangularView<Eigen::Upper>().solve(rhs);
  }
  return x;
}

struct BlockLayout {
  std::vector<Index> offset, size;  // contiguous diagonal blocks
};

BlockLayout layout_from_sorted_keys(const std::vector<int>& keys) {
  BlockLayout lay;
  Index i = 0, n = Index(keys.size());
  while (i < n) {
    Index j = i;
    while (j < n && keys[j] == keys[i]) ++j;
    lay.offset.push_back(i);
    lay.size.push_back(j - i);
    i = j;
  }
  return lay;
}

// Block recurrence on a reordered triangular factor: f_II from the atomic
// evaluator, off-diagonal blocks from triangular Sylvester solves.
template <class Atomic>
Matrix block_recurrence(const Matrix& t, const BlockLayout& lay, Atomic atomic) {
  const Index n = t.rows();
  const int nb = int(lay.offset.size());
  Matrix f = Matrix::Zero(n, n);
  auto blk = [&](const Matrix& m, int i, int j) {
    return m.block(lay.offset[i], lay.offset[j], lay.size[i], lay.size[j]);
  };
  for (int i = 0; i < nb; ++i)
    f.block(lay.offset[i], lay.offset[i], lay.size[i], lay.size[i]) =
        atomic(Matrix(blk(t, i, i)), i);
  for (int d = 1; d < nb; ++d) {
    for (int i = 0; i + d < nb; ++i) {
      int j = i + d;
      Matrix rhs = blk(f, i, i) * blk(t, i, j) - blk(t, i, j) * blk(f, j, j);
      for (int k = i + 1; k < j; ++k)
        rhs += blk(f, i, k) * blk(t, k, j) - blk(t, i, k) * blk(f, k, j);
      f.block(lay.offset[i], lay.offset[j], lay.size[i], lay.size[j]) =
          sylvester_tri(blk(t, i, i), blk(t, j, j), rhs);
    }
  }
  return f;
}

// ---- triangular square root and block logarithm ----

Matrix sqrt_tri(const Matrix& t) {
  const Index n = t.rows();
  Matrix s = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) s(i, i) = std::sqrt(t(i, i));
  for (Index d = 1; d < n; ++d) {
    for (Index i = 0; i + d < n; ++i) {
      Index j = i + d;
      Complex acc = t(i, j);
      for (Index k = i + 1; k < j; ++k) acc -= s(i, k) * s(k, j);
      Complex den = s(i, i) + s(j, j);
      if (std::abs(den) == 0.0)
        throw std::runtime_error("triangular square root broke down");
      s(i, j) = acc / den;
    }
  }
  return s;
}

// log(I + k) for a triangular block with eigenvalues clustered near 1:
// inverse scaling by square roots, then the alternating series.
Matrix log_near_identity(Matrix s) {
  const Index n = s.rows();
  int r = 0;
  while (norm1(s - eye(n)) > 0.35 && r < 60) {
    s = sqrt_tri(s);
    ++r;
  }
  Matrix k = s - eye(n);
  Matrix term = k, sum = k;
  for (int j = 2; j <= 80; ++j) {
    term = term * k;
    sum += term * (((j % 2) ? 1.0 : -1.0) / double(j));
    if (norm1(term) <= 1e-18 * std::max(1.0, norm1(sum))) break;
  }
  return std::pow(2.0, r) * sum;
}

}  // namespace

Complex BranchSection::value(Complex mu) const {
  if (mu == Complex(0, 0))
    throw std::invalid_argument("branch section undefined at 0");
  // Tolerate rounding right below the lower strip edge; otherwise an input
  // meant to land on the edge (e.g. mu near 1 with anchor 0) flips a full
  // period to the far side of the strip.
  const double slack = 1e-9;
  Complex lam = Complex(0, 1) / (2.0 * kPi) * std::log(mu);
  double shift = std::ceil(anchor - lam.real() - slack);
  return lam + shift;
}

Matrix apply_entire(const Matrix& a, EntireKind kind) {
  if (a.rows() != a.cols()) throw std::invalid_argument("square matrix required");
  const Index n = a.rows();
  if (n == 0) return a;
  if (n <= 2) return atomic_entire(a, kind);
  Schur sc = schur_of(a);
  std::vector<int> keys = cluster_diagonal(
      sc.t, [](Complex x, Complex y) { return std::abs(x - y) <= 0.2; });
  sort_by_keys(sc.t, sc.u, keys);
  BlockLayout lay = layout_from_sorted_keys(keys);
  Matrix f = block_recurrence(
      sc.t, lay, [&](const Matrix& blk, int) { return atomic_entire(blk, kind); });
  return sc.u * f * sc.u.adjoint();
}

SpectralSplit spectral_split(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) throw std::invalid_argument("square matrix required");
  const Index n = a.rows();
  SpectralSplit out;
  if (n == 0) return out;
  Schur sc = schur_of(a);
  std::vector<int> assign = cluster_diagonal(
      sc.t, [&](Complex x, Complex y) { return std::abs(x - y) < tol; });
  int nc = *std::max_element(assign.begin(), assign.end()) + 1;

  std::vector<Complex> centers(nc, Complex(0, 0));
  std::vector<int> mult(nc, 0);
  for (Index i = 0; i < n; ++i) {
    centers[assign[i]] += sc.t(i, i);
    mult[assign[i]] += 1;
  }
  for (int c = 0; c < nc; ++c) centers[c] /= double(mult[c]);

  out.min_gap = std::numeric_limits<double>::infinity();
  for (int c = 0; c < nc; ++c)
    for (int d = c + 1; d < nc; ++d)
      out.min_gap = std::min(out.min_gap, std::abs(centers[c] - centers[d]));
  out.ambiguous = nc > 1 && out.min_gap < 10.0 * tol;

  for (int c = 0; c < nc; ++c) {
    // Bring cluster c to the front on a fresh copy, then read the invariant
    // subspace and the spectral projector from the leading block split.
    Matrix t = sc.t, u = sc.u;
    std::vector<int> keys(n);
    for (Index i = 0; i < n; ++i) keys[i] = (assign[i] == c) ? 0 : 1;
    sort_by_keys(t, u, keys);
    Index m = mult[c];
    SpectralCluster cl;
    cl.center = centers[c];
    cl.multiplicity = int(m);
    cl.basis = u.leftCols(m);
    if (m == n) {
      cl.projector = eye(n);
    } else {
      Matrix t11 = t.topLeftCorner(m, m);
      Matrix t22 = t.bottomRightCorner(n - m, n - m);
      Matrix t12 = t.topRightCorner(m, n - m);
      Matrix y = sylvester_tri(t11, t22, t12);
      Matrix p = Matrix::Zero(n, n);
      p.topLeftCorner(m, m) = eye(m);
      p.topRightCorner(m, n - m) = y;
      cl.projector = u * p * u.adjoint();
    }
    out.clusters.push_back(std::move(cl));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const SpectralCluster& x, const SpectralCluster& y) {
              if (x.center.real() != y.center.real())
                return x.center.real() < y.center.real();
              return x.center.imag() < y.center.imag();
            });
  return out;
}

ResonanceReport resonance_report(const Matrix& a, double tol) {
  SpectralSplit split = spectral_split(a, tol);
  ResonanceReport rep;
  for (size_t i = 0; i < split.clusters.size(); ++i) {
    for (size_t j = 0; j < split.clusters.size(); ++j) {
      if (i == j) continue;
      Complex diff = split.clusters[i].center - split.clusters[j].center;
      double k = std::round(diff.real());
      if (k >= 1.0 && std::abs(diff - Complex(k, 0)) <= tol) {
        rep.pairs.push_back({split.clusters[i].center, split.clusters[j].center,
                             int(k), split.clusters[i].multiplicity,
                             split.clusters[j].multiplicity});
      }
    }
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(),
            [](const ResonantPair& x, const ResonantPair& y) {
              if (x.k != y.k) return x.k < y.k;
              if (x.hi.real() != y.hi.real()) return x.hi.real() < y.hi.real();
              return x.hi.imag() < y.hi.imag();
            });
  return rep;
}

Matrix branch_log(const Matrix& m, const BranchSection& section, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("square matrix required");
  const Index n = m.rows();
  if (n == 0) return m;
  const double zero_floor = std::max(tol, 1e-12) * tol_scale(m);
  Schur sc = schur_of(m);
  for (Index i = 0; i < n; ++i)
    if (std::abs(sc.t(i, i)) < zero_floor)
      throw std::invalid_argument("branch_log: eigenvalue too close to 0");
  // Merge conservatively and tighter near 0, where the logarithm varies fast.
  std::vector<int> keys = cluster_diagonal(sc.t, [](Complex x, Complex y) {
    double r = std::min(std::abs(x), std::abs(y));
    return std::abs(x - y) <= std::min(0.2, 0.25 * r);
  });
  sort_by_keys(sc.t, sc.u, keys);
  BlockLayout lay = layout_from_sorted_keys(keys);
  Matrix f = block_recurrence(sc.t, lay, [&](const Matrix& blk, int) {
    Index nb = blk.rows();
    Complex mu = blk.trace() / double(nb);
    Complex sigma = section.value(mu);
    Matrix rel = blk / mu;  // eigenvalues near 1
    Matrix w = log_near_identity(rel);
    return Matrix(sigma * eye(nb) + Complex(0, 1) / (2.0 * kPi) * w);
  });
  return sc.u * f * sc.u.adjoint();
}

Matrix sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || c.rows() != a.rows() ||
      c.cols() != b.rows())
    throw std::invalid_argument("sylvester: shape mismatch");
  if (a.rows() == 0 || b.rows() == 0) return Matrix::Zero(a.rows(), b.rows());
  Schur sa = schur_of(a), sb = schur_of(b);
  double scale = std::max(tol_scale(a), tol_scale(b));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      if (std::abs(sa.t(i, i) - sb.t(j, j)) < 1e-12 * scale)
        throw std::invalid_argument("sylvester: spectra of a and b overlap");
  Matrix y = sylvester_tri(sa.t, sb.t, sa.u.adjoint() * c * sb.u);
  return sa.u * y * sb.u.adjoint();
}

}  // namespace rhkit
