#include "gle/matops.hpp"

#include <omp.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "gle/errors.hpp"

namespace gle {

namespace {

using CMatrix = Eigen::MatrixXcd;

bool all_finite(const Matrix& m) { return m.allFinite(); }

double norm1(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade coefficients and 1-norm thresholds for degrees 3, 5, 7, 9, 13.
constexpr double kTheta[] = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                             2.097847961257068e0, 5.371920351148152e0};

const std::vector<double>& pade_coefficients(int degree) {
  static const std::vector<double> c3 = {120., 60., 12., 1.};
  static const std::vector<double> c5 = {30240., 15120., 3360., 420., 30., 1.};
  static const std::vector<double> c7 = {17297280., 8648640., 1995840., 277200.,
                                         25200.,    1512.,    56.,      1.};
  static const std::vector<double> c9 = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                         2162160.,     110880.,     3960.,       90.,        1.};
  static const std::vector<double> c13 = {
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800., 129060195264000.,
      10559470521600.,    670442572800.,      33522128640.,      1323241920.,      40840800.,
      960960.,            16380.,             182.,              1.};
  switch (degree) {
    case 3: return c3;
    case 5: return c5;
    case 7: return c7;
    case 9: return c9;
    default: return c13;
  }
}

Matrix pade_approximant(const Matrix& a, int degree) {
  const auto n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const auto& b = pade_coefficients(degree);
  Matrix u, v;
  if (degree < 13) {
    const Matrix a2 = a * a;
    Matrix power = id;
    Matrix uacc = Matrix::Zero(n, n);
    v = Matrix::Zero(n, n);
    for (int k = 0; k <= degree; k += 2) {
      v += b[k] * power;
      uacc += b[k + 1] * power;
      if (k + 2 <= degree) power = power * a2;
    }
    u = a * uacc;
  } else {
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  }
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("GLE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("expm: matrix is not square");
  if (!all_finite(m)) throw InvalidInput("expm: non-finite entry");
  const auto n = m.rows();
  if (n == 0) return m;

  const double nrm = norm1(m);
  constexpr int degrees[] = {3, 5, 7, 9};
  for (int i = 0; i < 4; ++i) {
    if (nrm <= kTheta[i]) return pade_approximant(m, degrees[i]);
  }
  int s = 0;
  if (nrm > kTheta[4]) s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta[4]))));
  Matrix r = pade_approximant(m / std::ldexp(1.0, s), 13);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) throw InvalidInput("sylvester: non-square coefficient");
  if (c.rows() != a.rows() || c.cols() != b.rows()) throw InvalidInput("sylvester: dimension mismatch");
  if (!all_finite(a) || !all_finite(b) || !all_finite(c)) throw InvalidInput("sylvester: non-finite entry");
  const auto n = a.rows();
  const auto p = b.rows();
  if (n == 0 || p == 0) return Matrix::Zero(n, p);

  Eigen::ComplexSchur<CMatrix> sa(a.cast<std::complex<double>>());
  Eigen::ComplexSchur<CMatrix> sb(b.cast<std::complex<double>>());
  const CMatrix& ua = sa.matrixU();
  const CMatrix& ta = sa.matrixT();
  const CMatrix& ub = sb.matrixU();
  const CMatrix& tb = sb.matrixT();

  CMatrix f = ua.adjoint() * c.cast<std::complex<double>>() * ub;
  CMatrix y = CMatrix::Zero(n, p);
  const double scale = std::max(norm1(a) + norm1(b), std::numeric_limits<double>::min());
  const double sep_floor = 1e-14 * scale;

  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXcd rhs = f.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * tb(k, j);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      std::complex<double> acc = rhs(i);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= ta(i, k) * y(k, j);
      const std::complex<double> d = ta(i, i) + tb(j, j);
      if (std::abs(d) <= sep_floor) {
        throw SingularMatrix("sylvester: operator is singular (eigenvalue sum " + std::to_string(std::abs(d)) +
                             ")");
      }
      y(i, j) = acc / d;
    }
  }
  return (ua * y * ub.adjoint()).real();
}

Matrix solve_lyapunov(const Matrix& b, const Matrix& c) {
  if (b.rows() != b.cols() || c.rows() != b.rows() || c.cols() != b.rows())
    throw InvalidInput("lyapunov: dimension mismatch");
  Matrix x = solve_sylvester(b, b.transpose(), c);
  if (asymmetry(c) <= 1e-12) x = 0.5 * (x + x.transpose()).eval();
  return x;
}

double min_sym_eigenvalue(const Matrix& s) {
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix factor_psd(const Matrix& s, double tol) {
  if (s.rows() != s.cols()) throw InvalidInput("factor_psd: matrix is not square");
  if (!all_finite(s)) throw InvalidInput("factor_psd: non-finite entry");
  const auto n = s.rows();
  if (n == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const Vector& lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  if (lam(0) < -tol * scale) {
    throw NotPositiveSemidefinite("factor_psd: eigenvalue " + std::to_string(lam(0)) + " below tolerance", lam(0));
  }
  const Vector root = lam.cwiseMax(0.0).cwiseSqrt();
  const Matrix m = root.asDiagonal() * es.eigenvectors().transpose();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) r.row(i) *= -1.0;
  }
  return r.transpose();
}

double spectral_abscissa(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("spectral_abscissa: matrix is not square");
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw InvalidInput("spectral_abscissa: eigenvalue iteration failed");
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Matrix& m) { return spectral_abscissa(m) < 0.0; }

double rcond(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  if (!all_finite(m)) return 0.0;
  const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  if (!(sv(0) > 0.0)) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

double asymmetry(const Matrix& s, double floor) {
  if (s.size() == 0) return 0.0;
  return (s - s.transpose()).norm() / std::max(s.norm(), floor);
}

QuadratureResult integrate_matrix_function(const std::function<Matrix(double)>& f, double horizon, double tol,
                                           std::optional<double> decay_rate, int max_intervals) {
  if (!(horizon > 0.0) || !(tol > 0.0)) throw InvalidInput("quadrature: horizon and tol must be positive");

  // 15-point Kronrod nodes on [0, 1] (symmetric); odd indices carry the 7-point Gauss rule.
  static constexpr double xk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.0};
  static constexpr double wk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  struct Panel {
    double a, b;
    Matrix value;
    double err;
  };
  auto rule = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const Matrix fc = f(c);
    Matrix k = wk[7] * fc;
    Matrix g = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
      const Matrix s = f(c - h * xk[i]) + f(c + h * xk[i]);
      k += wk[i] * s;
      if (i % 2 == 1) g += wg[i / 2] * s;
    }
    k *= h;
    g *= h;
    return Panel{a, b, k, (k - g).cwiseAbs().maxCoeff()};
  };
  auto worse = [](const Panel& x, const Panel& y) { return x.err < y.err; };

  double tail = 0.0;
  if (decay_rate) {
    if (!(*decay_rate > 0.0)) throw InvalidInput("quadrature: decay rate must be positive");
    tail = f(horizon).cwiseAbs().maxCoeff() / *decay_rate;
  }
  const double budget = 0.5 * tol;

  constexpr int initial_panels = 16;
  std::vector<Panel> heap;
  double total = 0.0;
  for (int i = 0; i < initial_panels; ++i) {
    const double a = horizon * i / initial_panels;
    const double b = (i + 1 == initial_panels) ? horizon : horizon * (i + 1) / initial_panels;
    heap.push_back(rule(a, b));
    total += heap.back().err;
  }
  std::make_heap(heap.begin(), heap.end(), worse);

  while (total > budget) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      throw QuadratureError("quadrature: subdivision budget exhausted");
    }
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel p = std::move(heap.back());
    heap.pop_back();
    const double c = 0.5 * (p.a + p.b);
    if (c <= p.a || c >= p.b) throw QuadratureError("quadrature: interval underflow");
    for (Panel q : {rule(p.a, c), rule(c, p.b)}) {
      total += q.err;
      heap.push_back(std::move(q));
      std::push_heap(heap.begin(), heap.end(), worse);
    }
    total -= p.err;
  }

  QuadratureResult out;
  out.value = Matrix::Zero(heap.front().value.rows(), heap.front().value.cols());
  for (const Panel& p : heap) out.value += p.value;
  out.intervals = static_cast<int>(heap.size());
  out.error_estimate = std::max(total, 0.0) + tail;
  if (out.error_estimate > tol) {
    throw QuadratureError("quadrature: error estimate " + std::to_string(out.error_estimate) +
                          " exceeds tolerance (tail " + std::to_string(tail) + ")");
  }
  return out;
}

}  // namespace gle
