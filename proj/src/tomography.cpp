#include "qfilm/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfilm/errors.hpp"

namespace qfilm {

using Vec9 = Eigen::Matrix<double, 9, 1>;

TomographyProtocol::TomographyProtocol(std::vector<SettingPair> settings) : settings_(std::move(settings)) {
  if (settings_.empty()) throw PreconditionError("protocol has no settings");
  for (const auto& s : settings_) {
    if (!std::isfinite(s.a.qwp_deg) || !std::isfinite(s.a.hwp_deg) || !std::isfinite(s.b.qwp_deg) ||
        !std::isfinite(s.b.hwp_deg)) {
      throw PreconditionError("non-finite wave-plate angle in protocol");
    }
  }
}

TomographyProtocol TomographyProtocol::from_names(
    const std::vector<std::pair<std::string, std::string>>& names) {
  std::vector<SettingPair> s;
  s.reserve(names.size());
  for (const auto& [a, b] : names) s.push_back({analyzer_for(a), analyzer_for(b), a + "," + b});
  return TomographyProtocol(std::move(s));
}

TomographyProtocol TomographyProtocol::default_nine() {
  return from_names({{"H", "H"}, {"H", "V"}, {"V", "V"}, {"D", "H"}, {"D", "V"}, {"D", "D"},
                     {"R", "H"}, {"R", "V"}, {"R", "D"}});
}

void validate(const CoincidenceRecord& r) {
  if (!(r.raw_coincidences >= 0.0)) throw PreconditionError("raw coincidences must be >= 0");
  if (!(r.duration_s > 0.0)) throw PreconditionError("record duration must be > 0");
}

CVec3 projector_vector(const PolarizationKet& a, const PolarizationKet& b) {
  return CVec3(kSqrt2 * a.h() * b.h(), a.h() * b.v() + a.v() * b.h(), kSqrt2 * a.v() * b.v());
}

CVec3 projector_vector(const SettingPair& s) {
  return projector_vector(analyzer_ket(s.a), analyzer_ket(s.b));
}

Vec9 hermitian_coordinates(const CMat3& m) {
  Vec9 x;
  x << m(0, 0).real(), m(1, 1).real(), m(2, 2).real(), m(0, 1).real(), m(0, 1).imag(), m(0, 2).real(),
      m(0, 2).imag(), m(1, 2).real(), m(1, 2).imag();
  return x;
}

CMat3 from_hermitian_coordinates(const Vec9& x) {
  CMat3 m;
  m(0, 0) = x(0);
  m(1, 1) = x(1);
  m(2, 2) = x(2);
  m(0, 1) = Complex(x(3), x(4));
  m(0, 2) = Complex(x(5), x(6));
  m(1, 2) = Complex(x(7), x(8));
  m(1, 0) = std::conj(m(0, 1));
  m(2, 0) = std::conj(m(0, 2));
  m(2, 1) = std::conj(m(1, 2));
  return m;
}

Vec9 measurement_row(const CVec3& w) {
  // <w|M|w> = sum_ij conj(w_i) M_ij w_j; off-diagonal pairs combine into
  // 2 Re(conj(w_i) w_j M_ij).
  Vec9 a;
  a(0) = std::norm(w(0));
  a(1) = std::norm(w(1));
  a(2) = std::norm(w(2));
  const auto off = [&](int i, int j, int k) {
    const Complex z = std::conj(w(i)) * w(j);
    a(k) = 2.0 * z.real();
    a(k + 1) = -2.0 * z.imag();
  };
  off(0, 1, 3);
  off(0, 2, 5);
  off(1, 2, 7);
  return a;
}

namespace {

Eigen::MatrixXd design_matrix(const TomographyProtocol& protocol) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(protocol.size()), 9);
  for (std::size_t m = 0; m < protocol.size(); ++m) {
    a.row(static_cast<Eigen::Index>(m)) = measurement_row(projector_vector(protocol.settings()[m])).transpose();
  }
  return a;
}

int numerical_rank(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double tol = 1e-10 * sv(0) * static_cast<double>(std::max(a.rows(), a.cols()));
  return static_cast<int>((sv.array() > tol).count());
}

}  // namespace

Completeness completeness_check(const TomographyProtocol& protocol) {
  const int rank = numerical_rank(design_matrix(protocol));
  return {rank == 9, rank};
}

std::vector<double> forward_rates(const QutritDensityMatrix& rho, const TomographyProtocol& protocol,
                                  double scale) {
  std::vector<double> out;
  out.reserve(protocol.size());
  for (const auto& s : protocol.settings()) {
    const CVec3 w = projector_vector(s);
    out.push_back(scale * w.dot(rho.matrix() * w).real());
  }
  return out;
}

CMat3 project_psd(const CMat3& m) {
  const CMat3 h = 0.5 * (m + m.adjoint());
  const double trace = h.trace().real();
  if (!(trace > 0.0) || !std::isfinite(trace)) throw SingularFit("cannot project a matrix with trace <= 0");
  Eigen::SelfAdjointEigenSolver<CMat3> es(h / trace);
  // Eigenvalues come back ascending. Clip from the bottom and spread the
  // removed (negative) mass evenly over the eigenvalues that remain; this is
  // the Frobenius-nearest unit-trace PSD matrix.
  Eigen::Vector3d ev = es.eigenvalues();
  double removed = 0.0;
  int lowest_kept = 0;
  while (lowest_kept < 3 && ev(lowest_kept) + removed / (3 - lowest_kept) < 0.0) {
    removed += ev(lowest_kept);
    ev(lowest_kept) = 0.0;
    ++lowest_kept;
  }
  if (lowest_kept == 3) throw SingularFit("no positive eigenvalue left after PSD projection");
  for (int i = lowest_kept; i < 3; ++i) ev(i) += removed / (3 - lowest_kept);
  ev /= ev.sum();
  CMat3 out = es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

Reconstruction reconstruct_from_rates(const std::vector<double>& rates, const TomographyProtocol& protocol) {
  if (rates.size() != protocol.size()) {
    throw PreconditionError("got " + std::to_string(rates.size()) + " rates for " +
                            std::to_string(protocol.size()) + " settings");
  }
  const Eigen::MatrixXd a = design_matrix(protocol);
  const int rank = numerical_rank(a);
  if (rank < 9) throw IncompleteProtocol("projector rank " + std::to_string(rank) + " < 9");

  // scale*M enters linearly: fit N = scale*M, then scale = tr N.
  const auto n = static_cast<Eigen::Index>(rates.size());
  Eigen::VectorXd r(n);
  for (Eigen::Index m = 0; m < n; ++m) r(m) = rates[static_cast<std::size_t>(m)];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 9) throw SingularFit("design matrix is rank deficient");
  const Vec9 x = qr.solve(r);

  const CMat3 scaled = from_hermitian_coordinates(x);
  const double scale = scaled.trace().real();
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw SingularFit("fitted rate scale " + std::to_string(scale) + " is not positive");
  }

  FitReport rep;
  rep.scale = scale;
  rep.unconstrained = scaled / scale;
  const Eigen::VectorXd fitted = a * x;
  rep.residuals.resize(rates.size());
  for (Eigen::Index m = 0; m < n; ++m) {
    rep.residuals[static_cast<std::size_t>(m)] = r(m) - fitted(m);
    rep.weighted_chi2 += std::pow(r(m) - fitted(m), 2) / std::max(std::abs(fitted(m)), 1.0);
  }
  Eigen::SelfAdjointEigenSolver<CMat3> es(0.5 * (rep.unconstrained + rep.unconstrained.adjoint()),
                                          Eigen::EigenvaluesOnly);
  for (int i = 0; i < 3; ++i) rep.negative_eigen_mass += std::max(0.0, -es.eigenvalues()(i));

  return {QutritDensityMatrix(project_psd(rep.unconstrained)), std::move(rep)};
}

Reconstruction reconstruct(const std::vector<CoincidenceRecord>& records, const TomographyProtocol& protocol) {
  if (!completeness_check(protocol).complete) throw IncompleteProtocol("protocol is not informationally complete");
  if (records.size() != protocol.size()) {
    throw PreconditionError("got " + std::to_string(records.size()) + " records for " +
                            std::to_string(protocol.size()) + " settings");
  }
  std::vector<double> rates(protocol.size(), 0.0);
  std::vector<bool> seen(protocol.size(), false);
  for (const auto& rec : records) {
    validate(rec);
    if (rec.setting_index >= protocol.size() || seen[rec.setting_index]) {
      throw PreconditionError("record setting index " + std::to_string(rec.setting_index) +
                              " is out of range or duplicated");
    }
    seen[rec.setting_index] = true;
    rates[rec.setting_index] = rec.net_rate();
  }
  return reconstruct_from_rates(rates, protocol);
}

FixedAnalyzer fixed_analyzer_from_name(const std::string& name) {
  if (name == "H") return FixedAnalyzer::H;
  if (name == "V") return FixedAnalyzer::V;
  if (name == "D") return FixedAnalyzer::D;
  if (name == "A") return FixedAnalyzer::A;
  throw PreconditionError("fixed analyzer must be one of H, V, D, A (got '" + name + "')");
}

PolarizationKet fixed_analyzer_ket(FixedAnalyzer b) {
  switch (b) {
    case FixedAnalyzer::H: return PolarizationKet::horizontal();
    case FixedAnalyzer::V: return PolarizationKet::vertical();
    case FixedAnalyzer::D: return PolarizationKet::diagonal();
    case FixedAnalyzer::A: return PolarizationKet::antidiagonal();
  }
  return PolarizationKet::horizontal();
}

double FringeFit::evaluate(double theta_deg) const {
  const double t = deg_to_rad(theta_deg);
  return offset + cos2 * std::cos(2 * t) + sin2 * std::sin(2 * t) + cos4 * std::cos(4 * t) +
         sin4 * std::sin(4 * t);
}

FringeScan fit_fringe(const std::vector<double>& theta_deg, const std::vector<double>& rates) {
  if (theta_deg.size() != rates.size() || theta_deg.empty()) {
    throw PreconditionError("fringe grid and rates must be the same non-empty length");
  }
  const auto [lo, hi] = std::minmax_element(theta_deg.begin(), theta_deg.end());
  if (*hi - *lo < 180.0 - 1e-9) throw PreconditionError("fringe grid must span at least 180 deg");

  const auto n = static_cast<Eigen::Index>(theta_deg.size());
  Eigen::MatrixXd a(n, 5);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = deg_to_rad(theta_deg[static_cast<std::size_t>(i)]);
    a.row(i) << 1.0, std::cos(2 * t), std::sin(2 * t), std::cos(4 * t), std::sin(4 * t);
    y(i) = rates[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 5) throw FitFailure("harmonic fringe fit is rank deficient (too few distinct angles)");
  const Eigen::VectorXd c = qr.solve(y);

  FringeScan out;
  out.theta_deg = theta_deg;
  out.rates = rates;
  out.fit = {c(0), c(1), c(2), c(3), c(4)};
  // The fitted curve has period 180 deg; a dense sample locates its extrema.
  double vmin = 1e300, vmax = -1e300;
  constexpr int kSamples = 36000;
  for (int i = 0; i < kSamples; ++i) {
    const double th = 180.0 * i / kSamples;
    const double v = out.fit.evaluate(th);
    if (v < vmin) { vmin = v; out.theta_min_deg = th; }
    if (v > vmax) { vmax = v; out.theta_max_deg = th; }
  }
  const double lo_v = std::max(vmin, 0.0);
  if (!(vmax > 0.0)) throw FitFailure("fitted fringe is not positive");
  out.visibility = (vmax - lo_v) / (vmax + lo_v);
  return out;
}

FringeScan fringe_scan(const QutritDensityMatrix& rho, FixedAnalyzer fixed_b,
                       const std::vector<double>& theta_grid_deg) {
  const PolarizationKet b = fixed_analyzer_ket(fixed_b);
  std::vector<double> rates;
  rates.reserve(theta_grid_deg.size());
  for (double th : theta_grid_deg) {
    const CVec3 w = projector_vector(PolarizationKet::linear(th), b);
    rates.push_back(w.dot(rho.matrix() * w).real());
  }
  return fit_fringe(theta_grid_deg, rates);
}

}  // namespace qfilm
