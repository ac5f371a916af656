#include "finipost/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "finipost/error.hpp"
#include "quadrature.hpp"

namespace finipost {

std::string Space::describe() const {
  switch (kind) {
    case Kind::FiniteAlphabet: return "finite(" + std::to_string(dim) + ")";
    case Kind::RealLine: return "real";
    case Kind::Euclidean: return "euclidean(" + std::to_string(dim) + ")";
  }
  return "?";
}

std::size_t Point::label_index() const {
  if (!is_label()) throw Error("space-mismatch", "point is not a label");
  return std::get<Label>(value_).index;
}

double Point::scalar() const {
  if (!is_scalar()) throw Error("space-mismatch", "point is not a scalar");
  return std::get<double>(value_);
}

const std::vector<double>& Point::coords() const {
  if (!is_vector()) throw Error("space-mismatch", "point is not a vector");
  return std::get<std::vector<double>>(value_);
}

bool Point::fits(const Space& space) const {
  switch (space.kind) {
    case Space::Kind::FiniteAlphabet:
      return is_label() && label_index() < space.dim;
    case Space::Kind::RealLine:
      return is_scalar() && std::isfinite(scalar());
    case Space::Kind::Euclidean:
      return is_vector() && coords().size() == space.dim &&
             std::all_of(coords().begin(), coords().end(), [](double x) { return std::isfinite(x); });
  }
  return false;
}

double Point::norm() const {
  if (is_scalar()) return std::abs(scalar());
  if (is_vector()) {
    double s = 0.0;
    for (double x : coords()) s += x * x;
    return std::sqrt(s);
  }
  throw Error("space-mismatch", "labels have no norm");
}

double distance(const Point& a, const Point& b) {
  if (a.is_scalar() && b.is_scalar()) return std::abs(a.scalar() - b.scalar());
  if (a.is_vector() && b.is_vector()) {
    const auto& x = a.coords();
    const auto& y = b.coords();
    if (x.size() != y.size()) throw Error("space-mismatch", "dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
  }
  if (a.is_label() && b.is_label()) return a.label_index() == b.label_index() ? 0.0 : 1.0;
  throw Error("space-mismatch", "points of different kinds");
}

// ---------------------------------------------------------------------------

AtomicMeasure AtomicMeasure::from_atoms(Space space, std::vector<Atom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.weight) || a.weight < 0)
      throw Error("bad-weights", "weights must be finite and nonnegative");
    if (!a.point.fits(space))
      throw Error("space-mismatch", "atom does not belong to " + space.describe());
    total += a.weight;
  }
  if (atoms.empty() || std::abs(total - 1.0) > 1e-9)
    throw Error("bad-weights", "weights must sum to 1");

  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.point < y.point; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (auto& a : atoms) {
    if (a.weight == 0.0) continue;
    if (!merged.empty() && merged.back().point == a.point)
      merged.back().weight += a.weight;
    else
      merged.push_back(std::move(a));
  }
  if (total != 1.0)
    for (auto& a : merged) a.weight /= total;
  return AtomicMeasure(space, std::move(merged));
}

AtomicMeasure AtomicMeasure::dirac(Space space, Point at) {
  std::vector<Atom> atoms;
  atoms.push_back({std::move(at), 1.0});
  return from_atoms(space, std::move(atoms));
}

std::vector<double> AtomicMeasure::label_weights() const {
  if (space_.kind != Space::Kind::FiniteAlphabet)
    throw Error("space-mismatch", "label weights need a finite alphabet");
  std::vector<double> w(space_.dim, 0.0);
  for (const auto& a : atoms_) w[a.point.label_index()] = a.weight;
  return w;
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

// ---------------------------------------------------------------------------

Cdf Cdf::step(std::vector<Step> steps) {
  if (steps.empty()) throw Error("bad-cdf", "step CDF needs at least one step");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (!std::isfinite(s.threshold) || !(s.cumulative >= 0.0 && s.cumulative <= 1.0 + 1e-12))
      throw Error("bad-cdf", "invalid step");
    if (i > 0 && !(steps[i - 1].threshold < s.threshold))
      throw Error("bad-cdf", "thresholds must be strictly increasing");
    if (i > 0 && steps[i - 1].cumulative > s.cumulative)
      throw Error("bad-cdf", "cumulative values must be non-decreasing");
  }
  if (std::abs(steps.back().cumulative - 1.0) > 1e-12)
    throw Error("bad-cdf", "final cumulative value must be 1");
  steps.back().cumulative = 1.0;
  Cdf c;
  c.steps_ = std::move(steps);
  return c;
}

Cdf Cdf::analytic(BaseDistribution family) {
  Cdf c;
  c.family_ = family;
  return c;
}

double Cdf::operator()(double x) const {
  if (family_) return family_->cdf(x);
  auto it = std::upper_bound(steps_.begin(), steps_.end(), x,
                             [](double v, const Step& s) { return v < s.threshold; });
  if (it == steps_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

// ---------------------------------------------------------------------------

AtomicMeasure empirical(const Sample& sample) {
  if (sample.empty()) throw Error("empty-sample", "empirical measure of an empty sample");
  const double w = 1.0 / static_cast<double>(sample.size());
  std::vector<Point> pts = sample.values;
  std::sort(pts.begin(), pts.end());
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    while (j < pts.size() && pts[j] == pts[i]) ++j;
    atoms.push_back({pts[i], static_cast<double>(j - i) * w});
    i = j;
  }
  return AtomicMeasure::from_atoms(sample.space, std::move(atoms));
}

AtomicMeasure mixture(const AtomicMeasure& first, const AtomicMeasure& second, double w) {
  if (!(first.space() == second.space()))
    throw Error("space-mismatch", "mixture of measures on different spaces");
  if (!(w >= 0.0 && w <= 1.0)) throw Error("bad-weights", "mixture weight outside [0,1]");
  std::vector<Atom> atoms;
  atoms.reserve(first.size() + second.size());
  for (const auto& a : first.atoms()) atoms.push_back({a.point, w * a.weight});
  for (const auto& a : second.atoms()) atoms.push_back({a.point, (1.0 - w) * a.weight});
  return AtomicMeasure::from_atoms(first.space(), std::move(atoms));
}

double integrate(const AtomicMeasure& measure, const PointFunction& f) {
  double s = 0.0;
  for (const auto& a : measure.atoms()) {
    const double v = f(a.point);
    if (!std::isfinite(v)) throw Error("non-finite-integrand", "integrand is not finite at an atom");
    s += a.weight * v;
  }
  return s;
}

Cdf cdf_of(const AtomicMeasure& measure) {
  if (!measure.space().is_scalar()) throw Error("space-mismatch", "CDF needs a real-line measure");
  std::vector<Cdf::Step> steps;
  steps.reserve(measure.size());
  double cum = 0.0;
  for (const auto& a : measure.atoms()) {
    cum += a.weight;
    steps.push_back({a.point.scalar(), std::min(cum, 1.0)});
  }
  steps.back().cumulative = 1.0;
  return Cdf::step(std::move(steps));
}

namespace {

double sqrt_var(double F) { return std::sqrt(std::max(0.0, F * (1.0 - F))); }

double gk(const std::function<double(double)>& h, double a, double b, double tol) {
  return detail::adaptive_gk(h, a, b, tol);
}

}  // namespace

double l21_functional(const Cdf& cdf, double tol) {
  if (cdf.is_step()) {
    const auto& s = cdf.steps();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
      total += sqrt_var(s[i].cumulative) * (s[i + 1].threshold - s[i].threshold);
    return total;
  }
  const BaseDistribution& fam = cdf.family();
  auto h = [&](double t) { return std::sqrt(fam.cdf(t) * fam.survival(t)); };
  switch (fam.family()) {
    case BaseDistribution::Family::PointMass:
      return 0.0;
    case BaseDistribution::Family::Uniform:
      return gk(h, fam.first(), fam.second(), tol);
    default:
      break;
  }
  // Unbounded support: integrate the core, then doubling shells on both
  // sides until a shell contributes less than tol/8. Shells that keep
  // contributing past 2^48 scales mean the integral diverges.
  const double center = fam.quantile(0.5);
  const double scale = fam.second();
  double total = gk(h, center - scale, center + scale, tol / 4);
  double radius = scale;
  int quiet = 0;
  for (int shell = 0; shell < 48; ++shell) {
    const double part = gk(h, center - 2 * radius, center - radius, tol / 16) +
                        gk(h, center + radius, center + 2 * radius, tol / 16);
    total += part;
    radius *= 2;
    quiet = part < tol / 8 ? quiet + 1 : 0;
    if (quiet >= 2) return total;
  }
  throw Error("l21-divergent", "∫sqrt(F(1-F)) does not converge for " + fam.name());
}

double gini_md(const AtomicMeasure& measure) {
  if (!measure.space().is_scalar())
    throw Error("space-mismatch", "Gini mean difference needs a real-line measure");
  // Atoms are sorted: Σ_ij w_i w_j |x_i-x_j| = 2 Σ_j w_j (x_j W_<j - S_<j).
  double below_w = 0.0, below_s = 0.0, total = 0.0;
  for (const auto& a : measure.atoms()) {
    const double x = a.point.scalar();
    total += a.weight * (x * below_w - below_s);
    below_w += a.weight;
    below_s += a.weight * x;
  }
  return 2.0 * total;
}

double moment(const AtomicMeasure& measure, double order) {
  if (!(order > 0)) throw Error("bad-order", "moment order must be positive");
  if (measure.space().kind == Space::Kind::FiniteAlphabet)
    throw Error("space-mismatch", "moments need a real or Euclidean space");
  double s = 0.0;
  for (const auto& a : measure.atoms()) s += a.weight * std::pow(a.point.norm(), order);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error("bad-csv", "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error("bad-csv", "trailing characters in '" + s + "'");
  return v;
}

}  // namespace

void write_atoms_csv(std::ostream& out, const AtomicMeasure& measure) {
  const Space& sp = measure.space();
  out << "# space=" << sp.describe() << "\n";
  switch (sp.kind) {
    case Space::Kind::FiniteAlphabet: out << "label,weight\n"; break;
    case Space::Kind::RealLine: out << "point,weight\n"; break;
    case Space::Kind::Euclidean:
      for (std::size_t i = 1; i <= sp.dim; ++i) out << 'p' << i << ',';
      out << "weight\n";
      break;
  }
  for (const auto& a : measure.atoms()) {
    if (a.point.is_label())
      out << a.point.label_index();
    else if (a.point.is_scalar())
      out << fmt17(a.point.scalar());
    else
      for (std::size_t i = 0; i < a.point.coords().size(); ++i)
        out << (i ? "," : "") << fmt17(a.point.coords()[i]);
    out << ',' << fmt17(a.weight) << "\n";
  }
}

AtomicMeasure read_atoms_csv(std::istream& in) {
  std::string line;
  std::optional<std::size_t> declared_k;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    const auto pos = line.find("finite(");
    if (pos != std::string::npos) declared_k = std::stoul(line.substr(pos + 7));
  }
  if (line.empty()) throw Error("bad-csv", "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 2 || header.back() != "weight") throw Error("bad-csv", "bad header: " + line);

  enum { Labels, Scalars, Vectors } kind;
  if (header.size() == 2 && header[0] == "label")
    kind = Labels;
  else if (header.size() == 2 && header[0] == "point")
    kind = Scalars;
  else
    kind = Vectors;
  const std::size_t d = header.size() - 1;

  std::vector<Atom> atoms;
  std::size_t max_label = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw Error("bad-csv", "wrong column count: " + line);
    const double w = parse_double(cells.back());
    if (kind == Labels) {
      const auto idx = static_cast<std::size_t>(parse_double(cells[0]));
      max_label = std::max(max_label, idx);
      atoms.push_back({Point::label(idx), w});
    } else if (kind == Scalars) {
      atoms.push_back({Point::scalar(parse_double(cells[0])), w});
    } else {
      std::vector<double> x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = parse_double(cells[i]);
      atoms.push_back({Point::vector(std::move(x)), w});
    }
  }
  Space space = kind == Labels    ? Space::finite(declared_k.value_or(max_label + 1))
                : kind == Scalars ? Space::real_line()
                                  : Space::euclidean(d);
  return AtomicMeasure::from_atoms(space, std::move(atoms));
}

}  // namespace finipost
