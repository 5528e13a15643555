#include "kfplab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kfplab/errors.hpp"

namespace kfplab {

namespace {

void check_alpha(const MultiIndex& alpha, int dim) {
  if (static_cast<int>(alpha.size()) != dim) {
    throw InputError("multi-index has length " + std::to_string(alpha.size()) +
                     ", polynomial dimension is " + std::to_string(dim));
  }
  for (int a : alpha) {
    if (a < 0) throw InputError("multi-index entries must be nonnegative");
  }
}

// beta!/(beta-alpha)! as an exact integer product, 0 unless beta >= alpha.
double falling_factorial(const MultiIndex& beta, const MultiIndex& alpha) {
  double f = 1.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] < alpha[i]) return 0.0;
    std::int64_t prod = 1;
    for (int k = 0; k < alpha[i]; ++k) prod *= beta[i] - k;
    f *= static_cast<double>(prod);
  }
  return f;
}

double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

void collect(int dim, int n, int axis, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (axis == dim - 1) {
    cur[axis] = n;
    out.push_back(cur);
    return;
  }
  for (int k = n; k >= 0; --k) {
    cur[axis] = k;
    collect(dim, n - k, axis + 1, cur, out);
  }
}

}  // namespace

int order(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

double factorial(const MultiIndex& alpha) {
  double f = 1.0;
  for (int a : alpha) {
    for (int k = 2; k <= a; ++k) f *= k;
  }
  return f;
}

std::vector<MultiIndex> multi_indices_of_order(int dim, int n) {
  if (dim < 1) throw InputError("dimension must be positive");
  std::vector<MultiIndex> out;
  if (n < 0) return out;
  MultiIndex cur(dim, 0);
  collect(dim, n, 0, cur, out);
  return out;
}

Polynomial::Polynomial(int dim) : dim_(dim) {
  if (dim < 1) throw InputError("polynomial dimension must be >= 1");
}

Polynomial::Polynomial(int dim, Terms terms) : dim_(dim), terms_(std::move(terms)) {
  if (dim < 1) throw InputError("polynomial dimension must be >= 1");
  for (const auto& [alpha, c] : terms_) {
    check_alpha(alpha, dim_);
    if (!std::isfinite(c)) throw InputError("polynomial coefficients must be finite");
  }
  normalize();
}

void Polynomial::normalize() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
  degree_ = 0;
  for (const auto& [alpha, c] : terms_) degree_ = std::max(degree_, order(alpha));
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::operator()(std::span<const double> q) const {
  if (static_cast<int>(q.size()) != dim_) {
    throw InputError("point has length " + std::to_string(q.size()) +
                     ", polynomial dimension is " + std::to_string(dim_));
  }
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) {
    double t = c;
    for (int i = 0; i < dim_; ++i) t *= ipow(q[i], alpha[i]);
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::derivative(const MultiIndex& alpha) const {
  check_alpha(alpha, dim_);
  Terms out;
  for (const auto& [beta, c] : terms_) {
    const double f = falling_factorial(beta, alpha);
    if (f == 0.0) continue;
    MultiIndex rest(dim_);
    for (int i = 0; i < dim_; ++i) rest[i] = beta[i] - alpha[i];
    out[rest] += c * f;
  }
  return Polynomial(dim_, std::move(out));
}

double Polynomial::derivative_at(const MultiIndex& alpha, std::span<const double> q) const {
  check_alpha(alpha, dim_);
  if (static_cast<int>(q.size()) != dim_) {
    throw InputError("point has length " + std::to_string(q.size()) +
                     ", polynomial dimension is " + std::to_string(dim_));
  }
  if (order(alpha) > degree_) return 0.0;
  double sum = 0.0;
  for (const auto& [beta, c] : terms_) {
    const double f = falling_factorial(beta, alpha);
    if (f == 0.0) continue;
    double t = c * f;
    for (int i = 0; i < dim_; ++i) t *= ipow(q[i], beta[i] - alpha[i]);
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (other.dim_ != dim_) throw InputError("dimension mismatch in polynomial sum");
  Terms t = terms_;
  for (const auto& [alpha, c] : other.terms_) t[alpha] += c;
  return Polynomial(dim_, std::move(t));
}

Polynomial Polynomial::operator-(const Polynomial& other) const { return *this + other * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (other.dim_ != dim_) throw InputError("dimension mismatch in polynomial product");
  Terms t;
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) {
      MultiIndex s(dim_);
      for (int i = 0; i < dim_; ++i) s[i] = a[i] + b[i];
      t[s] += ca * cb;
    }
  }
  return Polynomial(dim_, std::move(t));
}

Polynomial Polynomial::operator*(double s) const {
  Terms t = terms_;
  for (auto& [alpha, c] : t) c *= s;
  return Polynomial(dim_, std::move(t));
}

Polynomial operator*(double s, const Polynomial& p) { return p * s; }

Polynomial Polynomial::shifted(std::span<const double> base) const {
  if (static_cast<int>(base.size()) != dim_) throw InputError("shift has wrong dimension");
  // Q(x) = sum_gamma d^gamma P(base) / gamma! x^gamma
  Terms t;
  for (int n = 0; n <= degree_; ++n) {
    for (const auto& gamma : multi_indices_of_order(dim_, n)) {
      const double v = derivative_at(gamma, base);
      if (v != 0.0) t[gamma] = v / factorial(gamma);
    }
  }
  return Polynomial(dim_, std::move(t));
}

Polynomial Polynomial::monomial(int dim, MultiIndex alpha, double c) {
  return Polynomial(dim, Terms{{std::move(alpha), c}});
}

Polynomial Polynomial::variable(int dim, int axis) {
  MultiIndex a(dim, 0);
  a.at(axis) = 1;
  return monomial(dim, a, 1.0);
}

Polynomial Polynomial::constant(int dim, double c) { return monomial(dim, MultiIndex(dim, 0), c); }

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  // highest degree first reads more naturally
  std::vector<std::pair<MultiIndex, double>> sorted(terms_.begin(), terms_.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return order(a.first) > order(b.first); });
  for (const auto& [alpha, c] : sorted) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    const double m = std::abs(c);
    const bool bare = order(alpha) > 0 && m == 1.0;
    if (!bare) os << m;
    bool need_mul = !bare;
    for (int i = 0; i < dim_; ++i) {
      if (alpha[i] == 0) continue;
      if (need_mul) os << "*";
      os << "q" << (i + 1);
      if (alpha[i] > 1) os << "^" << alpha[i];
      need_mul = true;
    }
  }
  return os.str();
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [alpha, c] : terms_) terms.push_back({{"alpha", alpha}, {"c", c}});
  return {{"d", dim_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("polynomial JSON must be an object");
  if (!j.contains("d") || !j["d"].is_number_integer()) {
    throw InputError("polynomial JSON needs integer field \"d\"");
  }
  const int dim = j["d"].get<int>();
  if (dim < 1) throw InputError("polynomial dimension must be >= 1");
  if (!j.contains("terms") || !j["terms"].is_array()) {
    throw InputError("polynomial JSON needs array field \"terms\"");
  }
  Terms terms;
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("alpha") || !t.contains("c") || !t["alpha"].is_array() ||
        !t["c"].is_number()) {
      throw InputError("each term needs \"alpha\" (array) and \"c\" (number)");
    }
    MultiIndex alpha;
    for (const auto& a : t["alpha"]) {
      if (!a.is_number_integer()) throw InputError("alpha entries must be integers");
      alpha.push_back(a.get<int>());
    }
    check_alpha(alpha, dim);
    terms[alpha] += t["c"].get<double>();
  }
  return Polynomial(dim, std::move(terms));
}

double eval_derivative(const Polynomial& poly, const MultiIndex& alpha, std::span<const double> q) {
  return poly.derivative_at(alpha, q);
}

Polynomial parse_polynomial(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError("malformed polynomial JSON at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
  return Polynomial::from_json(j);
}

Polynomial load_polynomial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_polynomial(ss.str());
}

}  // namespace kfplab
