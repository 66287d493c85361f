#include "spectral_corner/field.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "spectral_corner/error.hpp"

namespace spectral {

enum class Op { kConst, kX, kY, kAdd, kSub, kMul, kDiv, kPow, kNeg, kFunc };
enum class Func { kSin, kCos, kTan, kExp, kLog, kSqrt, kSinh, kCosh, kTanh, kAbs };

struct Expression::Node {
  Op op = Op::kConst;
  double value = 0.0;
  Func func = Func::kSin;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

NodePtr make_var(Op op) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::kConst && n->value == v; }

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  // Light constant folding keeps derivative trees small.
  if (a->op == Op::kConst && b->op == Op::kConst) {
    switch (op) {
      case Op::kAdd: return make_const(a->value + b->value);
      case Op::kSub: return make_const(a->value - b->value);
      case Op::kMul: return make_const(a->value * b->value);
      case Op::kDiv: return make_const(a->value / b->value);
      case Op::kPow: return make_const(std::pow(a->value, b->value));
      default: break;
    }
  }
  switch (op) {
    case Op::kAdd:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::kSub:
      if (is_const(b, 0.0)) return a;
      break;
    case Op::kMul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::kDiv:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::kPow:
      if (is_const(b, 1.0)) return a;
      if (is_const(b, 0.0)) return make_const(1.0);
      break;
    default: break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  if (a->op == Op::kConst) return make_const(-a->value);
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::kNeg;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_func(Func f, NodePtr a) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::kFunc;
  n->func = f;
  n->lhs = std::move(a);
  if (n->lhs->op == Op::kConst) {
    // fold through evaluation below
  }
  return n;
}

double apply(Func f, double v) {
  switch (f) {
    case Func::kSin: return std::sin(v);
    case Func::kCos: return std::cos(v);
    case Func::kTan: return std::tan(v);
    case Func::kExp: return std::exp(v);
    case Func::kLog: return std::log(v);
    case Func::kSqrt: return std::sqrt(v);
    case Func::kSinh: return std::sinh(v);
    case Func::kCosh: return std::cosh(v);
    case Func::kTanh: return std::tanh(v);
    case Func::kAbs: return std::abs(v);
  }
  return 0.0;
}

const char* func_name(Func f) {
  switch (f) {
    case Func::kSin: return "sin";
    case Func::kCos: return "cos";
    case Func::kTan: return "tan";
    case Func::kExp: return "exp";
    case Func::kLog: return "log";
    case Func::kSqrt: return "sqrt";
    case Func::kSinh: return "sinh";
    case Func::kCosh: return "cosh";
    case Func::kTanh: return "tanh";
    case Func::kAbs: return "abs";
  }
  return "?";
}

double eval(const Expression::Node& n, double x, double y) {
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kX: return x;
    case Op::kY: return y;
    case Op::kAdd: return eval(*n.lhs, x, y) + eval(*n.rhs, x, y);
    case Op::kSub: return eval(*n.lhs, x, y) - eval(*n.rhs, x, y);
    case Op::kMul: return eval(*n.lhs, x, y) * eval(*n.rhs, x, y);
    case Op::kDiv: return eval(*n.lhs, x, y) / eval(*n.rhs, x, y);
    case Op::kPow: {
      const double e = eval(*n.rhs, x, y);
      const double b = eval(*n.lhs, x, y);
      if (e == 2.0) return b * b;
      return std::pow(b, e);
    }
    case Op::kNeg: return -eval(*n.lhs, x, y);
    case Op::kFunc: return apply(n.func, eval(*n.lhs, x, y));
  }
  return 0.0;
}

bool depends_on_xy(const Expression::Node& n) {
  switch (n.op) {
    case Op::kConst: return false;
    case Op::kX:
    case Op::kY: return true;
    default:
      return (n.lhs && depends_on_xy(*n.lhs)) || (n.rhs && depends_on_xy(*n.rhs));
  }
}

NodePtr differentiate(const NodePtr& n, Op var) {
  switch (n->op) {
    case Op::kConst: return make_const(0.0);
    case Op::kX:
    case Op::kY: return make_const(n->op == var ? 1.0 : 0.0);
    case Op::kAdd:
      return make_binary(Op::kAdd, differentiate(n->lhs, var), differentiate(n->rhs, var));
    case Op::kSub:
      return make_binary(Op::kSub, differentiate(n->lhs, var), differentiate(n->rhs, var));
    case Op::kNeg: return make_neg(differentiate(n->lhs, var));
    case Op::kMul:
      return make_binary(Op::kAdd, make_binary(Op::kMul, differentiate(n->lhs, var), n->rhs),
                         make_binary(Op::kMul, n->lhs, differentiate(n->rhs, var)));
    case Op::kDiv: {
      auto num = make_binary(Op::kSub, make_binary(Op::kMul, differentiate(n->lhs, var), n->rhs),
                             make_binary(Op::kMul, n->lhs, differentiate(n->rhs, var)));
      return make_binary(Op::kDiv, num, make_binary(Op::kPow, n->rhs, make_const(2.0)));
    }
    case Op::kPow: {
      const auto& base = n->lhs;
      const auto& expo = n->rhs;
      if (!depends_on_xy(*expo)) {
        auto reduced = make_binary(Op::kSub, expo, make_const(1.0));
        return make_binary(Op::kMul, make_binary(Op::kMul, expo, make_binary(Op::kPow, base, reduced)),
                           differentiate(base, var));
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      auto inner = make_binary(
          Op::kAdd, make_binary(Op::kMul, differentiate(expo, var), make_func(Func::kLog, base)),
          make_binary(Op::kDiv, make_binary(Op::kMul, expo, differentiate(base, var)), base));
      return make_binary(Op::kMul, n, inner);
    }
    case Op::kFunc: {
      const auto& a = n->lhs;
      auto da = differentiate(a, var);
      if (is_const(da, 0.0)) return make_const(0.0);
      NodePtr outer;
      switch (n->func) {
        case Func::kSin: outer = make_func(Func::kCos, a); break;
        case Func::kCos: outer = make_neg(make_func(Func::kSin, a)); break;
        case Func::kTan:
          outer = make_binary(Op::kDiv, make_const(1.0),
                              make_binary(Op::kPow, make_func(Func::kCos, a), make_const(2.0)));
          break;
        case Func::kExp: outer = n; break;
        case Func::kLog: outer = make_binary(Op::kDiv, make_const(1.0), a); break;
        case Func::kSqrt:
          outer = make_binary(Op::kDiv, make_const(0.5), n);
          break;
        case Func::kSinh: outer = make_func(Func::kCosh, a); break;
        case Func::kCosh: outer = make_func(Func::kSinh, a); break;
        case Func::kTanh:
          outer = make_binary(Op::kSub, make_const(1.0), make_binary(Op::kPow, n, make_const(2.0)));
          break;
        case Func::kAbs:
          throw InvalidInput("field.derivative",
                             "abs() has no derivative; supply a smooth expression");
      }
      return make_binary(Op::kMul, outer, da);
    }
  }
  return make_const(0.0);
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void print(const Expression::Node& n, std::ostringstream& out) {
  switch (n.op) {
    case Op::kConst: out << shortest(n.value); return;
    case Op::kX: out << 'x'; return;
    case Op::kY: out << 'y'; return;
    case Op::kNeg: out << "(-"; print(*n.lhs, out); out << ')'; return;
    case Op::kFunc: out << func_name(n.func) << '('; print(*n.lhs, out); out << ')'; return;
    default: break;
  }
  const char sym = n.op == Op::kAdd ? '+' : n.op == Op::kSub ? '-' : n.op == Op::kMul ? '*'
                                         : n.op == Op::kDiv ? '/' : '^';
  out << '(';
  print(*n.lhs, out);
  out << sym;
  print(*n.rhs, out);
  out << ')';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    std::ostringstream msg;
    msg << "cannot parse expression '" << text_ << "' at offset " << pos_ << ": " << why;
    throw InvalidInput("field.parse", msg.str());
  }
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_binary(Op::kAdd, lhs, term());
      else if (accept('-')) lhs = make_binary(Op::kSub, lhs, term());
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_binary(Op::kMul, lhs, unary());
      else if (accept('/')) lhs = make_binary(Op::kDiv, lhs, unary());
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make_neg(unary());
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make_binary(Op::kPow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('(')) {
      auto e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(std::string(text_.substr(pos_)), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      if (name == "x") return make_var(Op::kX);
      if (name == "y") return make_var(Op::kY);
      if (name == "pi") return make_const(std::numbers::pi);
      if (name == "e") return make_const(std::numbers::e);
      static const std::pair<const char*, Func> kFuncs[] = {
          {"sin", Func::kSin},   {"cos", Func::kCos},   {"tan", Func::kTan},
          {"exp", Func::kExp},   {"log", Func::kLog},   {"sqrt", Func::kSqrt},
          {"sinh", Func::kSinh}, {"cosh", Func::kCosh}, {"tanh", Func::kTanh},
          {"abs", Func::kAbs}};
      for (const auto& [fname, f] : kFuncs) {
        if (name == fname) {
          if (!accept('(')) fail("expected '(' after " + name);
          auto arg = expr();
          if (!accept(')')) fail("missing ')'");
          if (arg->op == Op::kConst) return make_const(apply(f, arg->value));
          return make_func(f, arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(make_const(0.0)) {}

Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse()); }
Expression Expression::constant(double value) { return Expression(make_const(value)); }
Expression Expression::variable(char name) {
  if (name == 'x') return Expression(make_var(Op::kX));
  if (name == 'y') return Expression(make_var(Op::kY));
  throw InvalidInput("field.variable", std::string("unknown variable ") + name);
}

double Expression::evaluate(double x, double y) const { return eval(*root_, x, y); }

Expression Expression::derivative(char variable) const {
  if (variable != 'x' && variable != 'y') {
    throw InvalidInput("field.derivative", std::string("unknown variable ") + variable);
  }
  return Expression(differentiate(root_, variable == 'x' ? Op::kX : Op::kY));
}

bool Expression::is_constant() const { return !depends_on_xy(*root_); }

std::string Expression::to_string() const {
  std::ostringstream out;
  print(*root_, out);
  return out.str();
}

// ---------------------------------------------------------------------------

class ScalarField::Impl {
 public:
  virtual ~Impl() = default;
  virtual double value(const Point& p) const = 0;
  virtual Eigen::Vector2d gradient(const Point& p) const = 0;
  virtual double laplacian(const Point& p) const = 0;
  virtual bool is_constant() const = 0;
  virtual void require_derivatives() const = 0;
  virtual std::string description() const = 0;
};

namespace {

class ExpressionField final : public ScalarField::Impl {
 public:
  explicit ExpressionField(Expression e) : f_(std::move(e)) {
    try {
      fx_ = f_.derivative('x');
      fy_ = f_.derivative('y');
      fxx_ = fx_->derivative('x');
      fyy_ = fy_->derivative('y');
    } catch (const InvalidInput& err) {
      missing_ = err.what();
    }
  }
  double value(const Point& p) const override { return f_(p); }
  Eigen::Vector2d gradient(const Point& p) const override {
    if (!fx_ || !fy_) require_derivatives();
    return {(*fx_)(p), (*fy_)(p)};
  }
  double laplacian(const Point& p) const override {
    if (!fxx_ || !fyy_) require_derivatives();
    return (*fxx_)(p) + (*fyy_)(p);
  }
  bool is_constant() const override { return f_.is_constant(); }
  void require_derivatives() const override {
    if (!missing_.empty()) {
      throw InvalidInput("geometry.conformal_transform",
                         "field '" + f_.to_string() +
                             "' lacks the derivatives d/dx, d/dy, d2/dx2, d2/dy2: " + missing_);
    }
  }
  std::string description() const override { return f_.to_string(); }

 private:
  Expression f_;
  std::optional<Expression> fx_, fy_, fxx_, fyy_;
  std::string missing_;
};

// Fourth-order finite differences on a uniform grid, cubic Lagrange
// interpolation between nodes.
class GridField final : public ScalarField::Impl {
 public:
  GridField(Eigen::MatrixXd s, double x0, double y0, double dx, double dy)
      : f_(std::move(s)), x0_(x0), y0_(y0), dx_(dx), dy_(dy) {
    if (f_.rows() < 4 || f_.cols() < 4 || !(dx_ > 0) || !(dy_ > 0)) {
      throw InvalidInput("field.grid", "grid field needs at least 4x4 samples and positive spacing");
    }
    if (f_.rows() >= 6 && f_.cols() >= 6) {
      fx_ = first_x(f_) / dx_;
      fy_ = first_x(f_.transpose()).transpose() / dy_;
      fxx_ = second_x(f_) / (dx_ * dx_);
      fyy_ = second_x(f_.transpose()).transpose() / (dy_ * dy_);
    }
  }
  double value(const Point& p) const override { return interpolate(f_, p); }
  Eigen::Vector2d gradient(const Point& p) const override {
    require_derivatives();
    return {interpolate(fx_, p), interpolate(fy_, p)};
  }
  double laplacian(const Point& p) const override {
    require_derivatives();
    return interpolate(fxx_, p) + interpolate(fyy_, p);
  }
  bool is_constant() const override {
    return (f_.array() == f_(0, 0)).all();
  }
  void require_derivatives() const override {
    if (fxx_.size() == 0) {
      throw InvalidInput("geometry.conformal_transform",
                         "grid field needs >= 6 nodes per direction to form d2/dx2 and d2/dy2 "
                         "with fourth-order differences");
    }
  }
  std::string description() const override {
    std::ostringstream out;
    out << "grid(" << f_.rows() << "x" << f_.cols() << ")";
    return out.str();
  }

 private:
  // Differences along the first index.
  static Eigen::MatrixXd first_x(const Eigen::MatrixXd& f) {
    const Eigen::Index n = f.rows();
    Eigen::MatrixXd d(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i >= 2 && i + 2 < n) {
        d.row(i) = (-f.row(i + 2) + 8 * f.row(i + 1) - 8 * f.row(i - 1) + f.row(i - 2)) / 12.0;
      } else if (i == 0) {
        d.row(i) = (-25 * f.row(0) + 48 * f.row(1) - 36 * f.row(2) + 16 * f.row(3) - 3 * f.row(4)) / 12.0;
      } else if (i == 1) {
        d.row(i) = (-3 * f.row(0) - 10 * f.row(1) + 18 * f.row(2) - 6 * f.row(3) + f.row(4)) / 12.0;
      } else if (i == n - 2) {
        d.row(i) = -(-3 * f.row(n - 1) - 10 * f.row(n - 2) + 18 * f.row(n - 3) - 6 * f.row(n - 4) +
                     f.row(n - 5)) / 12.0;
      } else {
        d.row(i) = -(-25 * f.row(n - 1) + 48 * f.row(n - 2) - 36 * f.row(n - 3) + 16 * f.row(n - 4) -
                     3 * f.row(n - 5)) / 12.0;
      }
    }
    return d;
  }
  static Eigen::MatrixXd second_x(const Eigen::MatrixXd& f) {
    const Eigen::Index n = f.rows();
    Eigen::MatrixXd d(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i >= 2 && i + 2 < n) {
        d.row(i) = (-f.row(i + 2) + 16 * f.row(i + 1) - 30 * f.row(i) + 16 * f.row(i - 1) - f.row(i - 2)) / 12.0;
      } else if (i == 0 || i == n - 1) {
        const int s = i == 0 ? 1 : -1;
        auto r = [&](int k) { return f.row(i + s * k); };
        d.row(i) = (45 * r(0) - 154 * r(1) + 214 * r(2) - 156 * r(3) + 61 * r(4) - 10 * r(5)) / 12.0;
      } else {
        const int s = i == 1 ? 1 : -1;
        auto r = [&](int k) { return f.row(i + s * k); };
        d.row(i) = (10 * r(-1) - 15 * r(0) - 4 * r(1) + 14 * r(2) - 6 * r(3) + r(4)) / 12.0;
      }
    }
    return d;
  }

  double interpolate(const Eigen::MatrixXd& g, const Point& p) const {
    const double u = (p.x() - x0_) / dx_;
    const double v = (p.y() - y0_) / dy_;
    const auto nx = static_cast<int>(g.rows()), ny = static_cast<int>(g.cols());
    const int i0 = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, nx - 4);
    const int j0 = std::clamp(static_cast<int>(std::floor(v)) - 1, 0, ny - 4);
    double wx[4], wy[4];
    lagrange(u - i0, wx);
    lagrange(v - j0, wy);
    double sum = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) sum += wx[a] * wy[b] * g(i0 + a, j0 + b);
    return sum;
  }
  static void lagrange(double s, double w[4]) {
    for (int a = 0; a < 4; ++a) {
      double prod = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) prod *= (s - b) / double(a - b);
      w[a] = prod;
    }
  }

  Eigen::MatrixXd f_, fx_, fy_, fxx_, fyy_;
  double x0_, y0_, dx_, dy_;
};

}  // namespace

ScalarField::ScalarField() : ScalarField(constant(0.0)) {}

ScalarField ScalarField::constant(double c) {
  return ScalarField(std::make_shared<ExpressionField>(Expression::constant(c)));
}
ScalarField ScalarField::parse(std::string_view text) {
  return from_expression(Expression::parse(text));
}
ScalarField ScalarField::from_expression(Expression e) {
  return ScalarField(std::make_shared<ExpressionField>(std::move(e)));
}
ScalarField ScalarField::from_grid(Eigen::MatrixXd samples, double x0, double y0, double dx,
                                   double dy) {
  return ScalarField(std::make_shared<GridField>(std::move(samples), x0, y0, dx, dy));
}

double ScalarField::value(const Point& p) const { return impl_->value(p); }
Eigen::Vector2d ScalarField::gradient(const Point& p) const { return impl_->gradient(p); }
double ScalarField::laplacian(const Point& p) const { return impl_->laplacian(p); }
bool ScalarField::is_constant() const { return impl_->is_constant(); }
double ScalarField::constant_value() const { return impl_->value(Point(0.0, 0.0)); }
void ScalarField::require_derivatives() const { impl_->require_derivatives(); }
std::string ScalarField::description() const { return impl_->description(); }

}  // namespace spectral
