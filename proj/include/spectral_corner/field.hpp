#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace spectral {

using Point = Eigen::Vector2d;

/// Symbolic expression in the plane coordinates x and y.
///
/// Grammar: sums, products, quotients, powers (^), unary minus, numeric
/// literals, the constants pi and e, and the functions sin cos tan exp log
/// sqrt sinh cosh tanh abs. Derivatives are formed symbolically; abs has no
/// derivative and asking for one is an error.
class Expression {
 public:
  struct Node;

  Expression();
  static Expression parse(std::string_view text);
  static Expression constant(double value);
  static Expression variable(char name);

  double evaluate(double x, double y) const;
  double operator()(const Point& p) const { return evaluate(p.x(), p.y()); }

  /// d/dx or d/dy; throws InvalidInput("field.derivative", ...) if a
  /// subexpression is not differentiable.
  Expression derivative(char variable) const;

  bool is_constant() const;
  std::string to_string() const;

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

/// A scalar field with access to first and second derivatives. Backed either
/// by an expression tree (exact derivatives) or by grid samples with
/// fourth-order finite-difference derivatives and local bicubic Lagrange
/// interpolation.
class ScalarField {
 public:
  ScalarField();  // identically zero
  static ScalarField constant(double c);
  static ScalarField parse(std::string_view text);
  static ScalarField from_expression(Expression e);
  /// samples(i, j) is the value at (x0 + i*dx, y0 + j*dy); at least 6 nodes in
  /// each direction are needed for second derivatives.
  static ScalarField from_grid(Eigen::MatrixXd samples, double x0, double y0, double dx,
                               double dy);

  double value(const Point& p) const;
  double operator()(const Point& p) const { return value(p); }
  Eigen::Vector2d gradient(const Point& p) const;
  /// d2/dx2 + d2/dy2 (the analyst's sign).
  double laplacian(const Point& p) const;
  /// -(d2/dx2 + d2/dy2): the positive flat Laplacian Delta_0 applied to the field.
  double positive_laplacian(const Point& p) const { return -laplacian(p); }

  bool is_constant() const;
  /// Constant value, meaningful only when is_constant().
  double constant_value() const;
  /// Ensures first and second derivatives can be formed; throws
  /// InvalidInput naming the missing derivative otherwise.
  void require_derivatives() const;
  std::string description() const;

  class Impl;

 private:
  explicit ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace spectral
