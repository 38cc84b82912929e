#pragma once

#include <functional>
#include <string>
#include <utility>

#include "matrix_ops.hpp"

namespace lqcpg {

// Time-dependent matrix coefficient.  Solvers sample it on their grids; the
// optional tag records how it was specified (constant value or a named
// preset entry) so configs can round-trip.
class CoefficientFn {
  public:
    CoefficientFn() = default;

    static CoefficientFn constant(Matrix value) {
        CoefficientFn c;
        c.fn_ = [value](double) { return value; };
        c.constant_value_ = std::move(value);
        c.is_constant_ = true;
        return c;
    }

    static CoefficientFn named(std::string name, std::function<Matrix(double)> fn) {
        CoefficientFn c;
        c.fn_ = std::move(fn);
        c.name_ = std::move(name);
        return c;
    }

    Matrix operator()(double t) const { return fn_(t); }

    bool is_constant() const { return is_constant_; }
    const Matrix& constant_value() const { return constant_value_; }
    const std::string& name() const { return name_; }

  private:
    std::function<Matrix(double)> fn_;
    Matrix constant_value_;
    std::string name_;
    bool is_constant_ = false;
};

}  // namespace lqcpg
