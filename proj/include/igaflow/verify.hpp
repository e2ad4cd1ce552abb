#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "igaflow/assembly.hpp"

namespace igaflow {

enum class Norm { L2, H1 };

/// Relative L2 or full-H1 (value + gradient) error of a discrete field
/// against an exact field, by Gauss quadrature on the analysis mesh.
double relative_error_velocity(const Assembler& as,
                               const Eigen::VectorXd& coeffs,
                               const VectorFn& exact, const MatrixFn& grad,
                               double t, Norm norm);
double relative_error_pressure(const Assembler& as,
                               const Eigen::VectorXd& coeffs,
                               const ScalarFn& exact, const VectorFn& grad,
                               double t, Norm norm);

/// order_j = log(e_j/e_{j+1}) / log(dt_j/dt_{j+1}) for adjacent pairs.
std::vector<double> convergence_orders(const std::vector<double>& errors,
                                       const std::vector<double>& dts);

struct RunMeta {
  std::string benchmark;
  std::string scheme;  // "scheme1" / "scheme2"
  int nts = 0;
  double dt = 0.0;
  std::array<int, 3> nel{};
  int p = 0;
  int continuity = 0;
  double rho_inf = 0.0;
  double t_eval = 0.0;
};

/// Relative errors of one run at t_eval (L2 and full H1 per quantity).
struct ErrorReport {
  RunMeta meta;
  double v_l2 = 0, v_h1 = 0;
  double p_l2 = 0, p_h1 = 0;
  double vdot_l2 = 0, vdot_h1 = 0;
  double pdot_l2 = 0, pdot_h1 = 0;

  std::array<double, 8> errors() const {
    return {v_l2, v_h1, p_l2, p_h1, vdot_l2, vdot_h1, pdot_l2, pdot_h1};
  }
};

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Family table with per-quantity adjacent-pair orders (first row blank).
/// CSV: '#'-prefixed config echo, header row, '.' decimals, %.10e values.
void emit_report_csv(std::ostream& os, const std::vector<ErrorReport>& reports,
                     const ConfigEcho& config);
void emit_report_json(std::ostream& os, const std::vector<ErrorReport>& reports,
                      const ConfigEcho& config);

}  // namespace igaflow
