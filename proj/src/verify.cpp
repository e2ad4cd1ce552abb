#include "igaflow/verify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace igaflow {

namespace {

double combine(const ErrorIntegrals& num, const ErrorIntegrals& den, Norm norm) {
  const double n =
      (norm == Norm::L2) ? num.value_sq : num.value_sq + num.grad_sq;
  const double d =
      (norm == Norm::L2) ? den.value_sq : den.value_sq + den.grad_sq;
  require(d > 0.0, "relative_error: exact field has zero norm");
  return std::sqrt(n / d);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10e", x);
  return buf;
}

}  // namespace

double relative_error_velocity(const Assembler& as,
                               const Eigen::VectorXd& coeffs,
                               const VectorFn& exact, const MatrixFn& grad,
                               double t, Norm norm) {
  const ErrorIntegrals num = as.velocity_error(coeffs, &exact, &grad, t);
  const ErrorIntegrals den = as.exact_vector_norms(exact, grad, t);
  return combine(num, den, norm);
}

double relative_error_pressure(const Assembler& as,
                               const Eigen::VectorXd& coeffs,
                               const ScalarFn& exact, const VectorFn& grad,
                               double t, Norm norm) {
  const ErrorIntegrals num = as.pressure_error(coeffs, &exact, &grad, t);
  const ErrorIntegrals den = as.exact_scalar_norms(exact, grad, t);
  return combine(num, den, norm);
}

std::vector<double> convergence_orders(const std::vector<double>& errors,
                                       const std::vector<double>& dts) {
  require(errors.size() == dts.size(), "convergence_orders: size mismatch");
  require(errors.size() >= 2, "convergence_orders: need at least two points");
  for (size_t i = 0; i < errors.size(); ++i) {
    require(errors[i] > 0.0 && dts[i] > 0.0,
            "convergence_orders: errors and dts must be positive");
    if (i) require(dts[i] < dts[i - 1], "convergence_orders: dts must decrease");
  }
  std::vector<double> orders(errors.size() - 1);
  for (size_t i = 0; i + 1 < errors.size(); ++i)
    orders[i] =
        std::log(errors[i] / errors[i + 1]) / std::log(dts[i] / dts[i + 1]);
  return orders;
}

namespace {

const char* kColumns[8] = {"v_l2", "v_h1", "p_l2",    "p_h1",
                           "vdot_l2", "vdot_h1", "pdot_l2", "pdot_h1"};

std::array<std::vector<double>, 8> column_orders(
    const std::vector<ErrorReport>& reports) {
  std::array<std::vector<double>, 8> out;
  if (reports.size() < 2) return out;
  std::vector<double> dts;
  for (const auto& r : reports) dts.push_back(r.meta.dt);
  for (int c = 0; c < 8; ++c) {
    std::vector<double> errs;
    for (const auto& r : reports) errs.push_back(r.errors()[c]);
    out[c] = convergence_orders(errs, dts);
  }
  return out;
}

}  // namespace

void emit_report_csv(std::ostream& os, const std::vector<ErrorReport>& reports,
                     const ConfigEcho& config) {
  for (const auto& [k, v] : config) os << "# " << k << " = " << v << "\n";
  os << "scheme,nts,dt";
  for (const char* c : kColumns) os << ",err_" << c << ",ord_" << c;
  os << "\n";
  const auto orders = column_orders(reports);
  for (size_t i = 0; i < reports.size(); ++i) {
    const ErrorReport& r = reports[i];
    os << r.meta.scheme << "," << r.meta.nts << "," << fmt(r.meta.dt);
    const auto e = r.errors();
    for (int c = 0; c < 8; ++c) {
      os << "," << fmt(e[c]) << ",";
      if (i > 0) os << fmt(orders[c][i - 1]);
    }
    os << "\n";
  }
}

void emit_report_json(std::ostream& os, const std::vector<ErrorReport>& reports,
                      const ConfigEcho& config) {
  nlohmann::json j;
  for (const auto& [k, v] : config) j["config"][k] = v;
  const auto orders = column_orders(reports);
  j["rows"] = nlohmann::json::array();
  for (size_t i = 0; i < reports.size(); ++i) {
    const ErrorReport& r = reports[i];
    nlohmann::json row;
    row["scheme"] = r.meta.scheme;
    row["nts"] = r.meta.nts;
    row["dt"] = r.meta.dt;
    const auto e = r.errors();
    for (int c = 0; c < 8; ++c) {
      row[std::string("err_") + kColumns[c]] = e[c];
      if (i > 0)
        row[std::string("ord_") + kColumns[c]] = orders[c][i - 1];
      else
        row[std::string("ord_") + kColumns[c]] = nullptr;
    }
    j["rows"].push_back(row);
  }
  os << j.dump(2) << "\n";
}

}  // namespace igaflow
