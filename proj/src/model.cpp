#include "bilinsysid/model.hpp"

#include <Eigen/SVD>
#include <sstream>

#include "bilinsysid/errors.hpp"

namespace bsid {

Matrix xi_at(const SystemParams& params, const Vector& u) {
  if (u.size() != params.dims.nu) {
    std::ostringstream os;
    os << "xi_at: input has length " << u.size() << ", expected "
       << params.dims.nu;
    throw ShapeError(os.str());
  }
  Matrix xi = params.C[0];
  for (int i = 0; i < params.dims.nu; ++i) {
    xi += params.C[i + 1] * u[i];
  }
  return xi;
}

namespace {

void check_shape(std::vector<std::string>& report, const Matrix& m,
                 int rows, int cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " has shape " << m.rows() << "x" << m.cols()
       << ", expected " << rows << "x" << cols;
    report.push_back(os.str());
  }
}

void check_spd(std::vector<std::string>& report, const Matrix& s,
               const char* name) {
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > kSymmetryTol * scale) {
    report.push_back(std::string(name) + " not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(s),
                                           Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    report.push_back(std::string(name) + " not positive definite");
  }
}

}  // namespace

std::vector<std::string> validate_params(const SystemParams& params) {
  std::vector<std::string> report;
  const Dims& d = params.dims;
  if (d.nx < 1 || d.nu < 1 || d.ny < 1) {
    report.push_back("dims must all be >= 1");
    return report;
  }
  check_shape(report, params.A, d.nx, d.nx, "A");
  check_shape(report, params.B, d.nx, d.nu, "B");
  if (static_cast<int>(params.C.size()) != d.nu + 1) {
    std::ostringstream os;
    os << "C has " << params.C.size() << " blocks, expected " << d.nu + 1;
    report.push_back(os.str());
  } else {
    for (int i = 0; i <= d.nu; ++i) {
      std::ostringstream os;
      os << "C_" << i;
      check_shape(report, params.C[i], d.ny, d.nx, os.str().c_str());
    }
  }
  check_shape(report, params.D, d.ny, d.nu, "D");
  if (params.mu_x0.size() != d.nx) {
    report.push_back("mu_x0 has wrong length");
  }
  check_shape(report, params.S_x0, d.nx, d.nx, "S_x0");
  check_shape(report, params.S_w, d.nx, d.nx, "S_w");
  check_shape(report, params.S_v, d.ny, d.ny, "S_v");
  if (params.S_x0.rows() == d.nx && params.S_x0.cols() == d.nx) {
    check_spd(report, params.S_x0, "S_x0");
  }
  if (params.S_w.rows() == d.nx && params.S_w.cols() == d.nx) {
    check_spd(report, params.S_w, "S_w");
  }
  if (params.S_v.rows() == d.ny && params.S_v.cols() == d.ny) {
    check_spd(report, params.S_v, "S_v");
  }
  return report;
}

void require_feasible(const SystemParams& params, const char* context) {
  const std::vector<std::string> report = validate_params(params);
  if (!report.empty()) {
    std::ostringstream os;
    os << context << ": parameters outside the feasible set:";
    for (const std::string& r : report) {
      os << " [" << r << "]";
    }
    throw ParamError(os.str());
  }
}

namespace {

int rank_of(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) {
    return 0;
  }
  const double thresh = kRankTol * sv[0];
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > thresh) {
      ++rank;
    }
  }
  return rank;
}

}  // namespace

bool check_input_excitation(const Matrix& inputs) {
  const Eigen::Index nu = inputs.rows();
  const Eigen::Index n = inputs.cols();
  Matrix stacked(nu + 1, n);
  stacked.row(0).setOnes();
  stacked.bottomRows(nu) = inputs;
  return rank_of(stacked) == nu + 1;
}

bool check_input_excitation(const Dataset& dataset) {
  return check_input_excitation(dataset.inputs);
}

bool check_output_excitation(const Dataset& dataset) {
  const Eigen::Index nu = dataset.inputs.rows();
  const Eigen::Index ny = dataset.outputs.rows();
  Matrix stacked(nu + ny, dataset.inputs.cols());
  stacked.topRows(nu) = dataset.inputs;
  stacked.bottomRows(ny) = dataset.outputs;
  return rank_of(stacked) == nu + ny;
}

}  // namespace bsid
