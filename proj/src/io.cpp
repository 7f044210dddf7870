#include "bilinsysid/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bilinsysid/errors.hpp"
#include "bilinsysid/model.hpp"

namespace bsid {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  return out;
}

void write_provenance(std::ofstream& out, const std::string& provenance) {
  if (!provenance.empty()) {
    std::istringstream lines(provenance);
    std::string line;
    while (std::getline(lines, line)) {
      out << "# " << line << "\n";
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw IoError(std::string("params JSON: ") + name +
                  " must be a nested row array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) {
      throw IoError(std::string("params JSON: ragged rows in ") + name);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

void write_dataset_csv(const std::string& path, const Trajectory& trajectory,
                       bool with_states, const std::string& provenance) {
  std::ofstream out = open_out(path);
  write_provenance(out, provenance);
  const int nu = static_cast<int>(trajectory.inputs.rows());
  const int ny = static_cast<int>(trajectory.outputs.rows());
  const int nx = static_cast<int>(trajectory.states.rows());
  out << "t";
  for (int i = 1; i <= nu; ++i) {
    out << ",u_" << i;
  }
  for (int i = 1; i <= ny; ++i) {
    out << ",y_" << i;
  }
  if (with_states) {
    for (int i = 1; i <= nx; ++i) {
      out << ",x_" << i;
    }
  }
  out << "\n";
  for (Eigen::Index t = 0; t < trajectory.inputs.cols(); ++t) {
    out << t;
    for (int i = 0; i < nu; ++i) {
      out << "," << format_double(trajectory.inputs(i, t));
    }
    for (int i = 0; i < ny; ++i) {
      out << "," << format_double(trajectory.outputs(i, t));
    }
    if (with_states) {
      for (int i = 0; i < nx; ++i) {
        out << "," << format_double(trajectory.states(i, t));
      }
    }
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const Dataset& dataset,
                       const std::string& provenance) {
  Trajectory traj;
  traj.inputs = dataset.inputs;
  traj.outputs = dataset.outputs;
  traj.states = Matrix::Zero(0, dataset.inputs.cols());
  write_dataset_csv(path, traj, false, provenance);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      header = line;
      break;
    }
  }
  if (header.empty()) {
    throw IoError("dataset CSV '" + path + "': missing header row");
  }
  const std::vector<std::string> cols = split_csv_line(header);
  if (cols.empty() || cols[0] != "t") {
    throw IoError("dataset CSV '" + path + "': header must start with 't'");
  }
  int nu = 0;
  int ny = 0;
  // State columns (x_*) may be present from --with-states; they are ignored.
  for (std::size_t i = 1; i < cols.size(); ++i) {
    if (cols[i].rfind("u_", 0) == 0) {
      ++nu;
    } else if (cols[i].rfind("y_", 0) == 0) {
      ++ny;
    } else if (cols[i].rfind("x_", 0) != 0) {
      throw IoError("dataset CSV '" + path + "': unknown column " + cols[i]);
    }
  }
  if (nu < 1 || ny < 1) {
    throw IoError("dataset CSV '" + path + "': need u_* and y_* columns");
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) < 1 + nu + ny) {
      throw IoError("dataset CSV '" + path + "': short row");
    }
    std::vector<double> row;
    row.reserve(nu + ny);
    try {
      for (int i = 0; i < nu + ny; ++i) {
        row.push_back(std::stod(fields[1 + i]));
      }
    } catch (const std::exception&) {
      throw IoError("dataset CSV '" + path + "': unparsable number in row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw IoError("dataset CSV '" + path + "': need at least 2 rows");
  }

  Dataset d;
  d.dims = {0, nu, ny};
  d.inputs.resize(nu, rows.size());
  d.outputs.resize(ny, rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int i = 0; i < nu; ++i) {
      d.inputs(i, t) = rows[t][i];
    }
    for (int i = 0; i < ny; ++i) {
      d.outputs(i, t) = rows[t][nu + i];
    }
  }
  return d;
}

namespace {

json params_to_json(const SystemParams& p) {
  json j;
  j["dims"] = {{"nx", p.dims.nx}, {"nu", p.dims.nu}, {"ny", p.dims.ny}};
  j["A"] = matrix_to_json(p.A);
  j["B"] = matrix_to_json(p.B);
  json c = json::array();
  for (const Matrix& ci : p.C) {
    c.push_back(matrix_to_json(ci));
  }
  j["C"] = std::move(c);
  j["D"] = matrix_to_json(p.D);
  json mu = json::array();
  for (Eigen::Index i = 0; i < p.mu_x0.size(); ++i) {
    mu.push_back(p.mu_x0[i]);
  }
  j["mu_x0"] = std::move(mu);
  j["S_x0"] = matrix_to_json(p.S_x0);
  j["S_w"] = matrix_to_json(p.S_w);
  j["S_v"] = matrix_to_json(p.S_v);
  return j;
}

SystemParams params_from_json_checked(const json& j);

// Converts stray nlohmann exceptions (missing keys, wrong types) into the
// library's I/O error class.
SystemParams params_from_json(const json& j) {
  try {
    return params_from_json_checked(j);
  } catch (const json::exception& e) {
    throw IoError(std::string("params JSON: ") + e.what());
  }
}

SystemParams params_from_json_checked(const json& j) {
  if (!j.contains("dims")) {
    throw IoError("params JSON: missing dims");
  }
  Dims dims;
  dims.nx = j["dims"].value("nx", 0);
  dims.nu = j["dims"].value("nu", 0);
  dims.ny = j["dims"].value("ny", 0);
  if (dims.nx < 1 || dims.nu < 1 || dims.ny < 1) {
    throw IoError("params JSON: dims must all be >= 1");
  }
  SystemParams p = SystemParams::zero(dims);
  p.A = matrix_from_json(j.at("A"), "A");
  p.B = matrix_from_json(j.at("B"), "B");
  const json& c = j.at("C");
  if (!c.is_array() || static_cast<int>(c.size()) != dims.nu + 1) {
    throw IoError("params JSON: C must hold nu+1 matrices");
  }
  for (int i = 0; i <= dims.nu; ++i) {
    p.C[i] = matrix_from_json(c[i], "C");
  }
  p.D = matrix_from_json(j.at("D"), "D");
  const json& mu = j.at("mu_x0");
  if (!mu.is_array() || static_cast<int>(mu.size()) != dims.nx) {
    throw IoError("params JSON: mu_x0 must have nx entries");
  }
  for (int i = 0; i < dims.nx; ++i) {
    p.mu_x0[i] = mu[i].get<double>();
  }
  p.S_x0 = matrix_from_json(j.at("S_x0"), "S_x0");
  p.S_w = matrix_from_json(j.at("S_w"), "S_w");
  p.S_v = matrix_from_json(j.at("S_v"), "S_v");

  const std::vector<std::string> violations = validate_params(p);
  if (!violations.empty()) {
    std::string msg = "params JSON: invalid parameters:";
    for (const std::string& v : violations) {
      msg += " [" + v + "]";
    }
    throw IoError(msg);
  }
  return p;
}

}  // namespace

void write_params_json(const std::string& path, const SystemParams& params,
                       const std::string& provenance) {
  json j = params_to_json(params);
  if (!provenance.empty()) {
    try {
      j["provenance"] = json::parse(provenance);
    } catch (const json::exception&) {
      j["provenance"] = provenance;
    }
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

SystemParams read_params_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("params JSON '" + path + "': " + e.what());
  }
  return params_from_json(j);
}

std::string params_to_json_string(const SystemParams& params) {
  return params_to_json(params).dump(2);
}

SystemParams params_from_json_string(const std::string& text) {
  try {
    return params_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("params JSON: ") + e.what());
  }
}

void write_trace_csv(const std::string& path, const EstimationReport& report,
                     const std::string& provenance) {
  std::ofstream out = open_out(path);
  write_provenance(out, provenance);
  out << "iter,cost,step_norm,grad_norm,log_likelihood,min_cov_eigenvalue\n";
  for (const IterationRecord& r : report.trace) {
    out << r.iter << "," << format_double(r.cost) << ","
        << format_double(r.step_norm) << "," << format_double(r.grad_norm)
        << "," << format_double(r.log_likelihood) << ","
        << format_double(r.min_cov_eigenvalue) << "\n";
  }
}

void write_validation_outputs(const std::string& metrics_json_path,
                              const std::string& traj_csv_path,
                              const SystemParams& truth,
                              const SystemParams& est,
                              const Matrix& val_inputs,
                              const OutputErrorResult& output_error,
                              const ParamErrorResult& param_error,
                              const std::string& provenance) {
  json j;
  j["output_error_sum"] = output_error.sum;
  j["output_error_mean"] = output_error.mean;
  j["terms_used"] = output_error.terms_used;
  j["terms_skipped"] = output_error.terms_skipped;
  j["c_error"] = param_error.c_error;
  j["m_error"] = param_error.m_error;
  if (!provenance.empty()) {
    try {
      j["provenance"] = json::parse(provenance);
    } catch (const json::exception&) {
      j["provenance"] = provenance;
    }
  }
  std::ofstream out = open_out(metrics_json_path);
  out << j.dump(2) << "\n";

  if (!traj_csv_path.empty()) {
    const Trajectory ref = simulate_noise_free(truth, val_inputs);
    const Trajectory fit = simulate_noise_free(est, val_inputs);
    std::ofstream traj = open_out(traj_csv_path);
    write_provenance(traj, provenance);
    const int ny = static_cast<int>(ref.outputs.rows());
    traj << "t";
    for (int i = 1; i <= ny; ++i) {
      traj << ",y_true_" << i;
    }
    for (int i = 1; i <= ny; ++i) {
      traj << ",y_est_" << i;
    }
    traj << "\n";
    for (Eigen::Index t = 0; t < val_inputs.cols(); ++t) {
      traj << t;
      for (int i = 0; i < ny; ++i) {
        traj << "," << format_double(ref.outputs(i, t));
      }
      for (int i = 0; i < ny; ++i) {
        traj << "," << format_double(fit.outputs(i, t));
      }
      traj << "\n";
    }
  }
}

std::string mc_summary_csv_string(const McSummary& summary,
                                  const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) {
    std::istringstream lines(provenance);
    std::string line;
    while (std::getline(lines, line)) {
      out << "# " << line << "\n";
    }
  }
  out << "snr_db,n_d,metric,mean,std,median,n_fail,degraded\n";
  for (const McCell& c : summary.cells) {
    out << format_double(c.snr_db) << "," << c.n_d << "," << c.metric << ","
        << format_double(c.mean) << "," << format_double(c.std_dev) << ","
        << format_double(c.median) << "," << c.n_fail << ","
        << (c.degraded ? 1 : 0) << "\n";
  }
  return out.str();
}

void write_mc_summary_csv(const std::string& path, const McSummary& summary,
                          const std::string& provenance) {
  std::ofstream out = open_out(path);
  out << mc_summary_csv_string(summary, provenance);
}

void write_mc_trials_csv(const std::string& path, const McSummary& summary,
                         const std::string& provenance) {
  std::ofstream out = open_out(path);
  write_provenance(out, provenance);
  out << "snr_db,n_d,trial,seed,ok,failure,output_error_sum,"
         "output_error_mean,c_error,m_error,iterations,wall_seconds\n";
  for (const TrialRecord& r : summary.records) {
    out << format_double(r.snr_db) << "," << r.n_d << "," << r.trial << ","
        << r.seed << "," << (r.ok ? 1 : 0) << "," << r.failure << ","
        << format_double(r.output_error_sum) << ","
        << format_double(r.output_error_mean) << ","
        << format_double(r.c_error) << "," << format_double(r.m_error) << ","
        << r.iterations << "," << format_double(r.wall_seconds) << "\n";
  }
}

void write_mc_report_json(const std::string& path, const McSummary& summary,
                          const std::string& provenance) {
  json j;
  j["method"] = method_name(summary.method);
  j["total_wall_seconds"] = summary.total_wall_seconds;
  if (!provenance.empty()) {
    try {
      j["provenance"] = json::parse(provenance);
    } catch (const json::exception&) {
      j["provenance"] = provenance;
    }
  }
  json cells = json::array();
  for (const McCell& c : summary.cells) {
    cells.push_back({{"snr_db", c.snr_db},
                     {"n_d", c.n_d},
                     {"metric", c.metric},
                     {"mean", c.mean},
                     {"std", c.std_dev},
                     {"median", c.median},
                     {"n_fail", c.n_fail},
                     {"degraded", c.degraded}});
  }
  j["cells"] = std::move(cells);
  json trials = json::array();
  double wall_mean = 0.0;
  for (const TrialRecord& r : summary.records) {
    trials.push_back({{"snr_db", r.snr_db},
                      {"n_d", r.n_d},
                      {"trial", r.trial},
                      {"seed", r.seed},
                      {"ok", r.ok},
                      {"failure", r.failure},
                      {"output_error_sum", r.output_error_sum},
                      {"output_error_mean", r.output_error_mean},
                      {"c_error", r.c_error},
                      {"m_error", r.m_error},
                      {"iterations", r.iterations},
                      {"wall_seconds", r.wall_seconds}});
    wall_mean += r.wall_seconds;
  }
  if (!summary.records.empty()) {
    wall_mean /= static_cast<double>(summary.records.size());
  }
  j["mean_trial_wall_seconds"] = wall_mean;
  j["trials"] = std::move(trials);
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows,
                     const std::string& provenance) {
  std::ofstream out = open_out(path);
  write_provenance(out, provenance);
  out << "n_d,mean_seconds,std_seconds\n";
  for (const BenchRow& r : rows) {
    out << r.n_d << "," << format_double(r.mean_seconds) << ","
        << format_double(r.std_seconds) << "\n";
  }
}

}  // namespace bsid
