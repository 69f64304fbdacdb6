#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qcert/bench.hpp"

namespace qcert {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Problem files. Quadratics are stored as (A, b, c) with the linear term
// entering as 2 b' u, mirroring q(u) = u' A u + 2 b' u + c. A is a full
// row-major symmetric matrix. Mind the factor 2 when importing data that
// stores the plain gradient.
// ---------------------------------------------------------------------------

inline Json value_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline Json matrix_to_json(const MatrixXd& M) {
  Json rows = Json::array();
  for (int i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json vector_to_json(const VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + ": expected a matrix");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j.at(i).size()) != cols) {
      throw std::invalid_argument(what + ": ragged matrix rows");
    }
    for (int c = 0; c < cols; ++c) M(i, c) = j.at(i).at(c).get<double>();
  }
  return M;
}

inline VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
  VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

inline QuadraticForm form_from_json(const Json& j, const std::string& what) {
  QuadraticForm q;
  q.A = matrix_from_json(j.at("A"), what + ".A");
  q.b = vector_from_json(j.at("b"), what + ".b");
  q.c = j.value("c", 0.0);
  return q;
}

inline QcqpInstance parse_instance(const Json& doc) {
  if (!doc.contains("n") || !doc.contains("objective")) {
    throw std::invalid_argument("instance: missing required fields n/objective");
  }
  const int n = doc.at("n").get<int>();
  const bool nonneg = doc.value("nonneg_vars", false);
  QuadraticForm obj = form_from_json(doc.at("objective"), "objective");
  std::vector<Constraint> cons;
  if (doc.contains("constraints")) {
    for (std::size_t k = 0; k < doc.at("constraints").size(); ++k) {
      const Json& jc = doc.at("constraints").at(k);
      Constraint c;
      c.q = form_from_json(jc, "constraint " + std::to_string(k + 1));
      const std::string sense = jc.value("sense", nonneg ? "eq" : "leq");
      if (sense == "leq") {
        c.sense = Sense::Leq;
      } else if (sense == "eq") {
        c.sense = Sense::Eq;
      } else {
        throw std::invalid_argument("constraint sense must be \"leq\" or \"eq\"");
      }
      cons.push_back(std::move(c));
    }
  }
  return make_instance(n, std::move(obj), std::move(cons), nonneg);
}

inline QcqpInstance parse_instance_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("instance: invalid JSON: ") + e.what());
  }
  return parse_instance(doc);
}

inline QcqpInstance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open instance file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_instance_text(ss.str());
}

inline Json serialize_instance(const QcqpInstance& inst) {
  Json doc;
  doc["n"] = inst.n;
  doc["nonneg_vars"] = inst.nonneg_vars;
  Json obj;
  obj["A"] = matrix_to_json(inst.objective.A);
  obj["b"] = vector_to_json(inst.objective.b);
  obj["c"] = inst.objective_shift;  // restored on output
  doc["objective"] = obj;
  Json cons = Json::array();
  for (const auto& c : inst.constraints) {
    Json jc;
    jc["A"] = matrix_to_json(c.q.A);
    jc["b"] = vector_to_json(c.q.b);
    jc["c"] = c.q.c;
    jc["sense"] = c.sense == Sense::Eq ? "eq" : "leq";
    cons.push_back(jc);
  }
  doc["constraints"] = cons;
  return doc;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json report_to_json(const ConditionReport& rep, bool with_meta = true) {
  Json doc;
  doc["kind"] = rep.hat ? "dnn_condition_report" : "condition_report";
  Json st;
  st["A"] = to_string(rep.A);
  st["A_bar"] = to_string(rep.A_bar);
  st["B"] = to_string(rep.B);
  st["B_bar"] = to_string(rep.B_bar);
  st["C"] = to_string(rep.C);
  st["D"] = to_string(rep.D);
  st["E"] = to_string(rep.E);
  st["F"] = to_string(rep.F);
  doc["statuses"] = st;

  Json vals;
  vals["zeta_estimate"] = value_to_json(rep.values.zeta_estimate);
  vals["eta_p"] = value_to_json(rep.values.eta_p);
  vals["eta_d"] = value_to_json(rep.values.eta_d);
  vals["phi"] = value_to_json(rep.values.phi);
  doc["values"] = vals;

  Json flags;
  flags["zeta_trusted"] = rep.zeta_trusted;
  flags["zeta_upper_bound_only"] = rep.zeta_upper_bound;
  flags["eta_p_certified"] = rep.eta_p_certified;
  flags["eta_d_pinned"] = rep.eta_d_pinned;
  flags["dual_attainment_doubtful"] = rep.dual_attainment_doubtful;
  doc["flags"] = flags;
  doc["objective_shift"] = rep.shift;

  Json wit;
  if (rep.witness_u) wit["u"] = vector_to_json(*rep.witness_u);
  if (rep.witness_y) wit["y"] = vector_to_json(*rep.witness_y);
  if (rep.witness_s) wit["s"] = *rep.witness_s;
  if (rep.witness_X) wit["X"] = matrix_to_json(*rep.witness_X);
  if (rep.witness_S) wit["S"] = matrix_to_json(*rep.witness_S);
  doc["witnesses"] = wit;

  Json relax;
  relax["primal_status"] = to_string(rep.primal_status);
  if (rep.relax_X) relax["X"] = matrix_to_json(*rep.relax_X);
  if (rep.relax_y) relax["y"] = vector_to_json(*rep.relax_y);
  if (rep.relax_s) relax["s"] = *rep.relax_s;
  doc["relaxation"] = relax;

  Json slater;
  slater["holds"] = rep.slater.holds;
  slater["margin"] = rep.slater.margin;
  slater["m_minus"] = rep.slater.m_minus;
  slater["inconclusive"] = rep.slater.inconclusive;
  if (rep.slater.witness) slater["witness"] = matrix_to_json(*rep.slater.witness);
  doc["slater"] = slater;

  Json ev;
  for (const auto& [name, e] : rep.evidence) {
    Json je;
    Json res;
    for (const auto& [k, v] : e.residuals) res[k] = value_to_json(v);
    je["residuals"] = res;
    if (!e.note.empty()) je["note"] = e.note;
    ev[name] = je;
  }
  doc["evidence"] = ev;

  doc["diagram_consistent"] = rep.diagram_consistent;
  doc["violations"] = rep.violations;
  doc["notes"] = rep.notes;
  if (with_meta) {
    doc["meta"] = Json{{"generator", "qcert"}, {"timestamp", static_cast<long>(std::time(nullptr))}};
  }
  return doc;
}

inline Json outcome_to_json(const ConicOutcome& out) {
  Json doc;
  doc["status"] = to_string(out.status);
  doc["primal_obj"] = value_to_json(out.primal_obj);
  doc["dual_obj"] = value_to_json(out.dual_obj);
  doc["gap"] = value_to_json(out.gap);
  doc["iterations"] = out.iterations;
  doc["pinfeas"] = value_to_json(out.pinfeas_abs);
  doc["dinfeas"] = value_to_json(out.dinfeas_abs);
  Json kkt;
  kkt["primal_feas"] = value_to_json(out.kkt.primal_feas);
  kkt["dual_feas"] = value_to_json(out.kkt.dual_feas);
  kkt["complementarity_y"] = value_to_json(out.kkt.complementarity_y);
  kkt["complementarity_S"] = value_to_json(out.kkt.complementarity_S);
  doc["kkt"] = kkt;
  if (out.certificate.X.size() > 0) {
    doc["X"] = matrix_to_json(out.certificate.X);
    doc["y"] = vector_to_json(out.certificate.y);
    doc["s"] = out.certificate.s;
    doc["S"] = matrix_to_json(out.certificate.S);
    if (out.Z.size() > 0) doc["Z"] = matrix_to_json(out.Z);
  }
  if (!out.note.empty()) doc["note"] = out.note;
  return doc;
}

inline Json conic_problem_to_json(const ConicProblem& p) {
  Json doc;
  doc["dim"] = p.dim;
  doc["cost"] = matrix_to_json(p.cost);
  Json maps = Json::array();
  for (const auto& m : p.maps) {
    Json jm;
    jm["A"] = matrix_to_json(m.A);
    jm["sense"] = m.sense == Sense::Eq ? "eq" : "leq";
    jm["rhs"] = m.rhs;
    maps.push_back(jm);
  }
  doc["maps"] = maps;
  doc["nonneg_matrix"] = p.nonneg_matrix;
  if (p.nonneg_matrix) doc["nonneg_includes_row0"] = p.nonneg_includes_row0;
  return doc;
}

// Sweep CSV: one row per grid point, floats at 12 significant digits.
inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,y1,hess,zeta,eta_p,detX,gap,statusA,statusB,statusC,statusD,statusE,"
        "statusF\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g", r.alpha,
                  r.y1, r.hess, r.zeta, r.eta_p, r.detX, r.gap);
    os << buf;
    for (int i = 0; i < 6; ++i) os << ',' << to_string(r.status[i]);
    os << '\n';
  }
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << content;
}

}  // namespace qcert
