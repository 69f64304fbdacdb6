#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcert/qcert.hpp"

namespace {

using namespace qcert;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInconclusive = 3;

std::optional<VectorXd> parse_vector_arg(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  VectorXd v(static_cast<int>(vals.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
  return v;
}

void emit(const Json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

bool report_inconclusive(const ConditionReport& rep) {
  for (const CheckStatus s : {rep.A, rep.B, rep.C, rep.D, rep.E, rep.F}) {
    if (s == CheckStatus::Inconclusive) return true;
  }
  return false;
}

struct CommonArgs {
  std::string input;
  std::string output;
  std::string candidate;
  double tol_feas = 1e-9;
  double tol_gap = 1e-9;
  double tol_resid = 1e-7;
  double tol_value = 1e-6;
  double unbounded = 1e6;
  bool strict = false;
  bool no_meta = false;

  CertifyOptions certify_options() const {
    CertifyOptions opts;
    opts.solver.tol_feas = tol_feas;
    opts.solver.tol_gap = tol_gap;
    opts.solver.unbounded_threshold = unbounded;
    opts.tol_resid = tol_resid;
    opts.tol_value = tol_value;
    opts.candidate_minimizer = parse_vector_arg(candidate);
    return opts;
  }
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_candidate = true) {
  cmd->add_option("input", a.input, "problem JSON file")->required();
  cmd->add_option("-o,--out", a.output, "output file (stdout when omitted)");
  if (with_candidate) {
    cmd->add_option("--candidate", a.candidate, "candidate minimizer, comma-separated");
  }
  cmd->add_option("--tol-feas", a.tol_feas, "solver feasibility tolerance");
  cmd->add_option("--tol-gap", a.tol_gap, "solver relative gap tolerance");
  cmd->add_option("--tol-resid", a.tol_resid, "certificate residual tolerance");
  cmd->add_option("--tol-value", a.tol_value, "value comparison tolerance");
  cmd->add_option("--unbounded-threshold", a.unbounded, "divergence magnitude");
  cmd->add_flag("--strict", a.strict, "exit 3 on inconclusive condition verdicts");
  cmd->add_flag("--no-meta", a.no_meta, "omit the meta block (reproducible output)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QCQP global-optimality certification toolkit"};
  app.require_subcommand(1);

  CommonArgs cert_args;
  CLI::App* cmd_certify =
      app.add_subcommand("certify", "evaluate the optimality conditions of an instance");
  add_common(cmd_certify, cert_args);

  CommonArgs relax_args;
  CLI::App* cmd_relax = app.add_subcommand("relax", "emit the conic relaxation");
  add_common(cmd_relax, relax_args, false);

  CommonArgs solve_args;
  std::string trace_path;
  CLI::App* cmd_solve = app.add_subcommand("solve", "solve the conic relaxation");
  add_common(cmd_solve, solve_args, false);
  cmd_solve->add_option("--trace", trace_path, "write the iteration trace CSV");

  CommonArgs dnn_args;
  CLI::App* cmd_dnn =
      app.add_subcommand("dnn", "evaluate the DNN optimality conditions (equality form)");
  add_common(cmd_dnn, dnn_args);

  // sweep over the bundled parametric family
  std::string sweep_example = "4.1";
  double sweep_from = 2.0, sweep_to = 6.0, sweep_step = 0.1;
  int sweep_jobs = 1;
  std::string sweep_csv;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "parameter sweep of example 4.1");
  cmd_sweep->add_option("--example", sweep_example, "example id (only 4.1)");
  cmd_sweep->add_option("--from", sweep_from, "first alpha");
  cmd_sweep->add_option("--to", sweep_to, "last alpha");
  cmd_sweep->add_option("--step", sweep_step, "alpha increment");
  cmd_sweep->add_option("--jobs", sweep_jobs, "parallel workers");
  cmd_sweep->add_option("--csv", sweep_csv, "output CSV file (stdout when omitted)");

  // bundled examples: list, emit instance files, run the quick regression
  bool ex_list = false, ex_run = false;
  std::string ex_emit, ex_out;
  double ex_alpha = 1.0;
  CLI::App* cmd_examples = app.add_subcommand("examples", "bundled example problems");
  cmd_examples->add_flag("--list", ex_list, "list the bundled examples");
  cmd_examples->add_option("--emit", ex_emit, "emit an instance (4.1|4.2|4.3|4.4)");
  cmd_examples->add_option("--alpha", ex_alpha, "alpha for example 4.1");
  cmd_examples->add_option("-o,--out", ex_out, "output file (stdout when omitted)");
  cmd_examples->add_flag("--run", ex_run, "run all bundled examples and print verdicts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_certify->parsed()) {
      const QcqpInstance inst = load_instance(cert_args.input);
      const CertifyOptions opts = cert_args.certify_options();
      const ConditionReport rep =
          inst.nonneg_vars ? certify_dnn(inst, opts) : certify(inst, opts);
      emit(report_to_json(rep, !cert_args.no_meta), cert_args.output);
      return cert_args.strict && report_inconclusive(rep) ? kExitInconclusive : kExitOk;
    }

    if (cmd_relax->parsed()) {
      const QcqpInstance inst = load_instance(relax_args.input);
      const HomogenizedInstance h = homogenize(inst);
      const ConicProblem p = inst.nonneg_vars ? build_pdnn(h) : build_primal_sdp(h);
      Json doc = conic_problem_to_json(p);
      doc["dual"] = Json{{"objective", "maximize s"},
                         {"slack_matrix", inst.nonneg_vars
                                              ? "Q0 - sum y_k Q_k - s H in PSD + NONNEG"
                                              : "Q0 + sum y_k Q_k - s H in PSD, y >= 0"}};
      emit(doc, relax_args.output);
      return kExitOk;
    }

    if (cmd_solve->parsed()) {
      const QcqpInstance inst = load_instance(solve_args.input);
      const HomogenizedInstance h = homogenize(inst);
      const ConicProblem p = inst.nonneg_vars ? build_pdnn(h) : build_primal_sdp(h);
      SolverOptions sopts;
      sopts.tol_feas = solve_args.tol_feas;
      sopts.tol_gap = solve_args.tol_gap;
      sopts.unbounded_threshold = solve_args.unbounded;
      const ConicOutcome out = solve_dual(p, sopts);
      if (!trace_path.empty()) write_trace_csv(out, trace_path);
      Json doc = outcome_to_json(out);
      doc["objective_shift"] = inst.objective_shift;
      emit(doc, solve_args.output);
      if (solve_args.strict && out.status == SolveStatus::Stalled) return kExitInconclusive;
      return kExitOk;
    }

    if (cmd_dnn->parsed()) {
      const QcqpInstance inst = load_instance(dnn_args.input);
      const ConditionReport rep = certify_dnn(inst, dnn_args.certify_options());
      emit(report_to_json(rep, !dnn_args.no_meta), dnn_args.output);
      return dnn_args.strict && report_inconclusive(rep) ? kExitInconclusive : kExitOk;
    }

    if (cmd_sweep->parsed()) {
      if (sweep_example != "4.1") {
        std::cerr << "only example 4.1 supports sweeps\n";
        return kExitInput;
      }
      const std::vector<SweepRow> rows =
          sweep_fig1(sweep_from, sweep_to, sweep_step, sweep_jobs);
      const std::string csv = sweep_to_csv(rows);
      if (sweep_csv.empty()) {
        std::cout << csv;
      } else {
        write_file(sweep_csv, csv);
      }
      return kExitOk;
    }

    if (cmd_examples->parsed()) {
      if (ex_list) {
        std::cout << "4.1  univariate family, alpha in [0,6]; exactness and duality "
                     "depend on alpha\n"
                  << "4.2  finite infimum, no minimizer; relaxation unbounded, dual "
                     "infeasible\n"
                  << "4.3  4.2 plus a redundant cut; strong duality without exactness\n"
                  << "4.4  exact relaxation with a positive duality gap\n";
        return kExitOk;
      }
      if (!ex_emit.empty()) {
        QcqpInstance inst = [&] {
          if (ex_emit == "4.1") return example41(ex_alpha).first;
          if (ex_emit == "4.2") return example42().first;
          if (ex_emit == "4.3") return example43().first;
          if (ex_emit == "4.4") return example44().first;
          throw std::invalid_argument("unknown example id: " + ex_emit);
        }();
        emit(serialize_instance(inst), ex_out);
        return kExitOk;
      }
      if (ex_run) {
        int bad = 0;
        auto verdict = [&](const std::string& name, bool ok) {
          std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
          if (!ok) ++bad;
        };
        {
          auto [inst, row] = example41(1.0);
          CertifyOptions opts;
          opts.candidate_minimizer = VectorXd::Constant(1, row.u_star);
          const ConditionReport rep = certify(inst, opts);
          verdict("4.1 (alpha=1): all conditions hold",
                  rep.A == CheckStatus::Holds && rep.B == CheckStatus::Holds &&
                      rep.C == CheckStatus::Holds && rep.D == CheckStatus::Holds &&
                      rep.E == CheckStatus::Holds && rep.F == CheckStatus::Holds);
        }
        {
          auto [inst, ex] = example42();
          (void)ex;
          const ConditionReport rep = certify(inst, {});
          verdict("4.2: lower-bound conditions fail",
                  rep.D == CheckStatus::Fails && rep.E == CheckStatus::Fails &&
                      rep.F == CheckStatus::Fails);
        }
        {
          auto [inst, ex] = example43();
          const ConditionReport rep = certify(inst, {});
          verdict("4.3: values 0, exactness not certified",
                  std::abs(rep.values.eta_p - ex.eta_p) <= 1e-6 &&
                      std::abs(rep.values.eta_d - ex.eta_d) <= 1e-6 &&
                      rep.C != CheckStatus::Holds);
        }
        {
          auto [inst, ex] = example44();
          CertifyOptions opts;
          opts.candidate_minimizer = ex.minimizer;
          const ConditionReport rep = certify(inst, opts);
          verdict("4.4: C,D hold; B,E,F fail",
                  rep.C == CheckStatus::Holds && rep.D == CheckStatus::Holds &&
                      rep.B == CheckStatus::Fails && rep.E == CheckStatus::Fails &&
                      rep.F == CheckStatus::Fails);
        }
        return bad == 0 ? kExitOk : 1;
      }
      std::cerr << "examples: pass --list, --emit <id> or --run\n";
      return kExitInput;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
