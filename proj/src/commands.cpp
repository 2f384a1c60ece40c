#include "sal/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "sal/config.hpp"
#include "sal/error.hpp"
#include "sal/json_util.hpp"
#include "sal/kernels.hpp"
#include "sal/model.hpp"
#include "sal/qp_solver.hpp"
#include "sal/report.hpp"
#include "sal/trainer.hpp"

namespace sal {
namespace {

namespace fs = std::filesystem;

class RunLog {
 public:
  RunLog(const fs::path& path, std::ostream& echo) : file_(path), echo_(echo) {
    if (!file_) throw Error("cannot open " + path.string() + " for writing");
  }
  void line(const std::string& s) {
    file_ << s << '\n';
    echo_ << s << '\n';
  }

 private:
  std::ofstream file_;
  std::ostream& echo_;
};

struct Run {
  RunConfig cfg;
  fs::path out;
};

Run prepare(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw Error("--config is required");
  Run r;
  r.cfg = parse_config(opts.config_path);
  if (opts.seed) override_seed(r.cfg, *opts.seed);
  r.out = opts.out_dir.empty() ? fs::path(r.cfg.output.dir) : fs::path(opts.out_dir);
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw Error("cannot create output directory " + r.out.string() + ": " + ec.message());
  write_text_file((r.out / "config.resolved.json").string(), dump_json(config_to_json(r.cfg)));
  return r;
}

fs::path model_output(const Run& r, const CommandOptions& opts) {
  if (!opts.model_path.empty()) return fs::path(opts.model_path);
  return r.out / r.cfg.output.model_path;
}

std::string sci(double x) { return format_sci(x); }

struct Data {
  Dataset train;
  std::optional<Dataset> test;
};

Data make_data(const RunConfig& cfg) {
  const TargetFn target = build_target(cfg);
  Data d{build_train(cfg, target), std::nullopt};
  if (cfg.data.m_test > 0) d.test = build_test(cfg, target);
  return d;
}

void log_header(RunLog& log, const std::string& command, const Run& r, const Data& d) {
  log.line("command: " + command);
  log.line("kernels: " + std::string(kernels::active().name));
  log.line("target: " + r.cfg.data.target + " (m = " + std::to_string(d.train.size()) +
           ", m_test = " + std::to_string(d.test ? d.test->size() : 0) + ", t = " + std::to_string(d.train.output_dim()) + ")");
}

struct SalOutcome {
  bool ok = false;
  TrainReport report;
};

SalOutcome run_sal(const Run& r, const Data& d, RunLog& log, const fs::path& csv_path, const fs::path& model_path) {
  SalOutcome o;
  TrainConfig tc = to_train_config(*r.cfg.sal);
  tc.partitions = partitions_from_env();
  try {
    TrainResult res = train_sal(d.train, d.test ? &*d.test : nullptr, tc);
    o.report = std::move(res.report);
    save_model(res.model, model_path.string());
    o.ok = true;
  } catch (const TrainingError& e) {
    log.line("error: " + std::string(e.what()));
    o.report = e.partial_report;
    if (!e.partial_model.grades.empty() || e.partial_model.hybrid_head) {
      const fs::path partial = model_path.string() + ".partial";
      save_model(e.partial_model, partial.string());
      log.line("partial model: " + partial.string());
    }
  }
  for (const GradeRecord& g : o.report.records) {
    std::string s = "grade " + std::to_string(g.grade) + ": tau " + sci(g.tau) + ", iterations " +
                    std::to_string(g.iterations) + " (" + g.stop_reason + "), rse_train " + sci(g.rse_train) +
                    ", rse_test " + sci(g.rse_test) + ", " + sci(g.train_time_s) + " s";
    if (!g.note.empty()) s += " [" + g.note + "]";
    log.line(s);
  }
  log.line("sal total time: " + sci(o.report.total_time_s) + " s");
  for (const std::string& n : o.report.notes) log.line("note: " + n);
  write_csv(sal_table(o.report), csv_path.string());
  log.line("wrote " + csv_path.string());
  if (o.ok) log.line("wrote " + model_path.string());
  return o;
}

struct SsgOutcome {
  bool ok = false;
  SsgReport report;
};

SsgOutcome run_ssg(const Run& r, const Data& d, RunLog& log, const fs::path& csv_path, const fs::path& model_path) {
  SsgOutcome o;
  try {
    SsgResult res = train_ssg(d.train, d.test ? &*d.test : nullptr, *r.cfg.ssg);
    o.report = std::move(res.report);
    save_mlp(res.params, model_path.string());
    o.ok = true;
  } catch (const Error& e) {
    log.line("error: " + std::string(e.what()));
  }
  for (const SsgRecord& row : o.report.rows)
    log.line("epoch " + std::to_string(row.epoch) + ": rse_train " + sci(row.rse_train) + ", rse_test " +
             sci(row.rse_test) + ", " + sci(row.train_time_s) + " s");
  if (o.ok) log.line("ssg stop: " + o.report.stop_reason + " after " + std::to_string(o.report.epochs_run) + " epochs");
  for (const std::string& n : o.report.notes) log.line("note: " + n);
  write_csv(ssg_table(o.report), csv_path.string());
  log.line("wrote " + csv_path.string());
  if (o.ok) log.line("wrote " + model_path.string());
  return o;
}

template <class F>
int guarded(std::ostream& log, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_train_sal(const CommandOptions& opts, std::ostream& echo) {
  return guarded(echo, [&] {
    const Run r = prepare(opts);
    if (!r.cfg.sal) throw Error("config: sal: missing required section");
    RunLog log(r.out / "run.log", echo);
    const Data d = make_data(r.cfg);
    log_header(log, "train-sal", r, d);
    return run_sal(r, d, log, r.out / r.cfg.output.csv, model_output(r, opts)).ok ? 0 : 1;
  });
}

int cmd_train_ssg(const CommandOptions& opts, std::ostream& echo) {
  return guarded(echo, [&] {
    const Run r = prepare(opts);
    if (!r.cfg.ssg) throw Error("config: ssg: missing required section");
    RunLog log(r.out / "run.log", echo);
    const Data d = make_data(r.cfg);
    log_header(log, "train-ssg", r, d);
    return run_ssg(r, d, log, r.out / r.cfg.output.csv, model_output(r, opts)).ok ? 0 : 1;
  });
}

int cmd_compare(const CommandOptions& opts, std::ostream& echo) {
  return guarded(echo, [&] {
    const Run r = prepare(opts);
    if (!r.cfg.sal) throw Error("config: sal: missing required section for compare");
    if (!r.cfg.ssg) throw Error("config: ssg: missing required section for compare");
    RunLog log(r.out / "run.log", echo);
    const Data d = make_data(r.cfg);
    log_header(log, "compare", r, d);
    const SalOutcome sal = run_sal(r, d, log, r.out / "sal_report.csv", r.out / "sal_model.json");
    const SsgOutcome ssg = run_ssg(r, d, log, r.out / "ssg_report.csv", r.out / "ssg_model.json");

    CsvTable table{{"threshold", "sal_grade", "sal_time_s", "ssg_epoch", "ssg_time_s", "first", "time_ratio"}, {}};
    std::ostringstream summary;
    summary << "SAL vs SSG on " << r.cfg.data.target << " (m = " << d.train.size() << ")\n";
    summary << "SSG structure " << ssg_shape(*r.cfg.ssg, d.train.input_dim(), d.train.output_dim()).structure()
            << ", alpha " << sci(r.cfg.ssg->alpha) << "\n";
    if (!sal.ok) summary << "SAL run failed; its rows cover the grades completed before the failure\n";
    if (!ssg.ok) summary << "SSG run failed\n";
    for (double thr : r.cfg.compare.thresholds) {
      const ThresholdHit a = sal_time_to(sal.report, thr);
      const ThresholdHit b = ssg_time_to(ssg.report, thr);
      std::string first = "neither";
      std::string ratio;
      if (a.reached && (!b.reached || a.time_s < b.time_s)) first = "sal";
      else if (b.reached && (!a.reached || b.time_s < a.time_s)) first = "ssg";
      else if (a.reached) first = "tie";
      if (a.reached && b.reached && a.time_s > 0.0) ratio = sci(b.time_s / a.time_s);
      table.rows.push_back({sci(thr), a.reached ? std::to_string(a.index) : "", a.reached ? sci(a.time_s) : "",
                            b.reached ? std::to_string(b.index) : "", b.reached ? sci(b.time_s) : "", first, ratio});
      summary << "rse " << sci(thr) << ": ";
      summary << "SAL " << (a.reached ? "grade " + std::to_string(a.index) + " at " + sci(a.time_s) + " s" : "not reached");
      summary << ", SSG " << (b.reached ? "epoch " + std::to_string(b.index) + " at " + sci(b.time_s) + " s" : "not reached");
      summary << "; first: " << first;
      if (!ratio.empty()) summary << ", SSG/SAL time ratio " << ratio;
      summary << "\n";
    }
    write_csv(table, (r.out / "comparison.csv").string());
    write_text_file((r.out / "summary.txt").string(), summary.str());
    log.line("wrote " + (r.out / "comparison.csv").string());
    log.line(summary.str());
    return sal.ok && ssg.ok ? 0 : 1;
  });
}

int cmd_eval(const CommandOptions& opts, std::ostream& echo) {
  return guarded(echo, [&] {
    if (opts.model_path.empty()) throw Error("--model is required");
    const Run r = prepare(opts);
    RunLog log(r.out / "run.log", echo);
    const Data d = make_data(r.cfg);
    log_header(log, "eval", r, d);
    const ordered_json doc = parse_json_strict(read_text_file(opts.model_path), opts.model_path);
    std::function<Matrix(const Matrix&)> predict;
    std::string kind;
    if (doc.contains("grades")) {
      auto model = std::make_shared<SalModel>(load_model(opts.model_path));
      predict = [model](const Matrix& x) { return predict_batch(*model, x); };
      kind = "sal (" + std::to_string(model->grades.size()) + " grades)";
    } else if (doc.contains("layers")) {
      auto net = std::make_shared<MlpParams>(load_mlp(opts.model_path));
      predict = [net](const Matrix& x) { return mlp_forward(*net, x); };
      kind = "ssg";
    } else {
      throw Error(opts.model_path + ": not a model file (no 'grades' or 'layers')");
    }
    log.line("model: " + opts.model_path + " [" + kind + "]");
    CsvTable table{{"split", "samples", "rse"}, {}};
    const double tr = compute_rse(predict(d.train.inputs), d.train.targets);
    table.rows.push_back({"train", std::to_string(d.train.size()), sci(tr)});
    log.line("rse_train " + sci(tr));
    if (d.test) {
      const double te = compute_rse(predict(d.test->inputs), d.test->targets);
      table.rows.push_back({"test", std::to_string(d.test->size()), sci(te)});
      log.line("rse_test " + sci(te));
    }
    write_csv(table, (r.out / "eval.csv").string());
    log.line("wrote " + (r.out / "eval.csv").string());
    return 0;
  });
}

int cmd_coeffs(std::uint64_t seed, const std::string& path, std::ostream& log) {
  return guarded(log, [&] {
    OscillatoryCoeffs::generate(seed).save(path);
    log << "wrote " << path << '\n';
    return 0;
  });
}

}  // namespace sal
