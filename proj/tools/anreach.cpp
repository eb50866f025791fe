#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "anreach/error.hpp"
#include "anreach/model_io.hpp"
#include "anreach/models.hpp"
#include "anreach/report.hpp"

namespace {

using namespace anreach;

enum Exit { Ok = 0, Usage = 1, Invalid = 2, Failed = 3, NotCertified = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelSource {
  std::string path;
  std::string example;

  void attach(CLI::App* cmd) {
    cmd->add_option("model", path, "Model JSON file");
    cmd->add_option("--example", example, "Built-in model: sirs:D[:bound] or gps:D[:bound]");
  }

  AgentNetwork load() const {
    if (path.empty() == example.empty()) throw UsageError("give exactly one of a model file or --example");
    return example.empty() ? load_model(path) : models::from_spec(example);
  }
};

// Validation errors abort with exit code 2 before any computation.
AgentNetwork checked(const ModelSource& src) {
  AgentNetwork an = src.load();
  const auto diags = validate(an);
  for (const auto& d : diags) {
    if (d.severity == Severity::Warning) std::cerr << "warning[" << to_string(d.code) << "]: " << d.message << "\n";
  }
  if (has_errors(diags)) {
    for (const auto& d : diags)
      if (d.severity == Severity::Error) std::cerr << "error[" << to_string(d.code) << "]: " << d.message << "\n";
    throw Error(ErrorCode::InvalidModel, "model failed validation");
  }
  return an;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_stdout() const { return !file_; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_target(const std::string& text, const AgentNetwork& an) {
  std::vector<double> w(an.num_states(), 0.0);
  auto index_of = [&](const std::string& name) -> std::size_t {
    const auto names = an.state_names();
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw UsageError("unknown target state '" + name + "'");
  };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  const std::string t = trim(text);
  if (t.empty()) throw UsageError("empty target");
  if (t.front() != '{') {
    w[index_of(t)] = 1.0;
    return w;
  }
  if (t.back() != '}') throw UsageError("target weights must look like {S:1,I:1}");
  std::stringstream body(t.substr(1, t.size() - 2));
  std::string item;
  bool any = false;
  while (std::getline(body, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("target entry '" + item + "' lacks a weight");
    const std::string name = trim(item.substr(0, colon));
    const std::string value = trim(item.substr(colon + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw UsageError("bad weight '" + value + "'");
    w[index_of(name)] += v;
    any = any || v != 0.0;
  }
  if (!any) throw UsageError("target weights are all zero");
  return w;
}

void emit_summary(const nlohmann::json& j, const std::string& path, bool csv_on_stdout) {
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open summary file " + path);
    f << j.dump(2) << "\n";
  }
  (csv_on_stdout ? std::cerr : std::cout) << j.dump() << "\n";
}

int threads_from_env() {
  if (const char* s = std::getenv("ANREACH_THREADS")) {
    try {
      return std::max(0, std::stoi(s));
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reach tubes for agent-network fluid models under bounded uncertainty"};
  app.require_subcommand(1);
  int threads = threads_from_env();
  app.add_option("--threads", threads, "Worker threads for extremal solves (default ANREACH_THREADS or all)")
      ->check(CLI::NonNegativeNumber);

  // validate
  ModelSource v_src;
  bool dump_envelope = false, emit_model = false;
  double v_eps = 0.0;
  auto* v_cmd = app.add_subcommand("validate", "Check a model and optionally list its envelope");
  v_src.attach(v_cmd);
  v_cmd->add_flag("--dump-envelope", dump_envelope, "Print the envelope listing");
  v_cmd->add_flag("--emit-model", emit_model, "Print the model as JSON");
  v_cmd->add_option("--eps", v_eps, "State deviation used for bounds in the listing")->check(CLI::NonNegativeNumber);

  // simulate
  ModelSource s_src;
  std::optional<double> tend;
  std::string s_out;
  double s_step = 0.0;
  auto* s_cmd = app.add_subcommand("simulate", "Integrate the nominal dynamics");
  s_src.attach(s_cmd);
  s_cmd->add_option("--tend", tend, "End time (default: horizon)")->check(CLI::PositiveNumber);
  s_cmd->add_option("--out", s_out, "Trajectory CSV (default stdout)");
  s_cmd->add_option("--step", s_step, "RK4 step (default horizon/3000)")->check(CLI::NonNegativeNumber);

  // extremal
  ModelSource e_src;
  std::string target, direction = "max", e_out, e_summary;
  double e_time = 0.0, e_eps = 0.0, e_step = 0.0;
  auto* e_cmd = app.add_subcommand("extremal", "Minimize or maximize a target probability at one time");
  e_src.attach(e_cmd);
  e_cmd->add_option("--target", target, "State name or weights like {S:1,I:1}")->required();
  e_cmd->add_option("--time", e_time, "Target time")->required()->check(CLI::PositiveNumber);
  e_cmd->add_option("--direction", direction, "min or max")->check(CLI::IsMember({"min", "max"}));
  e_cmd->add_option("--eps", e_eps, "State deviation bound")->check(CLI::NonNegativeNumber);
  e_cmd->add_option("--out", e_out, "Trace CSV (default stdout)");
  e_cmd->add_option("--summary", e_summary, "Also write the summary JSON here");
  e_cmd->add_option("--step", e_step, "Solver step (default horizon/3000)")->check(CLI::NonNegativeNumber);

  // bound
  ModelSource b_src;
  double dt = 0.04, eta = 1e-3, b_step = 0.0;
  int max_iter = 50;
  std::string scale = "mass", b_out, b_summary;
  auto* b_cmd = app.add_subcommand("bound", "Certify a reach tube by fixed-point iteration");
  b_src.attach(b_cmd);
  b_cmd->add_option("--dt", dt, "Target time grid spacing")->check(CLI::PositiveNumber);
  b_cmd->add_option("--eta", eta, "Additive iteration slack")->check(CLI::PositiveNumber);
  b_cmd->add_option("--max-iter", max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  b_cmd->add_option("--scale", scale, "mass or unit")->check(CLI::IsMember({"mass", "unit"}));
  b_cmd->add_option("--out", b_out, "Tube CSV (default stdout)");
  b_cmd->add_option("--summary", b_summary, "Also write the summary JSON here");
  b_cmd->add_option("--step", b_step, "Solver and nominal step (default horizon/3000)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Usage;
  }

  try {
    if (*v_cmd) {
      const AgentNetwork an = checked(v_src);
      if (emit_model) std::cout << model_to_json(an).dump(2) << "\n";
      if (dump_envelope) {
        const auto nominal = nominal_trajectory(an, {});
        std::cout << build_envelope(an, nominal.trajectory).dump(v_eps);
      }
      std::cerr << "ok: " << an.num_states() << " states, " << an.parameters.size() << " parameters, "
                << an.reactions.size() << " reactions\n";
      return Ok;
    }

    if (*s_cmd) {
      const AgentNetwork an = checked(s_src);
      if (tend && *tend > an.horizon * (1.0 + 1e-12)) {
        throw UsageError("--tend " + std::to_string(*tend) + " exceeds the model horizon " + std::to_string(an.horizon));
      }
      IntegratorConfig cfg;
      cfg.step = s_step;
      Output out(s_out);
      const auto nominal = nominal_trajectory(an, cfg, tend.value_or(-1.0));
      nominal.trajectory.write_csv(out.stream(), an.state_names());
      return Ok;
    }

    if (*e_cmd) {
      const AgentNetwork an = checked(e_src);
      if (e_time > an.horizon * (1.0 + 1e-12)) throw UsageError("--time exceeds the model horizon");
      TargetSpec spec{parse_target(target, an), e_time, direction == "min" ? Direction::Min : Direction::Max};
      Output out(e_out);
      IntegratorConfig icfg;
      icfg.step = e_step;
      const auto nominal = nominal_trajectory(an, icfg);
      const Envelope env = build_envelope(an, nominal.trajectory);
      const auto sol = solve_extremal(env, spec, e_eps, SolverConfig{e_step, true});
      write_extremal_csv(out.stream(), env, sol);
      emit_summary(extremal_summary(env, spec, e_eps, sol), e_summary, out.to_stdout());
      return Ok;
    }

    if (*b_cmd) {
      const AgentNetwork an = checked(b_src);
      FixedPointConfig cfg;
      cfg.eta = eta;
      cfg.max_iter = max_iter;
      cfg.scale = *parse_scale(scale);
      cfg.integrator.step = b_step;
      cfg.solver_step = b_step;
      cfg.threads = threads;
      Output out(b_out);
      const auto tube = fixed_point_bound(an, GridSpec{dt}, cfg);
      write_tube_csv(out.stream(), tube);
      emit_summary(tube_summary(tube), b_summary, out.to_stdout());
      if (tube.status != TubeStatus::Certified) {
        std::cerr << "not certified: " << tube.message << "\n";
        return NotCertified;
      }
      return Ok;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::InvalidModel:
      case ErrorCode::UnknownSymbol:
      case ErrorCode::NotDivisible:
      case ErrorCode::MixedDenominators:
        return Invalid;
      case ErrorCode::InvalidArgument:
        return Usage;
      default:
        return Failed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Failed;
  }
  return Usage;
}
