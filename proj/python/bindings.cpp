#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maestro/commands.hpp"
#include "maestro/env_params.hpp"
#include "maestro/errors.hpp"
#include "maestro/lasertag.hpp"
#include "maestro/lasertag_domain.hpp"
#include "maestro/matrix_lab.hpp"
#include "maestro/uposg.hpp"

namespace py = pybind11;
using namespace maestro;

namespace {

// Runs a CLI command, returning (exit code, stdout, stderr).
template <typename Args>
py::tuple run_command(int (*cmd)(const Args&, std::ostream&, std::ostream&), const Args& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cmd(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

RegretMatrix to_regret_matrix(const Eigen::MatrixXd& m) {
  RegretMatrix r;
  r.regret = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) r.co_players.push_back("π" + std::to_string(i));
  for (Eigen::Index k = 0; k < m.cols(); ++k) r.environments.push_back("θ" + std::to_string(k + 1));
  r.validate();
  return r;
}

py::dict selection_dict(const Selection& s) {
  py::dict d;
  d["row"] = s.row;
  d["col"] = s.col;
  d["value"] = s.value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_maestro, m) {
  m.doc() = "MAESTRO curriculum engine bindings";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);

  // Matrix laboratory.
  m.def("table1", [] {
    const RegretMatrix t = table1_matrix();
    py::dict d;
    d["regret"] = t.regret;
    d["co_players"] = t.co_players;
    d["environments"] = t.environments;
    d["joint"] = selection_dict(joint_argmax(t));
    d["independent"] = selection_dict(independent_argmax(t));
    return d;
  });
  m.def("joint_argmax", [](const Eigen::MatrixXd& r) { return selection_dict(joint_argmax(to_regret_matrix(r))); },
        py::arg("regret"));
  m.def("independent_argmax",
        [](const Eigen::MatrixXd& r) { return selection_dict(independent_argmax(to_regret_matrix(r))); },
        py::arg("regret"));
  m.def("exact_game_value", [](const Eigen::MatrixXd& a) { return exact_game_value(ZeroSumGame{a}); },
        py::arg("payoff"));
  m.def(
      "solve_zero_sum",
      [](const Eigen::MatrixXd& a, double tol, long max_iters) {
        const ZeroSumSolution s = solve_zero_sum(ZeroSumGame{a}, tol, max_iters);
        return py::make_tuple(Eigen::VectorXd(s.row), Eigen::VectorXd(s.col), s.value, s.exploitability);
      },
      py::arg("payoff"), py::arg("tolerance") = 1e-6, py::arg("max_iters") = 1'000'000);

  // Advantage estimation on a bare reward/value sequence.
  m.def(
      "gae",
      [](const std::vector<double>& rewards, const std::vector<double>& values, bool truncated, double bootstrap,
         double gamma, double lambda) {
        Trajectory t;
        for (std::size_t i = 0; i < rewards.size(); ++i) {
          const bool last = i + 1 == rewards.size();
          t.push({}, 0, rewards[i], values.at(i), 0.0, last && !truncated);
        }
        t.truncated = truncated;
        t.bootstrap_value = bootstrap;
        return gae_advantages(t, GaeConfig{gamma, lambda});
      },
      py::arg("rewards"), py::arg("values"), py::arg("truncated") = false, py::arg("bootstrap") = 0.0,
      py::arg("gamma") = 0.995, py::arg("lam") = 0.95);

  // LaserTag.
  m.def("heldout_level_names", [] {
    std::vector<std::string> names;
    for (const auto& l : lasertag::heldout_levels()) names.push_back(l.name);
    return names;
  });
  m.def("heldout_level_text", [](const std::string& name) { return lasertag::render_level(lasertag::heldout_level(name)); },
        py::arg("name"));
  m.def(
      "generate_level",
      [](std::uint64_t seed, int min_size, int max_size, double max_wall_fraction) {
        return lasertag::render_level(lasertag::generate(seed, {min_size, max_size, max_wall_fraction}));
      },
      py::arg("seed"), py::arg("min_size") = lasertag::kMinGridSize, py::arg("max_size") = lasertag::kMaxGridSize,
      py::arg("max_wall_fraction") = 0.5);
  m.def("canonical_level_text", [](const std::string& text) { return lasertag::canonical_level_text(text); });
  m.def("level_hash", [](const std::string& text) {
    return hex64(env_hash(EnvParams{0, lasertag::load_level(text)}));
  });
  m.def(
      "play_match",
      [](const std::string& level_text, const std::string& policy_a, const std::string& policy_b, std::uint64_t seed,
         int max_steps, bool greedy) {
        const auto level = lasertag::load_level(level_text);
        const auto a = nlohmann::json::parse(policy_a).get<PolicyParams>();
        const auto b = nlohmann::json::parse(policy_b).get<PolicyParams>();
        const MatchOutcome o = play_match(level, a, greedy, b, greedy, seed, max_steps);
        return py::make_tuple(o.returns[0], o.returns[1], o.winner, o.length);
      },
      py::arg("level_text"), py::arg("policy_a_json"), py::arg("policy_b_json"), py::arg("seed") = 0,
      py::arg("max_steps") = lasertag::kDefaultMaxEpisodeSteps, py::arg("greedy") = false);

  // Commands; each returns (exit_code, stdout, stderr).
  m.def(
      "train",
      [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::string> out,
         bool deterministic, bool resume) {
        TrainArgs a;
        a.config = config;
        a.seed = seed;
        if (out) a.out = *out;
        a.deterministic = deterministic;
        a.resume = resume;
        return run_command(&cmd_train, a);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("out") = py::none(), py::arg("deterministic") = false,
      py::arg("resume") = false);
  m.def(
      "evaluate",
      [](const std::string& config, std::optional<std::string> out, bool deterministic) {
        EvalArgs a;
        a.config = config;
        if (out) a.out = *out;
        a.deterministic = deterministic;
        return run_command(&cmd_eval, a);
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("deterministic") = false);
  m.def(
      "plot",
      [](const std::string& results, std::optional<std::string> out) {
        PlotArgs a;
        a.results = results;
        if (out) a.out = *out;
        return run_command(&cmd_plot, a);
      },
      py::arg("results"), py::arg("out") = py::none());
  m.def(
      "run_table1",
      [](std::optional<std::string> fixture) {
        Table1Args a;
        if (fixture) a.fixture = *fixture;
        return run_command(&cmd_table1, a);
      },
      py::arg("fixture") = py::none());
}
