#include "maestro/matrix_lab.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "maestro/embedded_data.hpp"
#include "maestro/errors.hpp"

namespace maestro {

namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

MixedStrategy regret_strategy(const Eigen::VectorXd& positive_regret) {
  const double total = positive_regret.sum();
  if (total <= 0.0) return uniform_strategy(static_cast<int>(positive_regret.size()));
  return positive_regret / total;
}

}  // namespace

void check_strategy(const MixedStrategy& s, const char* what) {
  if (s.size() == 0) throw ParameterError(std::string(what) + ": empty strategy");
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0.0) || !std::isfinite(s[i])) throw ParameterError(std::string(what) + ": negative probability");
  }
  if (std::abs(s.sum() - 1.0) > 1e-9) throw ParameterError(std::string(what) + ": probabilities must sum to 1");
}

MixedStrategy uniform_strategy(int n) {
  if (n < 1) throw ParameterError("uniform_strategy: n must be positive");
  return MixedStrategy::Constant(n, 1.0 / n);
}

MixedStrategy pure_strategy(int n, int index) {
  if (index < 0 || index >= n) throw ParameterError("pure_strategy: index out of range");
  MixedStrategy s = MixedStrategy::Zero(n);
  s[index] = 1.0;
  return s;
}

void RegretMatrix::validate() const {
  if (regret.size() == 0) throw ParameterError("RegretMatrix: empty matrix");
  if (static_cast<Eigen::Index>(co_players.size()) != regret.rows() ||
      static_cast<Eigen::Index>(environments.size()) != regret.cols()) {
    throw ParameterError("RegretMatrix: label counts do not match the matrix shape");
  }
  if (!regret.allFinite() || regret.minCoeff() < 0.0) {
    throw ParameterError("RegretMatrix: entries must be finite and non-negative");
  }
}

void ZeroSumGame::validate() const {
  if (payoff.size() == 0) throw ParameterError("ZeroSumGame: empty payoff matrix");
  if (!payoff.allFinite()) throw ParameterError("ZeroSumGame: non-finite payoff");
}

Selection joint_argmax(const RegretMatrix& m) {
  if (m.regret.size() == 0) throw ParameterError("joint_argmax: empty matrix");
  Selection best{0, 0, m.regret(0, 0)};
  for (int r = 0; r < m.regret.rows(); ++r) {
    for (int c = 0; c < m.regret.cols(); ++c) {
      if (m.regret(r, c) > best.value) best = {r, c, m.regret(r, c)};
    }
  }
  return best;
}

Selection independent_argmax(const RegretMatrix& m) {
  if (m.regret.size() == 0) throw ParameterError("independent_argmax: empty matrix");
  const Eigen::VectorXd row_means = m.regret.rowwise().mean();
  const Eigen::VectorXd col_means = m.regret.colwise().mean().transpose();
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  // maxCoeff returns the first maximal index, matching the tie rule.
  row_means.maxCoeff(&row);
  col_means.maxCoeff(&col);
  return {static_cast<int>(row), static_cast<int>(col), m.regret(row, col)};
}

std::vector<LabeledMatrix> parse_matrices(std::string_view text) {
  std::vector<LabeledMatrix> out;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::size_t line_no = 0;

  auto flush = [&](std::size_t at_line) {
    if (rows.empty()) {
      if (!row_labels.empty() || !col_labels.empty()) {
        throw ParseError("label directive without a matrix", at_line, 1);
      }
      return;
    }
    LabeledMatrix m;
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    if (row_labels.empty()) {
      for (std::size_t r = 0; r < rows.size(); ++r) row_labels.push_back("r" + std::to_string(r));
    }
    if (col_labels.empty()) {
      for (std::size_t c = 0; c < rows[0].size(); ++c) col_labels.push_back("c" + std::to_string(c));
    }
    if (row_labels.size() != rows.size() || col_labels.size() != rows[0].size()) {
      throw ParseError("label count does not match the matrix shape", at_line, 1);
    }
    m.row_labels = std::move(row_labels);
    m.col_labels = std::move(col_labels);
    out.push_back(std::move(m));
    rows.clear();
    row_labels.clear();
    col_labels.clear();
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
      flush(line_no);
      if (end == text.size()) break;
      continue;
    }
    if (line[first] == '#') {
      std::string_view body = line.substr(first + 1);
      if (!body.empty() && body.front() == '!') {
        const auto words = split_words(body.substr(1));
        if (words.empty()) throw ParseError("empty directive", line_no, first + 1);
        std::vector<std::string> labels(words.begin() + 1, words.end());
        if (words[0] == "rows:") {
          row_labels = labels;
        } else if (words[0] == "cols:") {
          col_labels = labels;
        } else {
          throw ParseError("unknown directive '" + words[0] + "'", line_no, first + 1);
        }
      }
      if (end == text.size()) break;
      continue;
    }

    std::vector<double> row;
    std::size_t pos = first;
    while (pos < line.size()) {
      const std::size_t token_end = std::min(line.find_first_of(" \t", pos), line.size());
      const std::string token(line.substr(pos, token_end - pos));
      try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("not a real number: '" + token + "'", line_no, pos + 1);
      }
      pos = line.find_first_not_of(" \t", token_end);
      if (pos == std::string_view::npos) break;
    }
    if (!rows.empty() && row.size() != rows[0].size()) {
      throw ParseError("ragged row: expected " + std::to_string(rows[0].size()) + " entries", line_no, first + 1);
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  flush(line_no);
  return out;
}

RegretMatrix load_regret_matrix(std::string_view text) {
  auto matrices = parse_matrices(text);
  if (matrices.size() != 1) throw ParseError("expected exactly one matrix", 0, 0);
  RegretMatrix m{std::move(matrices[0].row_labels), std::move(matrices[0].col_labels),
                 std::move(matrices[0].values)};
  m.validate();
  return m;
}

std::vector<ZeroSumGame> load_games(std::string_view text) {
  std::vector<ZeroSumGame> games;
  for (auto& m : parse_matrices(text)) games.push_back(ZeroSumGame{std::move(m.values)});
  return games;
}

RegretMatrix table1_matrix() { return load_regret_matrix(embedded::table1_fixture()); }

double best_row_payoff(const ZeroSumGame& g, const MixedStrategy& col) { return (g.payoff * col).maxCoeff(); }

double worst_col_payoff(const ZeroSumGame& g, const MixedStrategy& row) {
  return (row.transpose() * g.payoff).minCoeff();
}

double exploitability(const ZeroSumGame& g, const MixedStrategy& row, const MixedStrategy& col) {
  g.validate();
  if (row.size() != g.payoff.rows() || col.size() != g.payoff.cols()) {
    throw ParameterError("exploitability: strategy dimensions do not match the game");
  }
  return best_row_payoff(g, col) - worst_col_payoff(g, row);
}

namespace {

// Solves the indifference equations on the supports suggested by the averaged
// strategies. Returns false when the supports are degenerate or the solution
// leaves the simplex.
bool polish_on_support(const Eigen::MatrixXd& a, const MixedStrategy& x_avg, const MixedStrategy& y_avg,
                       MixedStrategy& x_out, MixedStrategy& y_out) {
  constexpr double kSupportThreshold = 1e-3;
  std::vector<Eigen::Index> s, t;
  for (Eigen::Index i = 0; i < x_avg.size(); ++i) if (x_avg[i] > kSupportThreshold) s.push_back(i);
  for (Eigen::Index j = 0; j < y_avg.size(); ++j) if (y_avg[j] > kSupportThreshold) t.push_back(j);
  if (s.empty() || s.size() != t.size()) return false;
  const Eigen::Index k = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = a(s[i], t[j]);
  // [sub^T -1; 1 0] (x, v) = (0, 1), and the same for y with sub.
  auto solve = [k](const Eigen::MatrixXd& m, Eigen::VectorXd& out) {
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k + 1, k + 1);
    sys.topLeftCorner(k, k) = m;
    sys.topRightCorner(k, 1).setConstant(-1.0);
    sys.bottomLeftCorner(1, k).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs(k) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (!lu.isInvertible()) return false;
    out = lu.solve(rhs).head(k);
    return (out.array() >= 0.0).all();
  };
  Eigen::VectorXd xs, ys;
  if (!solve(sub.transpose(), xs) || !solve(sub, ys)) return false;
  x_out = Eigen::VectorXd::Zero(a.rows());
  y_out = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    x_out[s[i]] = xs[i];
    y_out[t[i]] = ys[i];
  }
  x_out /= x_out.sum();
  y_out /= y_out.sum();
  return true;
}

}  // namespace

ZeroSumSolution solve_zero_sum(const ZeroSumGame& g, double tolerance, long max_iters) {
  g.validate();
  if (!(tolerance > 0.0)) throw ParameterError("solve_zero_sum: tolerance must be positive");
  if (max_iters < 1) throw ParameterError("solve_zero_sum: max_iters must be positive");
  const Eigen::MatrixXd& a = g.payoff;
  Eigen::VectorXd row_regret = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd col_regret = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(a.rows());
  Eigen::VectorXd col_sum = Eigen::VectorXd::Zero(a.cols());

  ZeroSumSolution sol;
  long check_at = 1;
  for (long t = 1; t <= max_iters; ++t) {
    const MixedStrategy y = regret_strategy(col_regret);
    const Eigen::VectorXd row_u = a * y;
    const MixedStrategy x_before = regret_strategy(row_regret);
    row_regret = (row_regret.array() + row_u.array() - x_before.dot(row_u)).max(0.0);
    const MixedStrategy x = regret_strategy(row_regret);
    const Eigen::VectorXd col_u = -(x.transpose() * a).transpose();
    col_regret = (col_regret.array() + col_u.array() - y.dot(col_u)).max(0.0);

    row_sum += static_cast<double>(t) * x;
    col_sum += static_cast<double>(t) * y;

    if (t == check_at || t == max_iters) {
      check_at = t + std::max(1L, t / 8);
      sol.row = row_sum / row_sum.sum();
      sol.col = col_sum / col_sum.sum();
      sol.exploitability = exploitability(g, sol.row, sol.col);
      sol.iterations = t;
      MixedStrategy px, py;
      if (sol.exploitability > tolerance && polish_on_support(a, sol.row, sol.col, px, py)) {
        const double e = exploitability(g, px, py);
        if (e < sol.exploitability) {
          sol.row = px;
          sol.col = py;
          sol.exploitability = e;
        }
      }
      if (sol.exploitability <= tolerance) {
        sol.value = 0.5 * (best_row_payoff(g, sol.col) + worst_col_payoff(g, sol.row));
        return sol;
      }
    }
  }
  throw ConvergenceError("solve_zero_sum: exploitability " + std::to_string(sol.exploitability) +
                             " above tolerance after " + std::to_string(max_iters) + " iterations",
                         sol.exploitability);
}

double exact_game_value(const ZeroSumGame& g) {
  g.validate();
  const int m = g.rows();
  const int n = g.cols();
  if (m > 8 || n > 8) throw ParameterError("exact_game_value: games larger than 8x8 are not supported");
  const Eigen::MatrixXd& a = g.payoff;
  double best = -std::numeric_limits<double>::infinity();
  const double eps = 1e-12;

  // Each vertex of {(x, v): x in simplex, x^T A e_j >= v} fixes a row support S
  // and an equally sized set T of tight columns.
  for (unsigned rows_mask = 1; rows_mask < (1u << m); ++rows_mask) {
    std::vector<int> s;
    for (int i = 0; i < m; ++i) if (rows_mask & (1u << i)) s.push_back(i);
    const int k = static_cast<int>(s.size());
    for (unsigned cols_mask = 1; cols_mask < (1u << n); ++cols_mask) {
      if (__builtin_popcount(cols_mask) != k) continue;
      std::vector<int> t;
      for (int j = 0; j < n; ++j) if (cols_mask & (1u << j)) t.push_back(j);
      // Unknowns (x_S, v): sum_i x_i A(i, t_j) - v = 0 for each j, sum x = 1.
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k + 1, k + 1);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) sys(j, i) = a(s[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)]);
        sys(j, k) = -1.0;
      }
      for (int i = 0; i < k; ++i) sys(k, i) = 1.0;
      rhs(k) = 1.0;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd sol = lu.solve(rhs);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
      bool feasible = true;
      for (int i = 0; i < k; ++i) {
        if (sol(i) < -1e-9) feasible = false;
        x(s[static_cast<std::size_t>(i)]) = std::max(0.0, sol(i));
      }
      if (!feasible) continue;
      x /= x.sum();
      const double guaranteed = (x.transpose() * a).minCoeff();
      if (guaranteed > best + eps) best = guaranteed;
    }
  }
  return best;
}

double true_regret(const ZeroSumGame& g, const MixedStrategy& student, const MixedStrategy& opponent) {
  g.validate();
  if (student.size() != g.payoff.rows() || opponent.size() != g.payoff.cols()) {
    throw ParameterError("true_regret: strategy dimensions do not match the game");
  }
  const Eigen::VectorXd u = g.payoff * opponent;
  return std::max(0.0, u.maxCoeff() - student.dot(u));
}

Corollary1Report verify_corollary1(const std::vector<ZeroSumGame>& games, const MixedStrategy& env_distribution,
                                   const std::vector<MixedStrategy>& students, double tolerance) {
  if (env_distribution.size() != static_cast<Eigen::Index>(games.size())) {
    throw ParameterError("verify_corollary1: distribution size does not match the game list");
  }
  if (students.size() != games.size()) throw ParameterError("verify_corollary1: one student per game required");
  Corollary1Report report;
  report.passed = true;
  for (std::size_t i = 0; i < games.size(); ++i) {
    const bool in_support = env_distribution[static_cast<Eigen::Index>(i)] > 0.0;
    report.supported.push_back(in_support);
    if (!in_support) {
      report.exploitability.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    check_strategy(students[i], "verify_corollary1");
    if (students[i].size() != games[i].payoff.rows()) {
      throw ParameterError("verify_corollary1: student dimension does not match its game");
    }
    const double e = std::max(0.0, exact_game_value(games[i]) - worst_col_payoff(games[i], students[i]));
    report.exploitability.push_back(e);
    report.worst = std::max(report.worst, e);
    if (e > tolerance) report.passed = false;
  }
  return report;
}

}  // namespace maestro
