#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace maestro {

// Probability vector. Entries >= 0 summing to 1.
using MixedStrategy = Eigen::VectorXd;

void check_strategy(const MixedStrategy& s, const char* what);
MixedStrategy uniform_strategy(int n);
MixedStrategy pure_strategy(int n, int index);

// Student regret per (co-player, environment); rows are co-players.
struct RegretMatrix {
  std::vector<std::string> co_players;
  std::vector<std::string> environments;
  Eigen::MatrixXd regret;

  void validate() const;
};

// Row player's payoff; the column player receives the negation.
struct ZeroSumGame {
  Eigen::MatrixXd payoff;

  int rows() const { return static_cast<int>(payoff.rows()); }
  int cols() const { return static_cast<int>(payoff.cols()); }
  void validate() const;
};

struct Selection {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Maximal entry, ties to the lowest (row, col) lexicographically.
Selection joint_argmax(const RegretMatrix& m);
// argmax of row means and argmax of column means, chosen independently.
Selection independent_argmax(const RegretMatrix& m);

// Text matrices: rows of whitespace-separated reals, '#' comments, blank
// lines between matrices, optional "#! rows: ..." and "#! cols: ..." label
// directives preceding a matrix.
struct LabeledMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd values;
};
std::vector<LabeledMatrix> parse_matrices(std::string_view text);
RegretMatrix load_regret_matrix(std::string_view text);
std::vector<ZeroSumGame> load_games(std::string_view text);
// The bundled 3x4 co-player by environment regret matrix.
RegretMatrix table1_matrix();

// Best-response payoffs.
double best_row_payoff(const ZeroSumGame& g, const MixedStrategy& col);
double worst_col_payoff(const ZeroSumGame& g, const MixedStrategy& row);
// Gain available to both players by unilateral deviation, summed.
double exploitability(const ZeroSumGame& g, const MixedStrategy& row, const MixedStrategy& col);

struct ZeroSumSolution {
  MixedStrategy row;
  MixedStrategy col;
  double value = 0.0;
  double exploitability = 0.0;
  long iterations = 0;
};

// Regret matching+ with alternating updates and linearly weighted averages.
// At each check the supports of the averages are also solved exactly, and the
// better pair by exact exploitability is kept. Stops once that exploitability
// is <= tolerance; throws ConvergenceError otherwise.
ZeroSumSolution solve_zero_sum(const ZeroSumGame& g, double tolerance, long max_iters);

// Game value by enumerating square support systems of the row player's linear
// program. Exact up to floating point; intended for games of at most 8x8.
double exact_game_value(const ZeroSumGame& g);

// max over pure rows of payoff(row, opponent) minus payoff(student, opponent).
double true_regret(const ZeroSumGame& g, const MixedStrategy& student, const MixedStrategy& opponent);

struct Corollary1Report {
  std::vector<bool> supported;
  // value(g) minus the student's guaranteed payoff; NaN outside the support.
  std::vector<double> exploitability;
  double worst = 0.0;
  bool passed = false;
};

Corollary1Report verify_corollary1(const std::vector<ZeroSumGame>& games, const MixedStrategy& env_distribution,
                                   const std::vector<MixedStrategy>& students, double tolerance);

}  // namespace maestro
