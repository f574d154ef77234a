#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tilelab/bratteli.hpp"
#include "tilelab/collar.hpp"
#include "tilelab/family.hpp"

namespace tilelab {

enum class CocycleSpace { Prototile, Collared };

CocycleSpace cocycle_space_parse(const std::string& text);

// Transposed transition (or collared) matrices, one per rule: the action of
// one substitution step on top-degree weight vectors.
std::vector<Eigen::MatrixXd> cocycle_matrices(const TypeHFamily& fam, CocycleSpace space,
                                              const CollaredSystem* sys = nullptr);

// A_{x_n} ... A_{x_1} beta with A_r the transpose of mats[r]. The integer
// overload is exact and feeds the geometric cross-checks.
std::vector<std::int64_t> cocycle_apply(const std::vector<IntMatrix>& mats,
                                        const std::vector<int>& word, int n,
                                        std::vector<std::int64_t> beta);
Eigen::VectorXd cocycle_apply(const std::vector<Eigen::MatrixXd>& transposed,
                              const std::vector<int>& word, int n, Eigen::VectorXd beta);

// Sup norm over classes.
double class_norm(const std::vector<double>& beta);
double class_norm(const std::vector<std::int64_t>& beta);

// Complement of the eventual kernel of the transposed products along one
// word: ranks of prefix products stop dropping and stay put for
// `stable_steps` consecutive lengths.
struct StabilizedSubspace {
  int rank = 0;
  int steps = 0;          // prefix length at which the rank settled
  Eigen::MatrixXd basis;  // m x rank, orthonormal
  Eigen::MatrixXd kernel; // m x (m - rank)
};

StabilizedSubspace stabilized_subspace(const std::vector<Eigen::MatrixXd>& transposed,
                                       const std::vector<int>& word, int stable_steps = 3,
                                       int cap = 64);

struct LyapunovReport {
  CocycleSpace space = CocycleSpace::Prototile;
  int dim_space = 0;  // ambient matrix dimension
  int rank = 0;       // exponents computed (restricted rank in collared mode)
  std::vector<double> exponents;   // descending, averaged over samples
  std::vector<double> normalized;  // d lambda_i / lambda_1
  std::vector<int> expanding;      // 1 when lambda_i >= (d-1) lambda_1 / d
  std::vector<double> se;          // standard error over samples
  double lambda1_word_mean = 0.0;  // d * mean(-log theta_{x_i})
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  int burn_in = 0;
};

// QR-accumulated Lyapunov spectrum of the renormalization cocycle along
// `samples` words of length n drawn from the law (sub-seed = seed + index).
// Collared mode restricts to the stabilized subspace of each word.
LyapunovReport lyapunov_spectrum(const TypeHFamily& fam, const SequenceLaw& law, int n,
                                 int samples, std::uint64_t seed,
                                 CocycleSpace space = CocycleSpace::Prototile,
                                 const CollaredSystem* sys = nullptr);

// Finite-time Oseledets data. The product is restricted to the stabilized
// subspace (kernel directions carry -inf and the kernel basis) and is
// accumulated until length n or until its conditioning would exhaust double
// precision, whichever comes first; `length` reports the steps actually
// taken. Nearly-degenerate blocks merge at 1e-8 relative gaps.
struct Filtration {
  std::vector<double> exponents;  // descending; -inf on a vanished direction
  Eigen::MatrixXd basis;          // right singular vectors as columns
  std::vector<int> block;         // merged-block id per column
  int length = 0;

  std::vector<double> coefficients(const Eigen::VectorXd& beta) const;
};

Filtration oseledets_filtration(const std::vector<Eigen::MatrixXd>& transposed,
                                const std::vector<int>& word, int n = 60);

}  // namespace tilelab
