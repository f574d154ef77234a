#include "tilelab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tilelab {

namespace {

Eigen::MatrixXd transposed_double(const IntMatrix& m) {
  const int n = static_cast<int>(m.size());
  Eigen::MatrixXd out(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = static_cast<double>(m[j][i]);
  return out;
}

}  // namespace

CocycleSpace cocycle_space_parse(const std::string& text) {
  if (text == "uncollared" || text == "prototile") return CocycleSpace::Prototile;
  if (text == "collared") return CocycleSpace::Collared;
  throw std::runtime_error("unknown cocycle space: " + text);
}

std::vector<Eigen::MatrixXd> cocycle_matrices(const TypeHFamily& fam, CocycleSpace space,
                                              const CollaredSystem* sys) {
  std::vector<Eigen::MatrixXd> out;
  for (int r = 0; r < fam.rule_count(); ++r) {
    if (space == CocycleSpace::Prototile) {
      out.push_back(transposed_double(transition_matrix(fam, r)));
    } else {
      if (!sys) throw std::runtime_error("collared cocycle needs a collared system");
      out.push_back(transposed_double(sys->matrices[r]));
    }
  }
  return out;
}

std::vector<std::int64_t> cocycle_apply(const std::vector<IntMatrix>& mats,
                                        const std::vector<int>& word, int n,
                                        std::vector<std::int64_t> beta) {
  for (int i = 0; i < n; ++i) {
    const IntMatrix& m = mats[word[i]];
    std::vector<std::int64_t> next(beta.size(), 0);
    // A = m^T: next_k = sum_j m[j][k] beta_j.
    for (size_t j = 0; j < beta.size(); ++j)
      for (size_t k = 0; k < beta.size(); ++k) next[k] += m[j][k] * beta[j];
    beta.swap(next);
  }
  return beta;
}

Eigen::VectorXd cocycle_apply(const std::vector<Eigen::MatrixXd>& transposed,
                              const std::vector<int>& word, int n, Eigen::VectorXd beta) {
  for (int i = 0; i < n; ++i) beta = transposed[word[i]] * beta;
  return beta;
}

double class_norm(const std::vector<double>& beta) {
  double m = 0.0;
  for (const double v : beta) m = std::max(m, std::abs(v));
  return m;
}

double class_norm(const std::vector<std::int64_t>& beta) {
  std::int64_t m = 0;
  for (const std::int64_t v : beta) m = std::max(m, std::abs(v));
  return static_cast<double>(m);
}

StabilizedSubspace stabilized_subspace(const std::vector<Eigen::MatrixXd>& transposed,
                                       const std::vector<int>& word, int stable_steps,
                                       int cap) {
  if (transposed.empty() || word.empty()) throw std::runtime_error("empty cocycle data");
  const int m = static_cast<int>(transposed[0].rows());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m);
  int last_rank = m;
  int streak = 0;
  int steps = 0;
  const double rel_tol = 1e-9;
  for (int i = 0; i < cap && i < static_cast<int>(word.size()); ++i) {
    p = transposed[word[i]] * p;
    const double top = p.cwiseAbs().maxCoeff();
    if (top > 0) p /= top;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k)
      if (sv(k) > rel_tol * sv(0)) ++rank;
    if (rank == last_rank) {
      if (++streak >= stable_steps) {
        StabilizedSubspace out;
        out.rank = rank;
        out.steps = steps;
        Eigen::JacobiSVD<Eigen::MatrixXd> full(p, Eigen::ComputeFullV);
        out.basis = full.matrixV().leftCols(rank);
        out.kernel = full.matrixV().rightCols(m - rank);
        return out;
      }
    } else {
      last_rank = rank;
      streak = 1;
      steps = i + 1;
    }
  }
  throw std::runtime_error("cocycle rank did not stabilize within the step cap");
}

LyapunovReport lyapunov_spectrum(const TypeHFamily& fam, const SequenceLaw& law, int n,
                                 int samples, std::uint64_t seed, CocycleSpace space,
                                 const CollaredSystem* sys) {
  if (n < 8) throw std::runtime_error("lyapunov needs n >= 8");
  if (samples < 1) throw std::runtime_error("lyapunov needs samples >= 1");
  const std::vector<Eigen::MatrixXd> mats = cocycle_matrices(fam, space, sys);
  const int m = static_cast<int>(mats[0].rows());

  LyapunovReport rep;
  rep.space = space;
  rep.dim_space = m;
  rep.n = n;
  rep.samples = samples;
  rep.seed = seed;

  std::vector<std::vector<double>> per_sample;
  double theta_mean_acc = 0.0;
  int rank = -1;
  for (int s = 0; s < samples; ++s) {
    const std::vector<int> word = law.realize(n, seed + static_cast<std::uint64_t>(s));
    for (const int sym : word) theta_mean_acc += -std::log(fam.rules[sym].theta);

    Eigen::MatrixXd q;
    if (space == CocycleSpace::Collared) {
      const StabilizedSubspace es = stabilized_subspace(mats, word);
      q = es.basis;
    } else {
      q = Eigen::MatrixXd::Identity(m, m);
    }
    const int r = static_cast<int>(q.cols());
    if (rank < 0) rank = r;
    if (r != rank) throw std::runtime_error("stabilized rank varies across samples");

    int burn = std::min(n / 2, 256);
    if (law.kind == SequenceLaw::Kind::Word) {
      const int period = static_cast<int>(law.word.size());
      if (period <= (n - burn) / 2) burn += (n - burn) % period;  // whole periods
    }
    rep.burn_in = burn;

    std::vector<double> acc(r, 0.0);
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXd z = mats[word[i]] * q;
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
      q = qr.householderQ() * Eigen::MatrixXd::Identity(m, r);
      const Eigen::MatrixXd rmat =
          qr.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
      if (i >= burn) {
        for (int j = 0; j < r; ++j) {
          const double d = std::abs(rmat(j, j));
          acc[j] += d > 0 ? std::log(d) : -746.0;
        }
      }
    }
    for (double& a : acc) a /= (n - burn);
    std::sort(acc.begin(), acc.end(), std::greater<double>());
    per_sample.push_back(std::move(acc));
  }

  rep.rank = rank;
  rep.exponents.assign(rank, 0.0);
  rep.se.assign(rank, 0.0);
  for (int j = 0; j < rank; ++j) {
    double mean = 0.0;
    for (const auto& v : per_sample) mean += v[j];
    mean /= samples;
    rep.exponents[j] = mean;
    if (samples > 1) {
      double var = 0.0;
      for (const auto& v : per_sample) var += (v[j] - mean) * (v[j] - mean);
      rep.se[j] = std::sqrt(var / (samples - 1)) / std::sqrt(double(samples));
    }
  }

  rep.lambda1_word_mean = fam.dim * theta_mean_acc / (double(n) * samples);
  const double lambda1 = rep.exponents.empty() ? 0.0 : rep.exponents[0];
  const double threshold = (fam.dim - 1) * lambda1 / fam.dim - 1e-9;
  for (int j = 0; j < rank; ++j) {
    rep.normalized.push_back(lambda1 > 0 ? fam.dim * rep.exponents[j] / lambda1 : 0.0);
    rep.expanding.push_back(rep.exponents[j] >= threshold ? 1 : 0);
  }
  return rep;
}

Filtration oseledets_filtration(const std::vector<Eigen::MatrixXd>& transposed,
                                const std::vector<int>& word, int n) {
  if (n < 1 || n > static_cast<int>(word.size()))
    throw std::runtime_error("filtration length out of range");
  const int m = static_cast<int>(transposed[0].rows());
  const StabilizedSubspace es = stabilized_subspace(transposed, word, 3, std::min(n, 64));
  const int r = es.rank;

  Eigen::MatrixXd p = es.basis;  // m x r, restriction of the product to ES
  double log_scale = 0.0;
  int length = 0;
  Eigen::MatrixXd best_p = p;
  double best_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd next = transposed[word[i]] * p;
    double scale = log_scale;
    const double top = next.cwiseAbs().maxCoeff();
    if (top > 0) {
      next /= top;
      scale += std::log(top);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> probe(next);
    const auto& sv = probe.singularValues();
    if (length > 0 && sv(r - 1) < 1e-12 * sv(0)) break;  // precision exhausted
    p = std::move(next);
    log_scale = scale;
    ++length;
    best_p = p;
    best_scale = log_scale;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(best_p, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();

  Filtration out;
  out.length = length;
  out.basis.resize(m, m);
  out.basis.leftCols(r) = es.basis * svd.matrixV();
  out.basis.rightCols(m - r) = es.kernel;
  for (int k = 0; k < r; ++k)
    out.exponents.push_back(sv(k) > 0 ? (std::log(sv(k)) + best_scale) / length
                                      : -std::numeric_limits<double>::infinity());
  for (int k = r; k < m; ++k)
    out.exponents.push_back(-std::numeric_limits<double>::infinity());
  out.block.assign(m, 0);
  for (int k = 1; k < m; ++k) {
    const double a = out.exponents[k - 1], b = out.exponents[k];
    const bool merged = (std::isinf(a) && std::isinf(b)) ||
                        std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a));
    out.block[k] = out.block[k - 1] + (merged ? 0 : 1);
  }
  return out;
}

std::vector<double> Filtration::coefficients(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd a = basis.transpose() * beta;
  return std::vector<double>(a.data(), a.data() + a.size());
}

}  // namespace tilelab
