#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvlingam/ica.hpp"

namespace lvlingam {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class MatchMethod { Optimal, Greedy };

struct ColumnMatch {
  std::vector<int> perm;       // perm[c] = column of `other` matched to reference column c
  std::vector<double> sign;    // +1 or -1 applied to that column
  double cost = 0.0;
};

/// Pair cost is min over sign of the squared distance between columns.
ColumnMatch match_columns(const MixingMatrix& reference, const MixingMatrix& other,
                          MatchMethod method = MatchMethod::Optimal);

struct BootstrapConfig {
  int reps = 10;
  std::uint64_t seed = 0;
  int restarts = 0;         // random restarts on top of the warm start
  bool warm_start = true;   // start each replicate from the reference mixing
  MatchMethod match = MatchMethod::Optimal;
};

struct BootstrapEnsemble {
  MixingMatrix reference;
  std::vector<MixingMatrix> replicates;         // columns already aligned to `reference`
  std::vector<std::vector<int>> alignment;      // per replicate, as in ColumnMatch::perm
  std::vector<std::string> warnings;
  int k_mismatch = 0;  // replicates whose fit splits a source at the frozen k
};

/// Resamples the reference fit's training data with replacement and refits
/// each resample at the reference k.
BootstrapEnsemble bootstrap_replicates(const MixingEstimate& reference, const IcaConfig& cfg,
                                       const BootstrapConfig& bc);

/// Runs the reference fit on `data` first.
BootstrapEnsemble bootstrap_replicates(const SampleMatrix& data, const IcaConfig& cfg,
                                       const BootstrapConfig& bc);

enum class StderrMode {
  Bootstrap,  // spread of the replicates is the standard error of the estimate
  Mean,       // standard error of the replicate mean, sd / sqrt(B)
};

struct SupportMatrix {
  BoolMatrix support;
  Matrix mean;
  Matrix stderr_;
  double alpha = 0.05;
  int replicates = 0;
  std::vector<int> column_order;  // reference column shown in each position
};

/// Two-sided one-sample t-test of zero per entry with B - 1 degrees of freedom.
SupportMatrix zero_support(const BootstrapEnsemble& ens, double alpha = 0.05,
                           StderrMode mode = StderrMode::Bootstrap);

}  // namespace lvlingam
