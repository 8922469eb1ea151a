#pragma once

#include "bdbc/blockstruct.hpp"
#include "bdbc/core_stats.hpp"
#include "bdbc/types.hpp"

#include <cstdint>
#include <vector>

namespace bdbc {

/// n i.i.d. draws from N(mean, cov) as mean + L z.
DataMatrix sample_mvn(const Vector& mean, const Matrix& cov, int n, std::uint64_t seed);

/// A Gaussian design with a known generating partition.
struct BlockDesign {
  Vector mean;
  Matrix cov;
  ColumnGrouping grouping;
};

/// p = 8, three blocks {0,1,2}{3,4,5}{6,7}, non-negative within-block
/// covariances; mean (0, ..., 7).
BlockDesign make_sigma_A();
/// Same layout as make_sigma_A with some negative within-block covariances.
BlockDesign make_sigma_B();

/// p = 12, three blocks of four, diagonal 4.5, within-block off-diagonal 2
/// (positive) or -1 (negative); mean (1, ..., 12).
BlockDesign make_mape_design(bool positive);

/// Block-diagonal Gram blocks A'A (A is p/k square, entries U(1, 2)) plus
/// noise_weight * E'E (E is p x p, entries U(0, 1)); mean entries U(0, 1).
/// Throws InputError unless k divides p.
BlockDesign make_random_block_cov(int p, int k, std::uint64_t seed, double noise_weight = 0.5);

struct MixtureComponentSpec {
  double weight = 0.0;
  Vector mean;
  Matrix cov;
  ColumnGrouping grouping; // generating partition; one group when cov is dense
};

/// Three components in p = 8 with block-diagonal covariances; the third has
/// two blocks (sizes 5 and 3).
std::vector<MixtureComponentSpec> make_scenario1();
/// The scenario-1 means with dense Sigma_g = A_g'A_g, A_g entries U(0, 1).
std::vector<MixtureComponentSpec> make_scenario2(std::uint64_t seed);

struct MixtureSample {
  DataMatrix data;
  Labels labels; // generating component of each row
};

/// n_per_component rows from each component, component 0 first.
MixtureSample sample_mixture(const std::vector<MixtureComponentSpec>& components,
                             int n_per_component, std::uint64_t seed);

} // namespace bdbc
