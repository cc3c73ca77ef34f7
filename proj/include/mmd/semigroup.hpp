#pragma once

// Free semigroup actions generated by finitely many interval maps: the
// union-graph (Friedland) upper bound and random-walk separated counts.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmd/entropy.hpp"

namespace mmd {

/// i.i.d. letters with the given probabilities.
struct Bernoulli {
    std::vector<double> weights;
};

/// Finite mixture of Dirac masses on periodic sequences.
struct AtomicPeriodic {
    std::vector<std::vector<std::uint32_t>> words;  // one period each
    std::vector<double> weights;
};

struct RandomWalk {
    std::variant<Bernoulli, AtomicPeriodic> law;
    std::uint64_t seed = 0;
};

RandomWalk bernoulli_walk(std::vector<double> weights, std::uint64_t seed = 0);
RandomWalk atomic_walk(std::vector<std::vector<std::uint32_t>> words, std::vector<double> weights);
/// 1/2 (delta_(12)^N + delta_(21)^N).
RandomWalk alternating_walk();

struct SemigroupSpec {
    std::vector<MapPtr> generators;
    RandomWalk walk;

    /// Shared base, nonempty list, weights summing to 1, letters in range.
    void validate() const;
};

/// g1 = 0 on [0,1/2], T(2x-1)/2 on [1/2,1] with T the boxes map;
/// g2 = x + 1/2 on [0,1/2], 1 on [1/2,1].
std::vector<MapPtr> make_prop49_pair(std::size_t k_max = 20, std::size_t piece_budget = 100000);

/// (1/n) log of the walk-averaged separated count under d_{w,n}.
double walk_entropy(const SemigroupSpec& spec, double eps, std::size_t n, std::size_t samples = 64);

/// Averaged separated count before the logarithm.
double walk_average_count(const SemigroupSpec& spec, double eps, std::size_t n,
                          std::size_t samples = 64);

/// Spectral upper bound for the union of the generator graphs.
double friedland_upper(const SemigroupSpec& spec, double eps);

struct SemigroupRecord {
    double eps = 0.0;
    double walk = 0.0;
    double friedland = 0.0;
};

struct SemigroupEstimate {
    std::size_t n = 0;
    double slope_lower = 0.0;
    double slope_upper = 0.0;
    double residual_lower = 0.0;
    double residual_upper = 0.0;
    std::vector<SemigroupRecord> records;
};

SemigroupEstimate semigroup_ladder(const SemigroupSpec& spec, std::span<const double> ladder,
                                   std::size_t n, std::size_t samples = 64);

/// `epsilon,n,h_lower,h_upper,method_lower,method_upper` rows for a semigroup run.
std::string semigroup_csv(const SemigroupEstimate& est);

}  // namespace mmd
