#pragma once

#include <cstdint>

#include "agmn/grid.hpp"
#include "agmn/hand_graph.hpp"
#include "agmn/potentials.hpp"

// Brute-force reference implementations. Nothing here calls conv2d_same or
// hadamard, so agreement with the engine is an independent check.
namespace agmn::oracle {

struct EnumerationBudget {
    std::uint64_t max_configs = 200'000'000;
};

/// Number of joint configurations (rows*cols)^n, saturating at UINT64_MAX.
std::uint64_t joint_config_count(const PotentialSet& p);

/// Marginals of prod_i phi_i(x_i) * prod_{(a,b)} kernel_{a->b}[center + x_b - x_a]
/// by full enumeration, normalized per node. Offsets outside the kernel count as
/// zero. Throws Errc::budget_exceeded naming the required count.
TensorStack exact_marginals_bruteforce(const PotentialSet& p, EnumerationBudget budget = {});

/// out[x_to] = sum over x_from of kernel[center + x_to - x_from] * h[x_from]; unnormalized.
Grid2D naive_message(const Grid2D& h, const Grid2D& kernel);

/// naive_message divided by its total, uniform when the total is <= 1e-12.
Grid2D naive_message_normalized(const Grid2D& h, const Grid2D& kernel);

/// Seeded random tree of n nodes (random root, random labels) with potentials
/// drawn uniformly from [0, 1). The reverse channel of every edge is the point
/// reflection of the forward channel, so both directions encode one pairwise term.
PotentialSet random_potentials(std::uint64_t seed, int n, int grid_size, int kernel_size);

/// Random dependency-valid execution order reusing the channel table of `base`.
Schedule random_valid_schedule(const TreeGraph& g, const Schedule& base, std::uint64_t seed);

}  // namespace agmn::oracle
