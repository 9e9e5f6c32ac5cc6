#pragma once

#include <cstdint>
#include <string>

#include "relaxsim/types.hpp"

namespace relaxsim {

// Disjoint substreams of the counter-based generator. Draws from different
// kinds are independent by construction, so action uniforms never overlap
// with Brownian increments.
enum class StreamKind : std::uint32_t {
    brownian = 0,       // driving Brownian motion W
    brownian_aux = 1,   // independent Brownian motion B
    action = 2,         // per-step action uniforms
};

struct SeedRecord {
    std::uint64_t master_seed = 0;
    std::uint64_t trajectory_index = 0;
};

// One uniform in (0,1), a pure function of (seed, trajectory, kind, index).
// Output is independent of evaluation order and thread count.
double counter_uniform(std::uint64_t master_seed, std::uint64_t trajectory_index,
                       StreamKind kind, std::uint64_t draw_index);

// Action-stream uniform for step n of a trajectory.
double uniform_stream(std::uint64_t master_seed, std::uint64_t trajectory_index,
                      std::uint64_t step_index);

// Per-step, per-component action uniforms: entry (m, j) uses draw index
// m * action_dim + j of the action stream.
Matrix action_uniforms(std::uint64_t master_seed, std::uint64_t trajectory_index,
                       int steps, int action_dim);

// Finest-resolution Brownian increments of one trajectory: row m is
// W(t_{m+1}) - W(t_m) on the uniform grid with fine_steps steps over [0, T],
// each component N(0, T/fine_steps). Regeneration from the same seed record
// is bit-identical.
struct BrownianLattice {
    double horizon = 0.0;
    int fine_steps = 0;
    int dim = 0;
    Matrix increments;   // fine_steps x dim
    SeedRecord seed_record;
};

BrownianLattice generate_lattice(std::uint64_t master_seed, std::uint64_t trajectory_index,
                                 int fine_steps, double horizon, int dim,
                                 StreamKind kind = StreamKind::brownian);

// Sums consecutive fine increments into coarse_steps rows; coarse_steps must
// divide fine_steps. Summation runs in ascending index order so partial sums
// at shared grid nodes coincide across resolutions.
Matrix coarsen(const BrownianLattice& lattice, int coarse_steps);

// Debugging dump: header {T, fine_steps, dim, master_seed, trajectory_index},
// then increments row-major, little-endian 64-bit floats.
void dump_lattice(const BrownianLattice& lattice, const std::string& path);
BrownianLattice load_lattice(const std::string& path);

} // namespace relaxsim
