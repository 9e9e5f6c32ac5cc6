#include "relaxsim/noise.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "relaxsim/errors.hpp"
#include "relaxsim/normal.hpp"

namespace relaxsim {

namespace {

// Philox4x32-10 block cipher (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3").
constexpr std::uint32_t kW32A = 0x9E3779B9u;
constexpr std::uint32_t kW32B = 0xBB67AE85u;
constexpr std::uint32_t kM4x32A = 0xD2511F53u;
constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hi_lo(kM4x32A, ctr[0], lo0, hi0);
        mul_hi_lo(kM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW32A;
        key[1] += kW32B;
    }
    return ctr;
}

inline std::uint64_t counter_bits(std::uint64_t master_seed, std::uint64_t trajectory_index,
                                  StreamKind kind, std::uint64_t draw_index) {
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(master_seed),
        static_cast<std::uint32_t>(master_seed >> 32) ^ static_cast<std::uint32_t>(kind)};
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(draw_index), static_cast<std::uint32_t>(draw_index >> 32),
        static_cast<std::uint32_t>(trajectory_index),
        static_cast<std::uint32_t>(trajectory_index >> 32)};
    const auto out = philox4x32(ctr, key);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

template <typename T>
void write_le(std::ofstream& os, T value) {
    // Host is little-endian on every supported target.
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

} // namespace

double counter_uniform(std::uint64_t master_seed, std::uint64_t trajectory_index,
                       StreamKind kind, std::uint64_t draw_index) {
    const std::uint64_t bits = counter_bits(master_seed, trajectory_index, kind, draw_index);
    // 53 significant bits, offset by half a step: strictly inside (0,1).
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double uniform_stream(std::uint64_t master_seed, std::uint64_t trajectory_index,
                      std::uint64_t step_index) {
    return counter_uniform(master_seed, trajectory_index, StreamKind::action, step_index);
}

Matrix action_uniforms(std::uint64_t master_seed, std::uint64_t trajectory_index,
                       int steps, int action_dim) {
    if (steps < 0 || action_dim < 1) {
        throw ConfigError("action_uniforms: need steps >= 0 and action_dim >= 1");
    }
    Matrix u(steps, action_dim);
    for (int m = 0; m < steps; ++m) {
        for (int j = 0; j < action_dim; ++j) {
            u(m, j) = counter_uniform(master_seed, trajectory_index, StreamKind::action,
                                      static_cast<std::uint64_t>(m) * action_dim + j);
        }
    }
    return u;
}

BrownianLattice generate_lattice(std::uint64_t master_seed, std::uint64_t trajectory_index,
                                 int fine_steps, double horizon, int dim, StreamKind kind) {
    if (fine_steps < 1) {
        throw ConfigError("generate_lattice: fine_steps must be >= 1");
    }
    if (dim < 1) {
        throw ConfigError("generate_lattice: dim must be >= 1");
    }
    if (!(horizon > 0.0)) {
        throw ConfigError("generate_lattice: horizon must be positive");
    }
    BrownianLattice lattice;
    lattice.horizon = horizon;
    lattice.fine_steps = fine_steps;
    lattice.dim = dim;
    lattice.seed_record = {master_seed, trajectory_index};
    lattice.increments.resize(fine_steps, dim);
    const double scale = std::sqrt(horizon / fine_steps);
    for (int m = 0; m < fine_steps; ++m) {
        for (int j = 0; j < dim; ++j) {
            const double u = counter_uniform(master_seed, trajectory_index, kind,
                                             static_cast<std::uint64_t>(m) * dim + j);
            lattice.increments(m, j) = scale * norm_quantile(u);
        }
    }
    return lattice;
}

Matrix coarsen(const BrownianLattice& lattice, int coarse_steps) {
    if (coarse_steps < 1 || lattice.fine_steps % coarse_steps != 0) {
        throw ConfigError("coarsen: coarse step count " + std::to_string(coarse_steps) +
                          " must divide fine step count " + std::to_string(lattice.fine_steps));
    }
    const int group = lattice.fine_steps / coarse_steps;
    Matrix coarse = Matrix::Zero(coarse_steps, lattice.dim);
    for (int n = 0; n < coarse_steps; ++n) {
        for (int m = n * group; m < (n + 1) * group; ++m) {
            coarse.row(n) += lattice.increments.row(m);
        }
    }
    return coarse;
}

void dump_lattice(const BrownianLattice& lattice, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("dump_lattice: cannot open '" + path + "' for writing");
    }
    write_le(os, lattice.horizon);
    write_le(os, static_cast<std::uint64_t>(lattice.fine_steps));
    write_le(os, static_cast<std::uint64_t>(lattice.dim));
    write_le(os, lattice.seed_record.master_seed);
    write_le(os, lattice.seed_record.trajectory_index);
    for (int m = 0; m < lattice.fine_steps; ++m) {
        for (int j = 0; j < lattice.dim; ++j) {
            write_le(os, lattice.increments(m, j));
        }
    }
    if (!os) {
        throw IoError("dump_lattice: write to '" + path + "' failed");
    }
}

BrownianLattice load_lattice(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("load_lattice: cannot open '" + path + "'");
    }
    BrownianLattice lattice;
    lattice.horizon = read_le<double>(is);
    lattice.fine_steps = static_cast<int>(read_le<std::uint64_t>(is));
    lattice.dim = static_cast<int>(read_le<std::uint64_t>(is));
    lattice.seed_record.master_seed = read_le<std::uint64_t>(is);
    lattice.seed_record.trajectory_index = read_le<std::uint64_t>(is);
    if (!is || lattice.fine_steps < 1 || lattice.dim < 1) {
        throw IoError("load_lattice: malformed header in '" + path + "'");
    }
    lattice.increments.resize(lattice.fine_steps, lattice.dim);
    for (int m = 0; m < lattice.fine_steps; ++m) {
        for (int j = 0; j < lattice.dim; ++j) {
            lattice.increments(m, j) = read_le<double>(is);
        }
    }
    if (!is) {
        throw IoError("load_lattice: truncated data in '" + path + "'");
    }
    return lattice;
}

} // namespace relaxsim
