#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbdp/rng.hpp"

namespace dbdp {

// Open-interval convention for uniforms: every produced coordinate is
// clamped into [2^-53, 1 - 2^-53] so that the inverse normal CDF is always
// defined (the index-0 Sobol' point is exactly 0 otherwise).
inline constexpr double kUnitEps = 0x1p-53;

inline double clamp_unit(double u) {
    if (u < kUnitEps) return kUnitEps;
    if (u > 1.0 - kUnitEps) return 1.0 - kUnitEps;
    return u;
}

/// m x s matrix of uniforms, each strictly inside (0,1). Row-major storage,
/// immutable by convention after creation.
struct PointBatch {
    long m = 0;
    int s = 0;
    std::vector<double> values; // m*s, row-major

    double at(long row, int col) const { return values[static_cast<std::size_t>(row) * s + col]; }
};

/// m x s matrix of standard normals (finite entries only).
struct NormalBatch {
    long m = 0;
    int s = 0;
    std::vector<double> values;

    double at(long row, int col) const { return values[static_cast<std::size_t>(row) * s + col]; }
};

enum class ScrambleMode { none, digital_shift, owen_nested };

std::string to_string(ScrambleMode mode);
ScrambleMode scramble_mode_from_string(const std::string& name);

/// Randomization key. Identical key + mode + index always reproduces the
/// same scrambled point.
struct ScrambleKey {
    std::uint64_t seed = 0;
    ScrambleMode mode = ScrambleMode::owen_nested;
};

/// Per-dimension primitive polynomial and initial direction integers, in
/// the widely used Joe-Kuo file layout (one line per dimension d >= 2:
/// "d s a m_1 ... m_s").
class DirectionTable {
  public:
    struct Row {
        std::uint32_t degree;            // s
        std::uint32_t poly;              // a: inner coefficients of the primitive polynomial
        std::vector<std::uint32_t> m;    // s initial direction integers, m_k odd, m_k < 2^k
    };

    /// Compiled-in table covering dimensions 2..160 (dimension 1 is the
    /// built-in van der Corput recurrence).
    static const DirectionTable& builtin();

    /// Parse a direction-number file. Throws ConfigError on malformed rows.
    static DirectionTable load_file(const std::string& path);

    int max_dimension() const { return static_cast<int>(rows_.size()) + 1; }
    const Row& row(int dimension) const { return rows_[static_cast<std::size_t>(dimension) - 2]; }

    explicit DirectionTable(std::vector<Row> rows) : rows_(std::move(rows)) {}

  private:
    std::vector<Row> rows_;
};

inline constexpr int kSobolBits = 32;

/// Sobol' sequence in direct binary order: coordinate j of point n is the
/// XOR of the direction integers selected by the set bits of n. Dimension 1
/// therefore reproduces the base-2 radical-inverse (van der Corput)
/// sequence exactly.
class SobolGenerator {
  public:
    explicit SobolGenerator(int dimension);
    SobolGenerator(int dimension, const DirectionTable& table);

    int dimension() const { return dimension_; }
    std::uint64_t next_index() const { return next_index_; }
    void seek(std::uint64_t index) { next_index_ = index; }

    /// Raw 32-bit integer coordinate of point `index` in dimension `dim`
    /// (0-based), before scrambling.
    std::uint32_t raw_coordinate(std::uint64_t index, int dim) const;

  private:
    int dimension_;
    std::uint64_t next_index_ = 0;
    std::vector<std::uint32_t> directions_; // dimension_ * kSobolBits
};

/// Next m (scrambled) Sobol' points; advances the generator by m.
PointBatch sobol_points(SobolGenerator& gen, const ScrambleKey& key, long m);

/// m x s pseudo-random uniforms from the counter-based generator;
/// deterministic given the seed.
PointBatch mc_points(std::uint64_t rng_seed, long m, int s);

/// Inverse standard normal CDF. |Phi(result) - p| <= 1e-12 for
/// p in [1e-15, 1 - 1e-15]. Throws std::domain_error outside (0,1).
double inverse_normal_cdf(double p);

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

/// Componentwise inverse normal CDF; shape preserved.
NormalBatch to_normals(const PointBatch& batch);

// Scramble primitives, exposed for tests.
namespace scramble {

/// XOR digital shift. Shift zero is the identity.
inline std::uint32_t apply_digital_shift(std::uint32_t x, std::uint32_t shift) { return x ^ shift; }

/// Per-dimension shift bits derived from the key.
std::uint32_t digital_shift_bits(const ScrambleKey& key, int dim);

/// Nested uniform scrambling in base 2: bit b of the output flips according
/// to a keyed hash of (dimension, the bits above b). Equivalent to drawing
/// an independent swap decision at every node of the dyadic interval tree,
/// so the digital-net structure is preserved and each point is marginally
/// uniform over the 32-bit grid.
std::uint32_t apply_owen_nested(std::uint32_t x, const ScrambleKey& key, int dim);

} // namespace scramble

} // namespace dbdp
