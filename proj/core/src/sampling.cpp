#include "dbdp/sampling.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dbdp/errors.hpp"

namespace dbdp {

std::string to_string(ScrambleMode mode) {
    switch (mode) {
    case ScrambleMode::none: return "none";
    case ScrambleMode::digital_shift: return "digital_shift";
    case ScrambleMode::owen_nested: return "owen_nested";
    }
    return "none";
}

ScrambleMode scramble_mode_from_string(const std::string& name) {
    if (name == "none") return ScrambleMode::none;
    if (name == "digital_shift") return ScrambleMode::digital_shift;
    if (name == "owen_nested") return ScrambleMode::owen_nested;
    throw ConfigError("unknown scramble mode '" + name + "'");
}

DirectionTable DirectionTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open direction-number file '" + path + "'");

    std::vector<Row> rows;
    std::string line;
    int lineno = 0;
    int expected_dim = 2;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::uint32_t d;
        if (!(ls >> d)) continue; // header or blank line
        Row row;
        if (!(ls >> row.degree >> row.poly))
            throw ConfigError("malformed direction-number row", lineno);
        if (d != static_cast<std::uint32_t>(expected_dim))
            throw ConfigError("direction-number rows must cover dimensions 2,3,... in order",
                              lineno);
        row.m.resize(row.degree);
        for (std::uint32_t k = 0; k < row.degree; ++k) {
            if (!(ls >> row.m[k]))
                throw ConfigError("expected " + std::to_string(row.degree) +
                                      " direction integers",
                                  lineno);
            if (row.m[k] % 2 == 0 || row.m[k] >= (1u << (k + 1)))
                throw ConfigError("direction integer m_" + std::to_string(k + 1) +
                                      " must be odd and < 2^" + std::to_string(k + 1),
                                  lineno);
        }
        rows.push_back(std::move(row));
        ++expected_dim;
    }
    if (rows.empty()) throw ConfigError("direction-number file '" + path + "' has no rows");
    return DirectionTable(std::move(rows));
}

SobolGenerator::SobolGenerator(int dimension) : SobolGenerator(dimension, DirectionTable::builtin()) {}

SobolGenerator::SobolGenerator(int dimension, const DirectionTable& table) : dimension_(dimension) {
    if (dimension < 1) throw ConfigError("Sobol' dimension must be >= 1");
    if (dimension > table.max_dimension())
        throw ConfigError("Sobol' dimension " + std::to_string(dimension) +
                          " exceeds the shipped direction-number table (max " +
                          std::to_string(table.max_dimension()) + ")");

    directions_.assign(static_cast<std::size_t>(dimension) * kSobolBits, 0);
    // Dimension 1: plain van der Corput, v_k = 2^(32-k).
    for (int k = 1; k <= kSobolBits; ++k)
        directions_[static_cast<std::size_t>(k - 1)] = 1u << (kSobolBits - k);

    for (int dim = 2; dim <= dimension; ++dim) {
        const DirectionTable::Row& row = table.row(dim);
        const int s = static_cast<int>(row.degree);
        std::uint32_t* v = &directions_[static_cast<std::size_t>(dim - 1) * kSobolBits];
        for (int k = 1; k <= s && k <= kSobolBits; ++k) v[k - 1] = row.m[k - 1] << (kSobolBits - k);
        for (int k = s + 1; k <= kSobolBits; ++k) {
            std::uint32_t value = v[k - s - 1] ^ (v[k - s - 1] >> s);
            for (int i = 1; i <= s - 1; ++i)
                if ((row.poly >> (s - 1 - i)) & 1u) value ^= v[k - i - 1];
            v[k - 1] = value;
        }
    }
}

std::uint32_t SobolGenerator::raw_coordinate(std::uint64_t index, int dim) const {
    const std::uint32_t* v = &directions_[static_cast<std::size_t>(dim) * kSobolBits];
    std::uint32_t x = 0;
    int k = 0;
    for (std::uint64_t n = index; n != 0; n >>= 1, ++k)
        if (n & 1u) x ^= v[k];
    return x;
}

namespace scramble {

std::uint32_t digital_shift_bits(const ScrambleKey& key, int dim) {
    return static_cast<std::uint32_t>(
        mix64(key.seed ^ mix64(static_cast<std::uint64_t>(dim) + kGolden)) >> 32);
}

std::uint32_t apply_owen_nested(std::uint32_t x, const ScrambleKey& key, int dim) {
    const std::uint64_t dim_key = mix64(key.seed ^ mix64(static_cast<std::uint64_t>(dim) + kGolden));
    std::uint32_t y = 0;
    for (int level = 0; level < kSobolBits; ++level) {
        // Node id of the dyadic interval holding the point at this level:
        // the `level` most significant original bits, offset by 2^level so
        // ids are unique across levels.
        const std::uint64_t prefix = level == 0 ? 0 : (x >> (kSobolBits - level));
        const std::uint64_t node = (1ULL << level) | prefix;
        const std::uint32_t bit = (x >> (kSobolBits - 1 - level)) & 1u;
        // The node id is small and structured; spread it across the word
        // before mixing or the top bit shows detectable bias.
        const std::uint32_t flip = static_cast<std::uint32_t>(mix64(dim_key + node * kGolden) >> 63);
        y |= (bit ^ flip) << (kSobolBits - 1 - level);
    }
    return y;
}

} // namespace scramble

PointBatch sobol_points(SobolGenerator& gen, const ScrambleKey& key, long m) {
    if (m < 1) throw std::invalid_argument("sobol_points: m must be >= 1");
    const int s = gen.dimension();
    PointBatch batch;
    batch.m = m;
    batch.s = s;
    batch.values.resize(static_cast<std::size_t>(m) * s);

    const std::uint64_t start = gen.next_index();
    constexpr double scale = 1.0 / 4294967296.0; // 2^-32
    for (int dim = 0; dim < s; ++dim) {
        const std::uint32_t shift = key.mode == ScrambleMode::digital_shift
                                        ? scramble::digital_shift_bits(key, dim)
                                        : 0u;
        for (long row = 0; row < m; ++row) {
            std::uint32_t x = gen.raw_coordinate(start + static_cast<std::uint64_t>(row), dim);
            switch (key.mode) {
            case ScrambleMode::none: break;
            case ScrambleMode::digital_shift: x = scramble::apply_digital_shift(x, shift); break;
            case ScrambleMode::owen_nested: x = scramble::apply_owen_nested(x, key, dim); break;
            }
            batch.values[static_cast<std::size_t>(row) * s + dim] = clamp_unit(x * scale);
        }
    }
    gen.seek(start + static_cast<std::uint64_t>(m));
    return batch;
}

PointBatch mc_points(std::uint64_t rng_seed, long m, int s) {
    if (m < 1 || s < 1) throw std::invalid_argument("mc_points: m and s must be >= 1");
    PointBatch batch;
    batch.m = m;
    batch.s = s;
    batch.values.resize(static_cast<std::size_t>(m) * s);
    CounterRng rng(rng_seed);
    for (double& v : batch.values) v = clamp_unit(rng.next_unit());
    return batch;
}

namespace {

// Acklam's rational approximation to the inverse normal CDF, followed by
// one Halley step against the erfc-based CDF. The refinement brings the
// composition error |Phi(x) - p| below 1e-14 across [1e-15, 1 - 1e-15].
double inverse_normal_initial(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: p must lie strictly inside (0,1)");
    // Upper half by symmetry; 1 - p is exact for p >= 0.5, and the lower
    // half evaluates Phi without cancellation.
    if (p > 0.5) return -inverse_normal_cdf(1.0 - p);
    double x = inverse_normal_initial(p);
    // Halley refinement: e = Phi(x) - p, u = e / phi(x).
    const double e = normal_cdf(x) - p;
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

NormalBatch to_normals(const PointBatch& batch) {
    NormalBatch out;
    out.m = batch.m;
    out.s = batch.s;
    out.values.resize(batch.values.size());
    for (std::size_t i = 0; i < batch.values.size(); ++i)
        out.values[i] = inverse_normal_cdf(batch.values[i]);
    return out;
}

} // namespace dbdp
