#pragma once

// Shared test fixtures and independent oracles. Nothing here calls into the
// library's arithmetic; oracles recompute from definitions.

#include <seqind/seq_core.hpp>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

inline constexpr long double kSqrt2m1 = 0.414213562373095048801688724209698079L;
inline constexpr long double kSqrt3m1 = 0.732050807568877293527446341505872367L;
inline constexpr long double kGoldenFrac = 0.618033988749894848204586834365638118L;

using Dec50 = boost::multiprecision::cpp_dec_float_50;

/// frac(n * alpha) with alpha given to 50 digits.
inline double frac_oracle(const std::string& alpha50, std::uint64_t n)
{
    const Dec50 x = Dec50(alpha50) * n;
    return static_cast<double>(x - floor(x));
}

inline const std::string kSqrt2m1Digits = "0.41421356237309504880168872420969807856967187537694";
inline const std::string kSqrt3m1Digits = "0.73205080756887729352744634150587236694280525381038";
inline const std::string kGoldenDigits = "0.61803398874989484820458683436563811772030917980576";

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("seqind_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Random sequence on [0,1] for property tests: a Kronecker sequence with a
/// random irrational-looking alpha, a random periodic pattern, or a block
/// sequence.
inline seqind::BoundedSequence random_sequence(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (rng() % 4) {
    case 0:
        return seqind::kronecker(static_cast<long double>(u(rng)));
    case 1: {
        std::vector<double> vals(1 + rng() % 7);
        for (auto& v : vals)
            v = u(rng);
        return seqind::periodic(vals);
    }
    case 2: {
        const double lo = 0.5 * u(rng);
        return seqind::make_block(lo, lo + 0.1 + 0.4 * u(rng), 2 + rng() % 3);
    }
    default:
        return seqind::van_der_corput(static_cast<std::uint32_t>(2 + rng() % 5));
    }
}

} // namespace testsupport
