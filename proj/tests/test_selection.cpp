#include "support.hpp"

#include <seqind/selection.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

using namespace seqind;

namespace {

const std::vector<double> kDeciles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

std::vector<std::uint64_t> as_vector(const SubsequenceIndex& k) { return {k.checkpoints().begin(), k.checkpoints().end()}; }

// Block ends 2, 6, 14, ..., 2^21 - 2 (j <= 20) for growth 2.
SubsequenceIndex twenty_block_ends(const BoundedSequence& blk) { return block_ends(blk, (1u << 21) - 2); }

} // namespace

TEST_CASE("Kronecker sequence is measurable along the naturals")
{
    const auto v = kronecker(testsupport::kSqrt2m1);
    const auto rep = detect_measurable(v, naturals_index(10000, 10), kDeciles);
    CHECK(rep.measurable);
    REQUIRE(rep.limit_cdf);
    CHECK(sup_distance_to_uniform(*rep.limit_cdf) < 0.01);
    CHECK(rep.oscillation.size() == kDeciles.size());
    for (std::size_t i = 0; i < kDeciles.size(); ++i)
        CHECK(rep.traces[i].value == Catch::Approx(kDeciles[i]).margin(0.01));
}

TEST_CASE("block sequence is not measurable along all block ends")
{
    const auto blk = make_block(0.25, 0.75, 2);
    const std::vector<double> half{0.5};
    const auto rep = detect_measurable(blk, twenty_block_ends(blk), half);
    CHECK_FALSE(rep.measurable);
    CHECK(rep.oscillation[0] > 0.2);
}

TEST_CASE("constant sequence is measurable along every family member")
{
    const auto c = constant(0.3);
    for (const auto& kappa : kappa_family_builder(10000)) {
        const auto rep = detect_measurable(c, kappa, kDeciles);
        CHECK(rep.measurable);
        REQUIRE(rep.limit_cdf);
        CHECK(rep.limit_cdf->size() == 1);
        CHECK(rep.limit_cdf->points()[0] == 0.3);
    }
}

TEST_CASE("extraction from block ends keeps one parity")
{
    const auto blk = make_block(0.25, 0.75, 2);
    const std::vector<BoundedSequence> seqs{blk};
    const auto pool = twenty_block_ends(blk);
    REQUIRE(pool.size() == 20);
    const std::vector<double> half{0.5};
    const auto kappa = helly_extract(seqs, pool, half, {0.01, 5, 20});

    const auto low = as_vector(block_ends(blk, pool.back(), BlockParity::low));
    const auto high = as_vector(block_ends(blk, pool.back(), BlockParity::high));
    const auto got = as_vector(kappa);
    // Early ends can sit outside the band; every survivor has one parity and
    // the survivors include the deep ends of that parity.
    const bool all_low = std::includes(low.begin(), low.end(), got.begin(), got.end());
    const bool all_high = std::includes(high.begin(), high.end(), got.begin(), got.end());
    CHECK((all_low || all_high));
    CHECK(got.size() >= 5);
    CHECK(got.back() == (all_low ? low.back() : high.back()));

    const auto rep = detect_measurable(blk, kappa, half, 0.01, 5);
    CHECK(rep.measurable);
    // Oracle: the low-end ratio tends to 2/3, the high-end one to 1/3.
    CHECK(rep.traces[0].value == Catch::Approx(all_low ? 2.0 / 3 : 1.0 / 3).margin(0.01));
}

TEST_CASE("extraction is idempotent")
{
    const auto blk = make_block(0.25, 0.75, 2);
    const std::vector<BoundedSequence> seqs{blk};
    const std::vector<double> half{0.5};
    const auto kappa = helly_extract(seqs, twenty_block_ends(blk), half, {0.01, 5, 5});
    const auto again = helly_extract(seqs, kappa, half, {0.01, 5, 5});
    CHECK(again == kappa);

    const std::vector<BoundedSequence> kron{kronecker(testsupport::kSqrt2m1)};
    const auto k1 = helly_extract(kron, naturals_index(10000, 10), kDeciles);
    CHECK(helly_extract(kron, k1, kDeciles) == k1);
}

TEST_CASE("an already measurable sequence keeps its pool up to early trimming")
{
    const auto v = kronecker(testsupport::kSqrt2m1);
    const std::vector<BoundedSequence> seqs{v};
    const auto pool = naturals_index(10000, 10);
    REQUIRE(detect_measurable(v, pool, kDeciles).measurable);
    const auto kappa = helly_extract(seqs, pool, kDeciles);
    const auto got = as_vector(kappa);
    const auto all = as_vector(pool);
    CHECK(std::includes(all.begin(), all.end(), got.begin(), got.end()));
    CHECK(got.size() >= pool.size() * 9 / 10);
    CHECK(detect_measurable(v, kappa, kDeciles).measurable);
}

TEST_CASE("a constant sequence keeps the whole pool")
{
    const std::vector<BoundedSequence> seqs{constant(0.7)};
    const auto pool = naturals_index(5000, 5);
    CHECK(helly_extract(seqs, pool, kDeciles) == pool);
}

TEST_CASE("extraction failures")
{
    const auto blk = make_block(0.25, 0.75, 2);
    const std::vector<BoundedSequence> seqs{blk};
    const std::vector<double> half{0.5};
    const auto pool = twenty_block_ends(blk);
    CHECK_THROWS_AS(helly_extract(seqs, pool, half), std::invalid_argument); // shorter than 64
    try {
        (void)helly_extract(seqs, pool, half, {0.01, 11, 20});
        FAIL("expected ExtractionError");
    }
    catch (const ExtractionError& e) {
        CHECK(e.sequence() == 0);
        CHECK(e.grid_point() == 0.5);
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("deeper pool"));
    }
}

TEST_CASE("kappa family members")
{
    const auto fam = kappa_family_builder(100);
    std::vector<std::string> names;
    for (const auto& k : fam)
        names.push_back(k.rule());
    CHECK(names == std::vector<std::string>{"naturals", "evens", "odds", "squares", "powers_of_2", "thinned"});

    std::vector<std::uint64_t> squares;
    for (std::uint64_t r = 1; r <= 10; ++r)
        squares.push_back(r * r);
    CHECK(as_vector(fam[3]) == squares);
    CHECK(as_vector(kappa_family_builder(64)[4]) == std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64});
    CHECK(fam[1].back() == 100);
    CHECK(fam[2].back() == 99);
    CHECK(fam[0].size() == 100);
    CHECK(kappa_family_builder(10000)[0].size() == 1000);
}

TEST_CASE("thinning is seeded")
{
    const auto a = kappa_family_builder(10000, 42)[5];
    const auto b = kappa_family_builder(10000, 42)[5];
    const auto c = kappa_family_builder(10000, 43)[5];
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.size() > 300);
    CHECK(a.size() < 700);
}
