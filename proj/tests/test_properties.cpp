#include "properties.hpp"

#include <catch_amalgamated.hpp>

TEST_CASE("invariant suite")
{
    std::size_t total = 0;
    for (const auto& r : props::invariant_suite(20261015)) {
        INFO(r.name << ": " << r.first_failure);
        CHECK(r.ok());
        total += r.cases;
    }
    CHECK(total >= 1000);
}

TEST_CASE("invariant suite under a second seed")
{
    for (const auto& r : props::invariant_suite(7)) {
        INFO(r.name << ": " << r.first_failure);
        CHECK(r.ok());
    }
}
