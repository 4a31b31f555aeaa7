// Minimal library walk-through: builds two Kronecker sequences, runs the
// averaging test and the rectangle test along the naturals, and prints the
// verdicts.

#include <seqind/seqind.hpp>

#include <iostream>

int main()
{
    using namespace seqind;
    const std::vector<BoundedSequence> pair{kronecker(0.41421356237309504880L), kronecker(0.73205080756887729353L)};
    const std::vector<std::uint64_t> schedule{100, 1000, 10000};

    const auto statind = statind_test(pair, FunctionBattery::standard(), schedule);
    std::cout << "averaging test: " << to_string(statind.verdict) << " (max |gap| "
              << format_real(statind.max_terminal_gap) << ")\n";

    const std::vector<double> deciles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto rect = kappa_independence_test(pair, naturals_index(10000, 10), deciles);
    std::cout << "rectangle test along the naturals: " << to_string(rect.verdict) << " (max |residual| "
              << format_real(rect.max_abs_residual) << ")\n";

    const auto v = pair.front();
    const std::vector<BoundedSequence> reflected{v, reflection(v)};
    const auto dep = kappa_independence_test(reflected, naturals_index(10000, 10), deciles);
    std::cout << "v against 1 - v: " << to_string(dep.verdict) << '\n';
    return 0;
}
