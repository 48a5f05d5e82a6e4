// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "qmimo/validation.hpp"

int main(int argc, char** argv) {
    qmimo::AcceptanceOptions opt;
    if (argc > 1) opt.seed = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) opt.threads = std::atoi(argv[2]);

    int index = 1;
    const auto results =
        qmimo::run_acceptance_checks(opt, [&](const qmimo::CheckResult& r) {
            std::cout << "[" << index++ << "/11] ";
            qmimo::print_check(std::cout, r);
            std::cout.flush();
        });

    bool all_pass = true;
    for (const auto& r : results) all_pass &= r.pass;
    std::cout << (all_pass ? "ACCEPTANCE: all criteria passed"
                           : "ACCEPTANCE: one or more criteria FAILED")
              << std::endl;
    return all_pass ? 0 : 1;
}
