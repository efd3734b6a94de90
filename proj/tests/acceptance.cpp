// One line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>

#include <stablemult/acceptance.hpp>

int main(int argc, char** argv) {
    using namespace stablemult;
    Suite suite = Suite::full;
    std::uint64_t seed = 42;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--suite")) suite = std::string(argv[i + 1]) == "fast" ? Suite::fast : Suite::full;
        if (!std::strcmp(argv[i], "--seed")) seed = std::stoull(argv[i + 1]);
    }
    const AcceptanceReport rep = run_acceptance(suite, seed, all_criteria(), [](const CriterionResult& r) {
        std::printf("[%s] %2d %s: %s  (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                    r.seconds);
        std::fflush(stdout);
    });
    std::printf("%s", rep.all_pass() ? "all criteria passed\n" : "some criteria FAILED\n");
    return rep.all_pass() ? 0 : 1;
}
