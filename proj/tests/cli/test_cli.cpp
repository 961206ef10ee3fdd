// End-to-end checks of the command-line tool: exit codes, output files,
// byte-identical reruns. Invoked as: cli_tests <mscw-binary> <models-dir>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "ok: " << what << "\n";
    } else {
        std::cout << "FAILED: " << what << "\n";
        ++failures;
    }
}

int run(const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: cli_tests <binary> <models-dir>\n";
        return 2;
    }
    const std::string bin = argv[1];
    const std::string models = argv[2];
    const std::string tmp = "cli_test_out";
    if (std::system(("mkdir -p " + tmp).c_str()) != 0) {
        std::cerr << "cannot create scratch directory\n";
        return 2;
    }

    expect(run(bin + " analyze --model " + models + "/k1_gaussian.json --out " + tmp +
               "/k1.json") == 0,
           "analyze on a valid model exits 0");
    expect(slurp(tmp + "/k1.json").find("\"Gaussian\"") != std::string::npos,
           "analyze reports a Gaussian law for the subcritical pair model");

    expect(run(bin + " analyze --model " + models + "/not_positive_definite.json") == 2,
           "analyze on a non-positive-definite model exits 2");

    expect(run(bin + " analyze --model " + tmp + "/does_not_exist.json") == 2,
           "analyze on a missing model file exits 2");

    expect(run(bin + " analyze --model " + models + "/k2_quartic.json --out " + tmp +
               "/k2.json") == 0,
           "analyze on the critical model exits 0");
    expect(slurp(tmp + "/k2.json").find("\"Quartic\"") != std::string::npos,
           "analyze reports a quartic law at the critical point");

    expect(run(bin + " verify --model " + models + "/k1_gaussian.json --sizes 40,80 --out " +
               tmp + "/sweep.csv --format csv") == 0,
           "verify sweep exits 0");
    {
        const auto csv = slurp(tmp + "/sweep.csv");
        expect(csv.find("N,covariance_max_rel") == 0, "verify csv has the header row");
        expect(csv.find("\n40,") != std::string::npos &&
                   csv.find("\n80,") != std::string::npos,
               "verify csv contains one row per sweep size");
    }

    expect(run(bin + " verify --model " + models + "/k1_gaussian.json --sizes 80,40") == 2,
           "verify rejects a non-increasing size list with exit 2");

    expect(run(bin + " verify --model " + models + "/k1_gaussian.json --sizes 40,9000 --out " +
               tmp + "/budget.csv --format csv") == 4,
           "verify exits 4 when a sweep size exceeds the enumeration budget");
    {
        const auto csv = slurp(tmp + "/budget.csv");
        expect(csv.find("\n40,") != std::string::npos, "partial results are still written");
        expect(csv.find("budget_exceeded") != std::string::npos,
               "the oversized row is flagged");
    }

    expect(run(bin + " verify --model " + models + "/k1_gaussian.json --sizes 40,80 --out " +
               tmp + "/sweep2.csv --format csv") == 0,
           "verify rerun exits 0");
    expect(slurp(tmp + "/sweep.csv") == slurp(tmp + "/sweep2.csv"),
           "verify csv is byte-identical across reruns");

    expect(run(bin + " verify --model " + models + "/two_minima.json --sizes 30,60 " +
               "--ball-center 0.89,0.89 --ball-radius 1.2 --out " + tmp + "/ball.csv " +
               "--format csv") == 0,
           "conditional verify exits 0");

    expect(run(bin + " sample --model " + models + "/sampler_demo.json --sweeps 2000 " +
               "--burn-in 200 --seed 5 --out " + tmp + "/mc1.json") == 0,
           "sample exits 0");
    expect(run(bin + " sample --model " + models + "/sampler_demo.json --sweeps 2000 " +
               "--burn-in 200 --seed 5 --out " + tmp + "/mc2.json") == 0,
           "sample rerun exits 0");
    expect(!slurp(tmp + "/mc1.json").empty() && slurp(tmp + "/mc1.json") == slurp(tmp + "/mc2.json"),
           "fixed seed gives byte-identical sampler output");

    expect(run(bin + " analyze --model " + models + "/k1_gaussian.json --out " + tmp +
               "/k1_again.json") == 0,
           "analyze rerun exits 0");
    expect(slurp(tmp + "/k1.json") == slurp(tmp + "/k1_again.json"),
           "analyze output is byte-identical across reruns");

    if (failures == 0) std::cout << "all cli checks passed\n";
    return failures == 0 ? 0 : 1;
}
