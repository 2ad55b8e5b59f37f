#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#ifdef STABCODE_CLI_PATH

namespace {

struct CliResult {
    int exit_code;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
    const std::string out = std::string(STABCODE_TEST_TMP) + "/cli_stdout.txt";
    const std::string cmd = std::string(STABCODE_CLI_PATH) + " " + args + " > " + out + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::ostringstream ss;
    ss << in.rdbuf();
    return {WEXITSTATUS(status), ss.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli assign emits the normalized table") {
    const auto res = run_cli("assign --r 3 --k 2");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("b,a1,a2,row_cost,total_cost") == 0);
    // 9 data rows + header
    int lines = 0;
    for (const char c : res.stdout_text)
        if (c == '\n') ++lines;
    CHECK(lines == 10);
}

TEST_CASE("cli assign rejects invalid lattice parameters") {
    CHECK(run_cli("assign --r 4 --k 2").exit_code == 2);
    CHECK(run_cli("assign --r 3 --k 0").exit_code == 2);
}

TEST_CASE("cli is deterministic under a fixed seed") {
    const std::string f1 = std::string(STABCODE_TEST_TMP) + "/sim1.csv";
    const std::string f2 = std::string(STABCODE_TEST_TMP) + "/sim2.csv";
    const std::string args = "simulate --codes md32 --grid 0:0.1:0.1 --horizon 20000 --seed 11 --out ";
    CHECK(run_cli(args + f1).exit_code == 0);
    CHECK(run_cli(args + f2).exit_code == 0);
    const std::string t1 = slurp(f1);
    CHECK(t1 == slurp(f2));
    CHECK(t1.find("p_loss,code,sigma_e2_db") == 0);
}

TEST_CASE("cli seed changes realizations but not theory columns") {
    const std::string f1 = std::string(STABCODE_TEST_TMP) + "/seed1.csv";
    const std::string f2 = std::string(STABCODE_TEST_TMP) + "/seed2.csv";
    CHECK(run_cli("simulate --codes md32 --grid 0:0:0.1 --horizon 20000 --seed 1 --out " + f1).exit_code == 0);
    CHECK(run_cli("simulate --codes md32 --grid 0:0:0.1 --horizon 20000 --seed 2 --out " + f2).exit_code == 0);
    const std::string a = slurp(f1), b = slurp(f2);
    CHECK(a != b);
    // last column (theory overlay) agrees
    const auto last_field = [](const std::string& text) {
        const auto line = text.substr(text.find('\n') + 1);
        return line.substr(line.rfind(',') + 1);
    };
    CHECK(last_field(a) == last_field(b));
}

TEST_CASE("cli invalid configuration exits 2 without partial output") {
    const std::string bad = std::string(STABCODE_TEST_TMP) + "/bad.json";
    {
        std::ofstream out(bad);
        out << "{\"plant\": {}}";
    }
    const std::string target = std::string(STABCODE_TEST_TMP) + "/should_not_exist.csv";
    std::remove(target.c_str());
    const auto res = run_cli("simulate --config " + bad + " --out " + target);
    CHECK(res.exit_code == 2);
    std::ifstream check(target);
    CHECK_FALSE(check.good());
}

TEST_CASE("cli design accepts the reference step and reports bounds") {
    const auto res = run_cli("design --k 3 --k-prime 2 --sigma-v2 133 --r 7 --delta 1.3856406460551018");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("accepted,1") != std::string::npos);
    CHECK(res.stdout_text.find("min_rate_bits,2") != std::string::npos);
}

TEST_CASE("cli design rejects an oversized step") {
    const auto res = run_cli("design --k 3 --k-prime 2 --sigma-v2 133 --r 7 --delta 40");
    CHECK(res.exit_code == 3);
}

TEST_CASE("cli design accepts the coarse two-description point") {
    const auto res = run_cli("design --k 2 --k-prime 1 --sigma-v2 133 --r 3 --delta 1.33");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("accepted,1") != std::string::npos);
    // sigma_v2 / sigma^2(1) = 133 / 3.13 sits around 42, well past the floor
    CHECK(res.stdout_text.find("sigma2_at_k_prime,3.13") != std::string::npos);
}

TEST_CASE("cli stability reports both tests") {
    const auto res = run_cli("stability --code md32_stab --grid 0:0.2:0.1");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("p_loss,k,k_prime,rho,avg_lhs,avg_rhs,avg_stable,rho_A,mss_stable") == 0);
}

#endif  // STABCODE_CLI_PATH
